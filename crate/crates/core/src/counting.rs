//! Exact integer parameter counting.
//!
//! Every quantity here is an exact integer and every arithmetic step is
//! overflow-checked; nothing wraps silently.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::partition::{bounded_set_partitions, members, Shape};

/// Accessible (`k`) and latent (`l`) parameter counts of a system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct KLPair {
    pub k: u64,
    pub l: u64,
}

impl KLPair {
    pub fn new(k: u64, l: u64) -> Result<Self> {
        if k == 0 || l > k {
            return Err(domain(format!("need k >= 1 and k >= l, got k={k}, l={l}")));
        }
        Ok(KLPair { k, l })
    }

    /// The trivial system: one parameter, nothing latent.
    pub const TRIVIAL: KLPair = KLPair { k: 1, l: 0 };

    pub fn sum(&self) -> u64 {
        self.k + self.l
    }

    pub fn difference(&self) -> u64 {
        self.k - self.l
    }
}

/// Exponents `(r, s)` and composition factor `alpha` of a theory family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TheoryProfile {
    pub r: u32,
    pub s: u32,
    pub alpha: u64,
}

impl TheoryProfile {
    pub fn new(r: u32, s: u32, alpha: u64) -> Result<Self> {
        if s < 1 || r < s {
            return Err(domain(format!("need r >= s >= 1, got r={r}, s={s}")));
        }
        if alpha < 1 {
            return Err(domain("alpha must be a positive integer"));
        }
        Ok(TheoryProfile { r, s, alpha })
    }

    /// Complex Hilbert space quantum theory.
    pub fn complex_qm() -> Self {
        TheoryProfile { r: 2, s: 2, alpha: 1 }
    }

    /// Real vector-space quantum theory.
    pub fn real_qm() -> Self {
        TheoryProfile { r: 2, s: 1, alpha: 1 }
    }

    pub fn is_locally_tomographic(&self) -> bool {
        self.r == self.s
    }
}

/// Distinguishable-state counts `N_i` of the components of a system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SystemDims(Vec<usize>);

impl SystemDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(domain("system needs at least one component"));
        }
        if let Some(pos) = dims.iter().position(|&n| n == 0) {
            return Err(domain(format!("component {pos} has N = 0")));
        }
        Ok(SystemDims(dims))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Hilbert space dimension of the whole system.
    pub fn total(&self) -> usize {
        self.0.iter().product()
    }
}

impl FromStr for SystemDims {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let dims = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Malformed(format!("bad dimension {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        SystemDims::new(dims)
    }
}

impl fmt::Display for SystemDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn checked_pow(base: u128, exp: u32) -> Result<u128> {
    base.checked_pow(exp).ok_or(Error::Overflow("N^r"))
}

/// `K = ((aN)^r + (aN)^s) / 2` and `L = ((aN)^r - (aN)^s) / 2`.
///
/// Both powers share the base, so their parity matches and the halves are
/// exact.
pub fn kl_single(n: u64, profile: &TheoryProfile) -> Result<KLPair> {
    if n == 0 {
        return Err(domain("N must be at least 1"));
    }
    let base = (n as u128)
        .checked_mul(profile.alpha as u128)
        .ok_or(Error::Overflow("alpha * N"))?;
    let hi = checked_pow(base, profile.r)?;
    let lo = checked_pow(base, profile.s)?;
    let k = hi.checked_add(lo).ok_or(Error::Overflow("K"))? / 2;
    let l = (hi - lo) / 2;
    Ok(KLPair {
        k: u64::try_from(k).map_err(|_| Error::Overflow("K"))?,
        l: u64::try_from(l).map_err(|_| Error::Overflow("L"))?,
    })
}

/// `K_AB = K_A K_B + L_A L_B`, `L_AB = K_A L_B + L_A K_B`.
pub fn kl_compose(a: KLPair, b: KLPair) -> Result<KLPair> {
    let mul = |x: u64, y: u64| x.checked_mul(y).ok_or(Error::Overflow("K/L composition"));
    let add = |x: u64, y: u64| x.checked_add(y).ok_or(Error::Overflow("K/L composition"));
    Ok(KLPair {
        k: add(mul(a.k, b.k)?, mul(a.l, b.l)?)?,
        l: add(mul(a.k, b.l)?, mul(a.l, b.k)?)?,
    })
}

/// Left fold of [`kl_compose`] over the single-component pairs.
pub fn kl_multi(dims: &SystemDims, profile: &TheoryProfile) -> Result<KLPair> {
    let mut iter = dims.as_slice().iter();
    let first = iter.next().ok_or_else(|| domain("empty system"))?;
    iter.try_fold(kl_single(*first as u64, profile)?, |acc, &n| {
        kl_compose(acc, kl_single(n as u64, profile)?)
    })
}

/// Bilocal ideality for three components:
/// `K_A K_BC + K_B K_AC + K_C K_AB - 2 K_A K_B K_C`.
pub fn k_three_body(ka: u64, kb: u64, kc: u64, kab: u64, kac: u64, kbc: u64) -> Result<i128> {
    if [ka, kb, kc, kab, kac, kbc].contains(&0) {
        return Err(domain("all K values must be at least 1"));
    }
    let ov = || Error::Overflow("three-body K");
    let m = |x: u64, y: u64| (x as i128).checked_mul(y as i128).ok_or_else(ov);
    let pairs = m(ka, kbc)?
        .checked_add(m(kb, kac)?)
        .and_then(|v| v.checked_add(m(kc, kab).ok()?))
        .ok_or_else(ov)?;
    let singles = m(ka, kb)?
        .checked_mul(kc as i128)
        .and_then(|v| v.checked_mul(2))
        .ok_or_else(ov)?;
    pairs.checked_sub(singles).ok_or_else(ov)
}

/// `h(N_A, N_B) = K_AB - K_A K_B`, the parameters only a joint measurement
/// on `AB` reaches. The joint system has `N_AB = alpha N_A N_B`.
pub fn h_value(na: u64, nb: u64, profile: &TheoryProfile) -> Result<u64> {
    if na == 0 || nb == 0 {
        return Err(domain("N must be at least 1"));
    }
    let joint = na
        .checked_mul(nb)
        .and_then(|v| v.checked_mul(profile.alpha))
        .ok_or(Error::Overflow("N_AB"))?;
    let k_ab = kl_single(joint, profile)?.k;
    let local = kl_single(na, profile)?
        .k
        .checked_mul(kl_single(nb, profile)?.k)
        .ok_or(Error::Overflow("K_A K_B"))?;
    k_ab.checked_sub(local)
        .ok_or_else(|| domain("K_AB < K_A K_B violates local independence"))
}

/// Result of matching a `K(N)` table against `K = (N^r + N^s) / 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FitOutcome {
    Fit(TheoryProfile),
    NoFit(String),
}

/// Finds the unique `(r, s)` with `r >= s >= 1` reproducing every entry of
/// the table, searching exhaustively up to `r <= log2(2 K(2))`.
pub fn fit_profile(table: &[(u64, u64)]) -> Result<FitOutcome> {
    let mut entries: BTreeMap<u64, u64> = BTreeMap::new();
    for &(n, k) in table {
        if n == 0 {
            return Err(Error::Malformed("table entry with N = 0".into()));
        }
        if let Some(prev) = entries.insert(n, k) {
            if prev != k {
                return Err(Error::Malformed(format!(
                    "conflicting entries for N = {n}: K = {prev} and K = {k}"
                )));
            }
        }
    }
    if let Some(&k1) = entries.get(&1) {
        if k1 != 1 {
            return Err(Error::Malformed(format!(
                "K(1) = {k1}, but a single-state system always has K = 1"
            )));
        }
    }
    let (Some(&k2), true) = (entries.get(&2), entries.contains_key(&3)) else {
        return Err(Error::Malformed(
            "table must contain entries for N = 2 and N = 3".into(),
        ));
    };

    let mut prev: Option<(u64, u64)> = None;
    for (&n, &k) in &entries {
        if let Some((pn, pk)) = prev {
            if k <= pk {
                return Ok(FitOutcome::NoFit(format!(
                    "K is not strictly increasing: K({pn}) = {pk}, K({n}) = {k}"
                )));
            }
        }
        prev = Some((n, k));
    }

    // K(2) >= 2^(r-1)
    let r_max = (2 * k2 as u128).ilog2();
    for r in 1..=r_max {
        for s in 1..=r {
            let profile = TheoryProfile { r, s, alpha: 1 };
            let fits = entries
                .iter()
                .all(|(&n, &k)| kl_single(n, &profile).map(|kl| kl.k == k).unwrap_or(false));
            if fits {
                return Ok(FitOutcome::Fit(profile));
            }
        }
    }
    Ok(FitOutcome::NoFit(format!(
        "no (r, s) with r >= s >= 1 and r <= {r_max} reproduces the table"
    )))
}

/// Naive versus true parameter count for bilocal measurements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RedundancyAudit {
    pub naive_count: u64,
    pub true_k: u64,
    pub surplus: i64,
    /// Contribution of each measurement class, keyed by block sizes ("2+1+1").
    pub per_class: BTreeMap<String, u64>,
}

/// Counts the parameters obtainable from concurrent 1- and 2-component
/// measurements as if every class were independent: for each partition of
/// the components into singletons and pairs, the product of `K` over
/// singletons and `K_pair - K_i K_j` over pairs.
pub fn bilocal_redundancy_audit(dims: &SystemDims, profile: &TheoryProfile) -> Result<RedundancyAudit> {
    if dims.len() < 3 {
        return Err(domain("the redundancy audit needs at least 3 components"));
    }
    if dims.len() > 12 {
        return Err(domain("the redundancy audit supports at most 12 components"));
    }
    let singles = dims
        .as_slice()
        .iter()
        .map(|&n| kl_single(n as u64, profile))
        .collect::<Result<Vec<_>>>()?;
    let ov = || Error::Overflow("audit count");

    let mut per_class: BTreeMap<String, u64> = BTreeMap::new();
    let mut naive: u64 = 0;
    for partition in bounded_set_partitions(dims.len(), 2) {
        let mut term: u64 = 1;
        for &block in &partition {
            let idx: Vec<usize> = members(block).collect();
            let factor = match idx.as_slice() {
                [i] => singles[*i].k,
                [i, j] => {
                    let joint = kl_compose(singles[*i], singles[*j])?.k;
                    joint - singles[*i].k * singles[*j].k
                }
                _ => unreachable!("blocks are bounded by 2"),
            };
            term = term.checked_mul(factor).ok_or_else(ov)?;
        }
        let label = Shape::of_blocks(&partition).to_string();
        let slot = per_class.entry(label).or_insert(0);
        *slot = slot.checked_add(term).ok_or_else(ov)?;
        naive = naive.checked_add(term).ok_or_else(ov)?;
    }
    let true_k = kl_multi(dims, profile)?.k;
    let surplus = i64::try_from(naive as i128 - true_k as i128).map_err(|_| ov())?;
    Ok(RedundancyAudit {
        naive_count: naive,
        true_k,
        surplus,
        per_class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(v: &[usize]) -> SystemDims {
        SystemDims::new(v.to_vec()).unwrap()
    }

    fn prof(r: u32, s: u32) -> TheoryProfile {
        TheoryProfile::new(r, s, 1).unwrap()
    }

    #[test]
    fn single_system_counts() {
        assert_eq!(kl_single(2, &prof(2, 2)).unwrap(), KLPair { k: 4, l: 0 });
        assert_eq!(kl_single(2, &prof(2, 1)).unwrap(), KLPair { k: 3, l: 1 });
        assert_eq!(kl_single(4, &prof(2, 1)).unwrap(), KLPair { k: 10, l: 6 });
        for r in 1..6 {
            assert_eq!(kl_single(1, &prof(r, r)).unwrap(), KLPair::TRIVIAL);
        }
        assert!(kl_single(0, &prof(2, 1)).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let err = kl_single(u64::MAX, &prof(3, 1)).unwrap_err();
        assert!(matches!(err, Error::Overflow(_)));
        let big = KLPair { k: u64::MAX, l: 1 };
        assert!(matches!(kl_compose(big, big), Err(Error::Overflow(_))));
    }

    #[test]
    fn alpha_extension() {
        let p = TheoryProfile::new(2, 1, 2).unwrap();
        // (2*3)^2 = 36, 2*3 = 6
        assert_eq!(kl_single(3, &p).unwrap(), KLPair { k: 21, l: 15 });
        // alpha-composition keeps h = L L
        assert_eq!(h_value(2, 3, &p).unwrap(), kl_single(2, &p).unwrap().l * 15);
    }

    #[test]
    fn profile_validation() {
        assert!(TheoryProfile::new(1, 2, 1).is_err());
        assert!(TheoryProfile::new(2, 0, 1).is_err());
        assert!(TheoryProfile::new(2, 1, 0).is_err());
        assert!(SystemDims::new(vec![]).is_err());
        assert!(SystemDims::new(vec![2, 0]).is_err());
        assert_eq!("2, 3,4".parse::<SystemDims>().unwrap(), dims(&[2, 3, 4]));
        assert!("2,x".parse::<SystemDims>().is_err());
    }

    #[test]
    fn composition_examples() {
        let rebit = KLPair { k: 3, l: 1 };
        assert_eq!(kl_compose(rebit, rebit).unwrap(), KLPair { k: 10, l: 6 });
        assert_eq!(
            kl_compose(KLPair { k: 4, l: 0 }, KLPair { k: 4, l: 0 }).unwrap(),
            KLPair { k: 16, l: 0 }
        );
        assert_eq!(
            kl_compose(KLPair { k: 7, l: 0 }, KLPair { k: 5, l: 0 }).unwrap(),
            KLPair { k: 35, l: 0 }
        );
    }

    #[test]
    fn multi_component_examples() {
        // fold: 3*10 + 1*6 = 36, 3*6 + 1*10 = 28
        assert_eq!(
            kl_multi(&dims(&[2, 2, 2]), &prof(2, 1)).unwrap(),
            KLPair { k: 36, l: 28 }
        );
        assert_eq!(
            kl_multi(&dims(&[2, 2, 2]), &prof(2, 2)).unwrap(),
            KLPair { k: 64, l: 0 }
        );
        assert_eq!(
            kl_multi(&dims(&[5]), &prof(3, 2)).unwrap(),
            kl_single(5, &prof(3, 2)).unwrap()
        );
    }

    #[test]
    fn three_body_examples() {
        assert_eq!(k_three_body(3, 3, 3, 10, 10, 10).unwrap(), 36);
        assert_eq!(k_three_body(4, 4, 4, 16, 16, 16).unwrap(), 64);
        // trivial A: K_AB = K_B, K_AC = K_C
        assert_eq!(k_three_body(1, 3, 6, 3, 6, 21).unwrap(), 21);
        assert!(k_three_body(0, 1, 1, 1, 1, 1).is_err());
    }

    #[test]
    fn h_examples() {
        assert_eq!(h_value(2, 2, &prof(2, 1)).unwrap(), 1);
        assert_eq!(h_value(2, 2, &prof(2, 2)).unwrap(), 0);
        // K(6) = 21, K(3) K(2) = 18
        assert_eq!(h_value(3, 2, &prof(2, 1)).unwrap(), 3);
    }

    #[test]
    fn fit_examples() {
        let real = fit_profile(&[(1, 1), (2, 3), (3, 6), (4, 10)]).unwrap();
        assert_eq!(real, FitOutcome::Fit(prof(2, 1)));
        let complex = fit_profile(&[(1, 1), (2, 4), (3, 9), (4, 16)]).unwrap();
        assert_eq!(complex, FitOutcome::Fit(prof(2, 2)));
        let bad = fit_profile(&[(1, 1), (2, 3), (3, 7)]).unwrap();
        assert!(matches!(bad, FitOutcome::NoFit(_)));
    }

    #[test]
    fn fit_rejects_malformed_tables() {
        assert!(matches!(
            fit_profile(&[(1, 2), (2, 3), (3, 6)]),
            Err(Error::Malformed(_))
        ));
        assert!(matches!(
            fit_profile(&[(2, 3), (2, 4), (3, 6)]),
            Err(Error::Malformed(_))
        ));
        assert!(matches!(fit_profile(&[(2, 3)]), Err(Error::Malformed(_))));
        // a consistent duplicate is fine
        assert_eq!(
            fit_profile(&[(2, 3), (2, 3), (3, 6)]).unwrap(),
            FitOutcome::Fit(prof(2, 1))
        );
        assert!(matches!(fit_profile(&[(2, 5), (3, 4)]).unwrap(), FitOutcome::NoFit(_)));
    }

    #[test]
    fn fit_finds_higher_exponents() {
        let p = prof(4, 3);
        let table: Vec<(u64, u64)> = (1..6).map(|n| (n, kl_single(n, &p).unwrap().k)).collect();
        assert_eq!(fit_profile(&table).unwrap(), FitOutcome::Fit(p));
    }

    #[test]
    fn four_rebit_audit() {
        let audit = bilocal_redundancy_audit(&dims(&[2, 2, 2, 2]), &prof(2, 1)).unwrap();
        assert_eq!(audit.naive_count, 138);
        assert_eq!(audit.true_k, 136);
        assert_eq!(audit.surplus, 2);
        assert_eq!(audit.per_class["1+1+1+1"], 81);
        assert_eq!(audit.per_class["2+1+1"], 54);
        assert_eq!(audit.per_class["2+2"], 3);
    }

    #[test]
    fn small_audits() {
        let three = bilocal_redundancy_audit(&dims(&[2, 2, 2]), &prof(2, 1)).unwrap();
        assert_eq!((three.naive_count, three.true_k, three.surplus), (36, 36, 0));
        let lt = bilocal_redundancy_audit(&dims(&[2, 2, 2, 2]), &prof(2, 2)).unwrap();
        assert_eq!((lt.naive_count, lt.true_k, lt.surplus), (256, 256, 0));
        assert!(bilocal_redundancy_audit(&dims(&[2, 2]), &prof(2, 1)).is_err());
    }
}
