//! Real quantum theory fails local tomography but passes bilocal tomography.
//!
//! [`local_tomography_witness`] exhibits two real states that no product of
//! single-site real observables can tell apart, and
//! [`four_rebit_coincidence`] shows why two of the 138 naive bilocal
//! parameters of four rebits are redundant.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::bases::{
    bilocal_projector_basis, real_product_basis, sigma_basis, sigma_op, BasisLabel, PairingRule, SiteLabel,
};
use crate::counting::{bilocal_redundancy_audit, SystemDims, TheoryProfile};
use crate::error::{domain, Result};
use crate::json::{f17, f17_seq};
use crate::operator::{embed_factors, tensor, HermitianOp, Reality};
use crate::tomography::{random_real_state, DensityMatrix, FieldKind};

/// Two states that agree on every local product statistic.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub state_a: DensityMatrix,
    pub state_b: DensityMatrix,
    pub global_distance: f64,
    pub max_local_stat_gap: f64,
    pub local_observables_checked: usize,
    pub discriminating_observable: BasisLabel,
    pub discriminating_gap: f64,
}

impl WitnessReport {
    pub fn is_valid(&self) -> bool {
        self.global_distance > 0.1 && self.max_local_stat_gap <= 1e-12
    }
}

/// JSON view of a [`WitnessReport`].
#[derive(Debug, Clone, Serialize)]
pub struct WitnessSummary {
    pub dims: Vec<usize>,
    #[serde(serialize_with = "f17")]
    pub global_distance: f64,
    #[serde(serialize_with = "f17")]
    pub max_local_stat_gap: f64,
    pub local_observables_checked: usize,
    pub discriminating_observable: String,
    #[serde(serialize_with = "f17")]
    pub discriminating_gap: f64,
    pub states_psd_real: bool,
    pub valid: bool,
}

impl WitnessSummary {
    pub fn new(dims: &SystemDims, report: &WitnessReport) -> Self {
        WitnessSummary {
            dims: dims.as_slice().to_vec(),
            global_distance: report.global_distance,
            max_local_stat_gap: report.max_local_stat_gap,
            local_observables_checked: report.local_observables_checked,
            discriminating_observable: report.discriminating_observable.to_string(),
            discriminating_gap: report.discriminating_gap,
            states_psd_real: report.state_a.field() == FieldKind::Real && report.state_b.field() == FieldKind::Real,
            valid: report.is_valid(),
        }
    }
}

/// `rho± = (I ± sigma_y ⊗ sigma_y) / (N_A N_B)` with `sigma_y` acting on
/// levels 1 and 2 of each site.
pub fn local_tomography_witness(dims: &SystemDims) -> Result<WitnessReport> {
    let &[na, nb] = dims.as_slice() else {
        return Err(domain("the witness needs exactly two sites"));
    };
    if na < 2 || nb < 2 {
        return Err(domain("both sites need at least two levels"));
    }
    let total = (na * nb) as f64;
    let label = BasisLabel::new(vec![SiteLabel::Y(1, 2), SiteLabel::Y(1, 2)], &[na, nb])?;
    let yy = tensor(&[sigma_op(na, SiteLabel::Y(1, 2)), sigma_op(nb, SiteLabel::Y(1, 2))])?;
    let id = HermitianOp::identity(na * nb);
    let plus = HermitianOp::from_real((id.real_part() + yy.real_part()) / total)?;
    let minus = HermitianOp::from_real((id.real_part() - yy.real_part()) / total)?;
    let state_a = DensityMatrix::new(plus, FieldKind::Real)?;
    let state_b = DensityMatrix::new(minus, FieldKind::Real)?;

    let local = |n: usize| -> Result<Vec<HermitianOp>> {
        Ok(sigma_basis(n)?
            .ops()
            .iter()
            .filter(|op| op.reality() == Reality::RealSymmetric)
            .cloned()
            .collect())
    };
    let (la, lb) = (local(na)?, local(nb)?);
    let mut max_gap: f64 = 0.0;
    let mut checked = 0;
    for a in &la {
        for b in &lb {
            let obs = tensor(&[a.clone(), b.clone()])?;
            let gap = obs.trace_product(state_a.op()) - obs.trace_product(state_b.op());
            max_gap = max_gap.max(gap.norm());
            checked += 1;
        }
    }
    // single-site observables with the identity on the other site
    for (ops, left) in [(&la, true), (&lb, false)] {
        for op in ops {
            let obs = if left {
                tensor(&[op.clone(), HermitianOp::identity(nb)])?
            } else {
                tensor(&[HermitianOp::identity(na), op.clone()])?
            };
            let gap = obs.trace_product(state_a.op()) - obs.trace_product(state_b.op());
            max_gap = max_gap.max(gap.norm());
            checked += 1;
        }
    }
    let discriminating_gap = (yy.trace_product(state_a.op()) - yy.trace_product(state_b.op())).re;
    Ok(WitnessReport {
        global_distance: state_a.frobenius_distance(&state_b),
        state_a,
        state_b,
        max_local_stat_gap: max_gap,
        local_observables_checked: checked,
        discriminating_observable: label,
        discriminating_gap,
    })
}

/// Labels of real-product basis elements on which `rho+ - rho-` has a
/// coefficient above `1e-12`.
pub fn witness_support(dims: &SystemDims, report: &WitnessReport) -> Result<Vec<(BasisLabel, f64)>> {
    let basis = real_product_basis(dims)?;
    let diff = HermitianOp::from_real(report.state_a.op().real_part() - report.state_b.op().real_part())?;
    let coeffs = basis.expand(&diff)?;
    Ok(basis
        .labels()
        .iter()
        .zip(coeffs)
        .filter(|(_, c)| c.abs() > 1e-12)
        .map(|(l, c)| (l.clone(), c))
        .collect())
}

/// The three ways of splitting four sites into two pairs.
pub const FOUR_SITE_PAIRINGS: [[(usize, usize); 2]; 3] = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];

#[derive(Debug, Clone, Serialize)]
pub struct CoincidenceReport {
    /// Coefficient of `Y⊗Y⊗Y⊗Y` read from the full Pauli expansion.
    #[serde(serialize_with = "f17")]
    pub pauli_coefficient: f64,
    /// The same coefficient extracted through the `AB|CD`, `AC|BD` and
    /// `AD|BC` two-pair measurements.
    #[serde(serialize_with = "f17_seq")]
    pub pairing_coefficients: Vec<f64>,
    #[serde(serialize_with = "f17")]
    pub max_disagreement: f64,
    /// Frobenius error of the 256-term Pauli expansion.
    #[serde(serialize_with = "f17")]
    pub expansion_error: f64,
    pub naive_bilocal_count: u64,
    pub independent_bilocal_parameters: usize,
}

fn pauli(which: char) -> DMatrix<Complex64> {
    let c = |re, im| Complex64::new(re, im);
    let z = c(0.0, 0.0);
    let entries = match which {
        'I' => [c(1.0, 0.0), z, z, c(1.0, 0.0)],
        'X' => [z, c(1.0, 0.0), c(1.0, 0.0), z],
        'Y' => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        'Z' => [c(1.0, 0.0), z, z, c(-1.0, 0.0)],
        _ => unreachable!(),
    };
    DMatrix::from_row_slice(2, 2, &entries)
}

/// Coefficients `c_P = Tr(rho P) / 16` of the 256 four-qubit Pauli products,
/// indexed by strings such as `"XIYZ"`.
pub fn pauli_expansion(rho: &DensityMatrix) -> Result<Vec<(String, f64)>> {
    if rho.dim() != 16 {
        return Err(domain("Pauli expansion needs a four-qubit state"));
    }
    let letters = ['I', 'X', 'Y', 'Z'];
    let mut out = Vec::with_capacity(256);
    for idx in 0..256usize {
        let word: String = (0..4).map(|s| letters[(idx >> (2 * (3 - s))) & 3]).collect();
        let mats: Vec<HermitianOp> = word
            .chars()
            .map(|ch| HermitianOp::new(pauli(ch)))
            .collect::<Result<_>>()?;
        let op = tensor(&mats)?;
        out.push((word, op.trace_product(rho.op()).re / 16.0));
    }
    Ok(out)
}

/// Reads the `Y⊗Y⊗Y⊗Y` coefficient of a four-rebit state through each of the
/// three two-pair groupings and through the full Pauli expansion.
pub fn four_rebit_coincidence_for(rho: &DensityMatrix) -> Result<CoincidenceReport> {
    let expansion = pauli_expansion(rho)?;
    let mut rebuilt = DMatrix::<Complex64>::zeros(16, 16);
    for (word, c) in &expansion {
        let mats: Vec<HermitianOp> = word
            .chars()
            .map(|ch| HermitianOp::new(pauli(ch)))
            .collect::<Result<_>>()?;
        rebuilt += tensor(&mats)?.matrix() * Complex64::new(*c, 0.0);
    }
    let expansion_error = (rebuilt - rho.op().matrix()).norm();
    let pauli_coefficient = expansion
        .iter()
        .find(|(w, _)| w == "YYYY")
        .map(|(_, c)| *c)
        .expect("YYYY is one of the words");

    // Each pair measures sigma_y ⊗ sigma_y jointly; the pair factors are
    // placed on their own sites.
    let y = pauli('Y');
    let pair = y.kronecker(&y);
    let mut pairing_coefficients = Vec::with_capacity(3);
    for pairing in FOUR_SITE_PAIRINGS {
        let factors: Vec<(Vec<usize>, &DMatrix<Complex64>)> =
            pairing.iter().map(|&(a, b)| (vec![a, b], &pair)).collect();
        let obs = HermitianOp::new(embed_factors(&[2, 2, 2, 2], &factors)?)?;
        pairing_coefficients.push(obs.trace_product(rho.op()).re / 16.0);
    }
    let max_disagreement = pairing_coefficients
        .iter()
        .map(|c| (c - pauli_coefficient).abs())
        .fold(0.0, f64::max);

    let dims = SystemDims::new(vec![2, 2, 2, 2])?;
    let audit = bilocal_redundancy_audit(&dims, &TheoryProfile::real_qm())?;
    let (rank, _) = bilocal_projector_basis(&dims, &PairingRule::Adjacent)?.rank()?;
    Ok(CoincidenceReport {
        pauli_coefficient,
        pairing_coefficients,
        max_disagreement,
        expansion_error,
        naive_bilocal_count: audit.naive_count,
        independent_bilocal_parameters: rank,
    })
}

/// [`four_rebit_coincidence_for`] on a random real four-rebit state.
pub fn four_rebit_coincidence<R: Rng + ?Sized>(rng: &mut R) -> Result<CoincidenceReport> {
    four_rebit_coincidence_for(&random_real_state(16, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dims(v: &[usize]) -> SystemDims {
        SystemDims::new(v.to_vec()).unwrap()
    }

    #[test]
    fn two_rebit_witness() {
        let report = local_tomography_witness(&dims(&[2, 2])).unwrap();
        assert!(report.is_valid());
        // (rho+ - rho-) = (Y⊗Y)/2 has Frobenius norm 1
        assert!((report.global_distance - 1.0).abs() < 1e-15);
        assert!((report.discriminating_gap - 2.0).abs() < 1e-15);
        assert_eq!(report.max_local_stat_gap, 0.0);
        assert_eq!(report.local_observables_checked, 9 + 6);
        assert_eq!(report.discriminating_observable.to_string(), "y12⊗y12");
    }

    #[test]
    fn rebit_qutrit_witness() {
        let report = local_tomography_witness(&dims(&[2, 3])).unwrap();
        assert!(report.is_valid());
        assert_eq!(report.local_observables_checked, 3 * 6 + 3 + 6);
        assert!((report.global_distance - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn witness_rejects_bad_dims() {
        assert!(local_tomography_witness(&dims(&[1, 2])).is_err());
        assert!(local_tomography_witness(&dims(&[2, 2, 2])).is_err());
    }

    #[test]
    fn witness_difference_needs_two_y_factors() {
        for d in [[2, 2], [2, 3], [3, 3]] {
            let sys = dims(&d);
            let report = local_tomography_witness(&sys).unwrap();
            let support = witness_support(&sys, &report).unwrap();
            assert!(!support.is_empty());
            assert!(support.iter().all(|(l, _)| l.y_count() >= 2), "{support:?}");
        }
    }

    #[test]
    fn pairings_agree_on_random_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let report = four_rebit_coincidence(&mut rng).unwrap();
        assert!(report.max_disagreement <= 1e-12);
        assert!(report.expansion_error <= 1e-12);
        assert_eq!(report.naive_bilocal_count, 138);
        assert_eq!(report.independent_bilocal_parameters, 136);
    }

    #[test]
    fn product_state_has_no_y4_term() {
        let rho = DensityMatrix::maximally_mixed(16, FieldKind::Real);
        let report = four_rebit_coincidence_for(&rho).unwrap();
        assert_eq!(report.pauli_coefficient, 0.0);
        assert!(report.pairing_coefficients.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn injected_y4_amplitude_is_recovered() {
        let y4 = tensor(&vec![HermitianOp::new(pauli('Y')).unwrap(); 4]).unwrap();
        let m = (DMatrix::<f64>::identity(16, 16) + y4.real_part()) / 16.0;
        let op = HermitianOp::from_real(m).unwrap();
        assert!(op.min_eigenvalue() >= -1e-12);
        let rho = DensityMatrix::new(op, FieldKind::Real).unwrap();
        let report = four_rebit_coincidence_for(&rho).unwrap();
        assert!((report.pauli_coefficient - 1.0 / 16.0).abs() < 1e-15);
        assert!(report.max_disagreement <= 1e-15);
    }
}
