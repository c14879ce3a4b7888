//! Operator families spanning Hermitian and real-symmetric matrices.
//!
//! Per-site labels use 1-based levels. Within a site the order is diagonal
//! projectors first, then `x` labels, then `y` labels, each lexicographic in
//! `(u, v)`. Products are enumerated with site 0 as the outermost index.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::counting::SystemDims;
use crate::error::{domain, Result};
use crate::operator::{
    embed_factors, linear_independence_rank, numerical_rank, rank_tolerance, tensor, HermitianOp, Reality,
};

/// Label of a single-site operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SiteLabel {
    Diag(usize),
    X(usize, usize),
    Y(usize, usize),
}

impl SiteLabel {
    pub fn is_sigma(&self) -> bool {
        !matches!(self, SiteLabel::Diag(_))
    }

    pub fn is_y(&self) -> bool {
        matches!(self, SiteLabel::Y(..))
    }

    fn levels(&self) -> (usize, usize) {
        match *self {
            SiteLabel::Diag(v) => (v, v),
            SiteLabel::X(u, v) | SiteLabel::Y(u, v) => (u, v),
        }
    }
}

impl fmt::Display for SiteLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteLabel::Diag(v) => write!(f, "P{v}"),
            SiteLabel::X(u, v) => write!(f, "x{u}{v}"),
            SiteLabel::Y(u, v) => write!(f, "y{u}{v}"),
        }
    }
}

/// All labels of one site of dimension `n`, in basis order.
pub fn site_labels(n: usize) -> Vec<SiteLabel> {
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v))).collect();
    (1..=n)
        .map(SiteLabel::Diag)
        .chain(pairs.iter().map(|&(u, v)| SiteLabel::X(u, v)))
        .chain(pairs.iter().map(|&(u, v)| SiteLabel::Y(u, v)))
        .collect()
}

/// One label per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    pub sites: Vec<SiteLabel>,
}

impl BasisLabel {
    pub fn new(sites: Vec<SiteLabel>, site_dims: &[usize]) -> Result<Self> {
        if sites.len() != site_dims.len() {
            return Err(domain("label length does not match the number of sites"));
        }
        for (label, &n) in sites.iter().zip(site_dims) {
            let (u, v) = label.levels();
            let ok = match label {
                SiteLabel::Diag(_) => u >= 1 && u <= n,
                _ => u >= 1 && u < v && v <= n,
            };
            if !ok {
                return Err(domain(format!("label {label} is invalid on a site of dimension {n}")));
            }
        }
        Ok(BasisLabel { sites })
    }

    pub fn y_count(&self) -> usize {
        self.sites.iter().filter(|s| s.is_y()).count()
    }

    pub fn y_parity_even(&self) -> bool {
        self.y_count().is_multiple_of(2)
    }

    /// Number of `x` or `y` factors.
    pub fn sigma_count(&self) -> usize {
        self.sites.iter().filter(|s| s.is_sigma()).count()
    }

    pub fn y_sites(&self) -> Vec<usize> {
        (0..self.sites.len()).filter(|&i| self.sites[i].is_y()).collect()
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sites.iter().enumerate() {
            if i > 0 {
                f.write_str("⊗")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl Serialize for BasisLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    ComplexProjector,
    Sigma,
    RealProduct,
    BilocalProjector,
}

impl BasisKind {
    pub fn is_projector(&self) -> bool {
        matches!(self, BasisKind::ComplexProjector | BasisKind::BilocalProjector)
    }
}

impl std::str::FromStr for BasisKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex" | "complex-projector" => Ok(BasisKind::ComplexProjector),
            "sigma" => Ok(BasisKind::Sigma),
            "real" | "real-product" => Ok(BasisKind::RealProduct),
            "bilocal" | "bilocal-projector" => Ok(BasisKind::BilocalProjector),
            other => Err(crate::Error::Malformed(format!("unknown basis kind {other:?}"))),
        }
    }
}

/// An operator acting on a group of sites, indexed by those sites in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub sites: Vec<usize>,
    pub op: HermitianOp,
}

/// Ordered operators with matching labels and their site factorization.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    kind: BasisKind,
    site_dims: Vec<usize>,
    ops: Vec<HermitianOp>,
    labels: Vec<BasisLabel>,
    factors: Vec<Vec<Factor>>,
}

/// Numerical certificate of a basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisCertificate {
    pub kind: BasisKind,
    pub count: usize,
    pub rank: usize,
    #[serde(serialize_with = "crate::json::f17")]
    pub min_relative_singular_value: f64,
    pub full_rank: bool,
    /// `max ||P^2 - P||` for projector kinds.
    #[serde(serialize_with = "crate::json::f17_opt")]
    pub max_idempotence_defect: Option<f64>,
    pub all_real_symmetric: bool,
    pub max_locality: usize,
    #[serde(serialize_with = "crate::json::f17")]
    pub factorization_defect: f64,
}

impl OperatorBasis {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    /// Dimension of the full space.
    pub fn dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[HermitianOp] {
        &self.ops
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn factors(&self, index: usize) -> &[Factor] {
        &self.factors[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisLabel, &HermitianOp)> {
        self.labels.iter().zip(&self.ops)
    }

    /// Largest number of sites any single factor of operator `index` acts on.
    pub fn locality_degree(&self, index: usize) -> usize {
        self.factors[index].iter().map(|f| f.sites.len()).max().unwrap_or(0)
    }

    /// Keeps only the elements whose label satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&BasisLabel) -> bool) -> OperatorBasis {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(&self.labels[i])).collect();
        OperatorBasis {
            kind: self.kind,
            site_dims: self.site_dims.clone(),
            ops: idx.iter().map(|&i| self.ops[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            factors: idx.iter().map(|&i| self.factors[i].clone()).collect(),
        }
    }

    pub fn rank(&self) -> Result<(usize, f64)> {
        linear_independence_rank(&self.ops)
    }

    /// Rank, idempotence, reality and factorization checks in one pass.
    pub fn certify(&self) -> Result<BasisCertificate> {
        let (rank, min_rel) = self.rank()?;
        let max_idempotence_defect = self
            .kind
            .is_projector()
            .then(|| self.ops.iter().map(HermitianOp::idempotence_defect).fold(0.0, f64::max));
        let mut factorization_defect: f64 = 0.0;
        for (op, factors) in self.ops.iter().zip(&self.factors) {
            let parts: Vec<(Vec<usize>, &DMatrix<Complex64>)> =
                factors.iter().map(|f| (f.sites.clone(), f.op.matrix())).collect();
            let rebuilt = embed_factors(&self.site_dims, &parts)?;
            let defect = (rebuilt - op.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            factorization_defect = factorization_defect.max(defect);
        }
        Ok(BasisCertificate {
            kind: self.kind,
            count: self.len(),
            rank,
            min_relative_singular_value: min_rel,
            full_rank: rank == self.len(),
            max_idempotence_defect,
            all_real_symmetric: self.ops.iter().all(|op| op.reality() == Reality::RealSymmetric),
            max_locality: (0..self.len()).map(|i| self.locality_degree(i)).max().unwrap_or(0),
            factorization_defect,
        })
    }

    fn column_matrix(&self) -> DMatrix<f64> {
        let rows = 2 * self.dim() * self.dim();
        let mut m = DMatrix::<f64>::zeros(rows, self.len());
        for (c, op) in self.ops.iter().enumerate() {
            for (r, v) in op.vectorize().into_iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Real coefficients `c` with `sum_i c_i B_i = target`, by least squares.
    /// Fails when the basis is rank deficient or the target lies outside its
    /// span by more than `1e-8`.
    pub fn expand(&self, target: &HermitianOp) -> Result<Vec<f64>> {
        if target.dim() != self.dim() {
            return Err(domain(format!(
                "target of dimension {} does not match basis dimension {}",
                target.dim(),
                self.dim()
            )));
        }
        let m = self.column_matrix();
        let (rank, _) = numerical_rank(m.clone(), rank_tolerance());
        if rank < self.len() {
            return Err(crate::Error::IncompleteFrame {
                rank,
                required: self.len(),
                deficit: self.len() - rank,
            });
        }
        let b = DVector::from_vec(target.vectorize());
        let svd = m.clone().svd(true, true);
        let coeffs = svd.solve(&b, 0.0).map_err(|e| domain(e.to_string()))?;
        let residual = (&m * &coeffs - &b).amax();
        if residual > 1e-8 {
            return Err(crate::Error::Inconsistent { residual });
        }
        Ok(coeffs.iter().copied().collect())
    }

    /// `sum_i coeffs[i] * B_i`.
    pub fn combine(&self, coeffs: &[f64]) -> Result<HermitianOp> {
        if coeffs.len() != self.len() {
            return Err(domain("coefficient count does not match basis length"));
        }
        let n = self.dim();
        let mut acc = DMatrix::<Complex64>::zeros(n, n);
        for (c, op) in coeffs.iter().zip(&self.ops) {
            acc += op.matrix() * Complex64::new(*c, 0.0);
        }
        HermitianOp::new(acc)
    }
}

fn ket_bra(n: usize, entries: &[(usize, usize, Complex64)]) -> DMatrix<Complex64> {
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for &(i, j, v) in entries {
        m[(i - 1, j - 1)] += v;
    }
    m
}

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const HALF: Complex64 = Complex64 { re: 0.5, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `|v><v|`, `sigma_uvx = |u><v| + |v><u|`, `sigma_uvy = -i(|u><v| - |v><u|)`.
pub fn sigma_op(n: usize, label: SiteLabel) -> HermitianOp {
    let (m, reality) = match label {
        SiteLabel::Diag(v) => (ket_bra(n, &[(v, v, ONE)]), Reality::RealSymmetric),
        SiteLabel::X(u, v) => (ket_bra(n, &[(u, v, ONE), (v, u, ONE)]), Reality::RealSymmetric),
        SiteLabel::Y(u, v) => (ket_bra(n, &[(u, v, -I), (v, u, I)]), Reality::ImaginaryAntisymmetric),
    };
    HermitianOp::with_reality(m, reality).expect("sigma operators are Hermitian")
}

/// Rank-one projectors onto `|v>`, `(|u> + |v>)/sqrt2` and `(|u> + i|v>)/sqrt2`.
pub fn complex_projector_op(n: usize, label: SiteLabel) -> HermitianOp {
    let m = match label {
        SiteLabel::Diag(v) => ket_bra(n, &[(v, v, ONE)]),
        SiteLabel::X(u, v) => ket_bra(n, &[(u, u, HALF), (v, v, HALF), (u, v, HALF), (v, u, HALF)]),
        SiteLabel::Y(u, v) => ket_bra(n, &[(u, u, HALF), (v, v, HALF), (u, v, -HALF * I), (v, u, HALF * I)]),
    };
    HermitianOp::new(m).expect("projectors are Hermitian")
}

fn single_site(kind: BasisKind, n: usize, build: fn(usize, SiteLabel) -> HermitianOp) -> Result<OperatorBasis> {
    if n == 0 {
        return Err(domain("site dimension must be at least 1"));
    }
    let labels = site_labels(n);
    let ops: Vec<HermitianOp> = labels.iter().map(|&l| build(n, l)).collect();
    let factors = ops
        .iter()
        .map(|op| {
            vec![Factor {
                sites: vec![0],
                op: op.clone(),
            }]
        })
        .collect();
    Ok(OperatorBasis {
        kind,
        site_dims: vec![n],
        ops,
        labels: labels.into_iter().map(|l| BasisLabel { sites: vec![l] }).collect(),
        factors,
    })
}

/// The `n^2` rank-one projectors `P_v`, `P_uvx`, `P_uvy` on `C^n`.
///
/// The superposition projectors are normalized, so every element satisfies
/// `P^2 = P` and its expectation value is a probability.
pub fn complex_projector_basis(n: usize) -> Result<OperatorBasis> {
    single_site(BasisKind::ComplexProjector, n, complex_projector_op)
}

/// The `n^2` operators `P_v`, `sigma_uvx`, `sigma_uvy` on one site.
pub fn sigma_basis(n: usize) -> Result<OperatorBasis> {
    single_site(BasisKind::Sigma, n, sigma_op)
}

fn product_labels(site_dims: &[usize]) -> Vec<Vec<SiteLabel>> {
    site_dims.iter().fold(vec![Vec::new()], |acc, &n| {
        let labels = site_labels(n);
        acc.into_iter()
            .flat_map(|prefix| {
                labels.iter().map(move |&l| {
                    let mut next = prefix.clone();
                    next.push(l);
                    next
                })
            })
            .collect()
    })
}

/// Tensor products of per-site sigma operators with an even number of `y`
/// factors. There are `N(N+1)/2` of them for `N = prod dims`, all real
/// symmetric.
pub fn real_product_basis(dims: &SystemDims) -> Result<OperatorBasis> {
    let site_dims = dims.as_slice().to_vec();
    let mut ops = Vec::new();
    let mut labels = Vec::new();
    let mut factors = Vec::new();
    for sites in product_labels(&site_dims) {
        let label = BasisLabel { sites };
        if !label.y_parity_even() {
            continue;
        }
        let per_site: Vec<HermitianOp> = label
            .sites
            .iter()
            .zip(&site_dims)
            .map(|(&l, &n)| sigma_op(n, l))
            .collect();
        let op = tensor(&per_site)?;
        debug_assert_eq!(op.reality(), Reality::RealSymmetric);
        factors.push(
            per_site
                .into_iter()
                .enumerate()
                .map(|(s, op)| Factor { sites: vec![s], op })
                .collect(),
        );
        ops.push(op);
        labels.push(label);
    }
    Ok(OperatorBasis {
        kind: BasisKind::RealProduct,
        site_dims,
        ops,
        labels,
        factors,
    })
}

/// How the `y` factors of a product are grouped into two-site projectors.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum PairingRule {
    /// `y` sites paired left to right: first with second, third with fourth.
    #[default]
    Adjacent,
    /// For each product, the first perfect matching of its `y` sites that
    /// uses only these pairs, tried in list order.
    Preferred(Vec<(usize, usize)>),
}

impl PairingRule {
    fn validate(&self, num_sites: usize) -> Result<()> {
        if let PairingRule::Preferred(pairs) = self {
            for &(a, b) in pairs {
                if a == b {
                    return Err(domain(format!("pair ({a}, {b}) repeats a site")));
                }
                if a >= num_sites || b >= num_sites {
                    return Err(domain(format!("pair ({a}, {b}) is out of range")));
                }
            }
        }
        Ok(())
    }

    /// Pairs covering exactly the given `y` sites.
    pub fn pair(&self, y_sites: &[usize]) -> Result<Vec<(usize, usize)>> {
        if !y_sites.len().is_multiple_of(2) {
            return Err(domain(format!("odd number of y sites {y_sites:?}")));
        }
        match self {
            PairingRule::Adjacent => Ok(y_sites.chunks(2).map(|c| (c[0], c[1])).collect()),
            PairingRule::Preferred(pairs) => {
                let mut chosen = Vec::new();
                let mut used = Vec::new();
                if match_sites(y_sites, pairs, &mut used, &mut chosen) {
                    Ok(chosen)
                } else {
                    Err(domain(format!("no listed pairing covers y sites {y_sites:?}")))
                }
            }
        }
    }
}

fn match_sites(
    sites: &[usize],
    pairs: &[(usize, usize)],
    used: &mut Vec<usize>,
    chosen: &mut Vec<(usize, usize)>,
) -> bool {
    let Some(&first) = sites.iter().find(|s| !used.contains(s)) else {
        return true;
    };
    for &(a, b) in pairs {
        let other = if a == first {
            b
        } else if b == first {
            a
        } else {
            continue;
        };
        if !sites.contains(&other) || used.contains(&other) {
            continue;
        }
        used.extend([first, other]);
        chosen.push((first.min(other), first.max(other)));
        if match_sites(sites, pairs, used, chosen) {
            return true;
        }
        chosen.pop();
        used.truncate(used.len() - 2);
    }
    false
}

/// `P_u + P_v` on a site.
fn level_pair(n: usize, u: usize, v: usize) -> DMatrix<Complex64> {
    ket_bra(n, &[(u, u, ONE), (v, v, ONE)])
}

/// Turns every even-`y` real product into a projector: each `sigma_x`
/// factor becomes `(P_u + P_v + sigma_x)/2` and each paired
/// `sigma_y ⊗ sigma_y` becomes
/// `((P_u + P_v) ⊗ (P_u' + P_v') + sigma_y ⊗ sigma_y)/2`.
pub fn bilocal_projector_basis(dims: &SystemDims, pairing: &PairingRule) -> Result<OperatorBasis> {
    let site_dims = dims.as_slice().to_vec();
    pairing.validate(site_dims.len())?;
    let real = real_product_basis(dims)?;
    let mut ops = Vec::with_capacity(real.len());
    let mut factors = Vec::with_capacity(real.len());
    for label in real.labels() {
        let pairs = pairing.pair(&label.y_sites())?;
        let mut fs: Vec<Factor> = Vec::new();
        for (s, (&l, &n)) in label.sites.iter().zip(&site_dims).enumerate() {
            let m = match l {
                SiteLabel::Diag(_) => sigma_op(n, l).into_matrix(),
                SiteLabel::X(u, v) => (level_pair(n, u, v) + sigma_op(n, l).matrix()) * HALF,
                SiteLabel::Y(..) => continue,
            };
            fs.push(Factor {
                sites: vec![s],
                op: HermitianOp::new(m)?,
            });
        }
        for (a, b) in pairs {
            let (SiteLabel::Y(ua, va), SiteLabel::Y(ub, vb)) = (label.sites[a], label.sites[b]) else {
                unreachable!("pairs cover y sites only");
            };
            let (na, nb) = (site_dims[a], site_dims[b]);
            let diag = level_pair(na, ua, va).kronecker(&level_pair(nb, ub, vb));
            let yy = sigma_op(na, label.sites[a])
                .matrix()
                .kronecker(sigma_op(nb, label.sites[b]).matrix());
            fs.push(Factor {
                sites: vec![a, b],
                op: HermitianOp::new((diag + yy) * HALF)?,
            });
        }
        fs.sort_by_key(|f| f.sites[0]);
        let parts: Vec<(Vec<usize>, &DMatrix<Complex64>)> =
            fs.iter().map(|f| (f.sites.clone(), f.op.matrix())).collect();
        ops.push(HermitianOp::new(embed_factors(&site_dims, &parts)?)?);
        factors.push(fs);
    }
    Ok(OperatorBasis {
        kind: BasisKind::BilocalProjector,
        site_dims,
        ops,
        labels: real.labels,
        factors,
    })
}

/// Builds a basis of the requested kind on the given system. Single-site
/// kinds require one component.
pub fn build_basis(kind: BasisKind, dims: &SystemDims, pairing: &PairingRule) -> Result<OperatorBasis> {
    match kind {
        BasisKind::ComplexProjector | BasisKind::Sigma => {
            let [n] = dims.as_slice() else {
                return complex_product_basis(kind, dims);
            };
            if kind == BasisKind::Sigma {
                sigma_basis(*n)
            } else {
                complex_projector_basis(*n)
            }
        }
        BasisKind::RealProduct => real_product_basis(dims),
        BasisKind::BilocalProjector => bilocal_projector_basis(dims, pairing),
    }
}

/// Local products of single-site bases on a multi-site system.
fn complex_product_basis(kind: BasisKind, dims: &SystemDims) -> Result<OperatorBasis> {
    let site_dims = dims.as_slice().to_vec();
    let build = if kind == BasisKind::Sigma {
        sigma_op
    } else {
        complex_projector_op
    };
    let mut ops = Vec::new();
    let mut labels = Vec::new();
    let mut factors = Vec::new();
    for sites in product_labels(&site_dims) {
        let per_site: Vec<HermitianOp> = sites.iter().zip(&site_dims).map(|(&l, &n)| build(n, l)).collect();
        ops.push(tensor(&per_site)?);
        factors.push(
            per_site
                .into_iter()
                .enumerate()
                .map(|(s, op)| Factor { sites: vec![s], op })
                .collect(),
        );
        labels.push(BasisLabel { sites });
    }
    Ok(OperatorBasis {
        kind,
        site_dims,
        ops,
        labels,
        factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(v: &[usize]) -> SystemDims {
        SystemDims::new(v.to_vec()).unwrap()
    }

    #[test]
    fn label_order_and_validation() {
        let labels: Vec<String> = site_labels(3).iter().map(|l| l.to_string()).collect();
        assert_eq!(labels, ["P1", "P2", "P3", "x12", "x13", "x23", "y12", "y13", "y23"]);
        assert!(BasisLabel::new(vec![SiteLabel::X(2, 1)], &[2]).is_err());
        assert!(BasisLabel::new(vec![SiteLabel::Diag(3)], &[2]).is_err());
        let ok = BasisLabel::new(vec![SiteLabel::Y(1, 2), SiteLabel::Y(1, 3)], &[2, 3]).unwrap();
        assert_eq!(ok.y_count(), 2);
        assert!(ok.y_parity_even());
        assert_eq!(ok.to_string(), "y12⊗y13");
    }

    #[test]
    fn complex_projectors_small() {
        let one = complex_projector_basis(1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.ops()[0].real_part(), DMatrix::from_element(1, 1, 1.0));
        let two = complex_projector_basis(2).unwrap();
        assert_eq!(two.len(), 4);
        assert_eq!(two.rank().unwrap().0, 4);
        for op in two.ops() {
            assert!(op.idempotence_defect() <= 1e-12);
        }
        assert!(complex_projector_basis(0).is_err());
    }

    #[test]
    fn complex_projectors_three_gram_determinant() {
        let basis = complex_projector_basis(3).unwrap();
        assert_eq!(basis.len(), 9);
        let gram = DMatrix::from_fn(9, 9, |i, j| basis.ops()[i].trace_product(&basis.ops()[j]).re);
        assert!(gram.determinant().abs() > 1e-6);
        assert_eq!(basis.rank().unwrap().0, 9);
    }

    #[test]
    fn sigma_basis_counts_and_flags() {
        let two = sigma_basis(2).unwrap();
        let names: Vec<String> = two.labels().iter().map(|l| l.to_string()).collect();
        assert_eq!(names, ["P1", "P2", "x12", "y12"]);
        // Pauli y embedded
        let y = two.ops()[3].matrix();
        assert_eq!(y[(0, 1)], Complex64::new(0.0, -1.0));
        assert_eq!(y[(1, 0)], Complex64::new(0.0, 1.0));
        let four = sigma_basis(4).unwrap();
        assert_eq!(four.len(), 16);
        let real = four
            .ops()
            .iter()
            .filter(|o| o.reality() == Reality::RealSymmetric)
            .count();
        let imag = four
            .ops()
            .iter()
            .filter(|o| o.reality() == Reality::ImaginaryAntisymmetric && o.max_real() == 0.0)
            .count();
        assert_eq!((real, imag), (10, 6));
        assert_eq!(
            two.ops()
                .iter()
                .filter(|o| o.reality() == Reality::RealSymmetric)
                .count(),
            3
        );
    }

    #[test]
    fn real_products() {
        let one = real_product_basis(&dims(&[2])).unwrap();
        let names: Vec<String> = one.labels().iter().map(|l| l.to_string()).collect();
        assert_eq!(names, ["P1", "P2", "x12"]);
        let two = real_product_basis(&dims(&[2, 2])).unwrap();
        assert_eq!(two.len(), 10);
        assert_eq!(two.rank().unwrap().0, 10);
        // 64 products, 36 with an even number of y factors
        let three = real_product_basis(&dims(&[2, 2, 2])).unwrap();
        assert_eq!(three.len(), 36);
        assert_eq!(three.rank().unwrap().0, 36);
        assert!(three
            .ops()
            .iter()
            .all(|o| o.reality() == Reality::RealSymmetric && o.max_imag() == 0.0));
    }

    #[test]
    fn x_replacement_is_a_projector() {
        let basis = bilocal_projector_basis(&dims(&[2]), &PairingRule::Adjacent).unwrap();
        let x = &basis.ops()[2];
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(x.real_part(), expected);
        assert!(x.idempotence_defect() <= 1e-12);
    }

    #[test]
    fn yy_replacement_is_a_projector() {
        let basis = bilocal_projector_basis(&dims(&[2, 2]), &PairingRule::Adjacent).unwrap();
        let idx = basis.labels().iter().position(|l| l.y_count() == 2).unwrap();
        let p = &basis.ops()[idx];
        assert!(p.idempotence_defect() <= 1e-12);
        for ev in p.eigenvalues().iter() {
            assert!(ev.abs() < 1e-12 || (ev - 1.0).abs() < 1e-12, "eigenvalue {ev}");
        }
        assert_eq!(basis.locality_degree(idx), 2);
        let cert = basis.certify().unwrap();
        assert_eq!((cert.count, cert.rank), (10, 10));
        assert!(cert.all_real_symmetric);
        assert!(cert.factorization_defect <= 1e-15);
    }

    #[test]
    fn pairing_rules() {
        assert_eq!(PairingRule::Adjacent.pair(&[0, 2, 3, 5]).unwrap(), [(0, 2), (3, 5)]);
        let rule = PairingRule::Preferred(vec![(0, 3), (1, 2), (0, 1), (2, 3)]);
        assert_eq!(rule.pair(&[0, 1, 2, 3]).unwrap(), [(0, 3), (1, 2)]);
        assert_eq!(rule.pair(&[0, 1]).unwrap(), [(0, 1)]);
        assert!(rule.pair(&[0, 2]).is_err());
        assert!(PairingRule::Adjacent.pair(&[0, 1, 2]).is_err());
        let repeated = PairingRule::Preferred(vec![(1, 1)]);
        assert!(bilocal_projector_basis(&dims(&[2, 2]), &repeated).is_err());
    }

    #[test]
    fn expansion_round_trip() {
        let basis = sigma_basis(2).unwrap();
        let target = HermitianOp::new(DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.3, 0.0),
                Complex64::new(0.1, -0.2),
                Complex64::new(0.1, 0.2),
                Complex64::new(0.7, 0.0),
            ],
        ))
        .unwrap();
        let c = basis.expand(&target).unwrap();
        assert!((c[0] - 0.3).abs() < 1e-14 && (c[1] - 0.7).abs() < 1e-14);
        assert!((c[2] - 0.1).abs() < 1e-14 && (c[3] - 0.2).abs() < 1e-14);
        assert!(basis.combine(&c).unwrap().frobenius_distance(&target) < 1e-14);
    }
}
