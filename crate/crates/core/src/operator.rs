//! Dense Hermitian operators.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Entrywise tolerance for hermiticity and reality checks.
pub const ENTRY_TOLERANCE: f64 = 1e-12;

/// Default relative singular-value threshold for numerical rank.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-10;

/// Environment variable overriding [`DEFAULT_RANK_TOLERANCE`].
pub const RANK_TOLERANCE_ENV: &str = "BITOMO_TOLERANCE_RANK";

static RANK_TOLERANCE: AtomicU64 = AtomicU64::new(0);

/// Relative threshold `sigma_i / sigma_max` below which a singular value
/// counts as zero. Read once from `BITOMO_TOLERANCE_RANK` if set.
pub fn rank_tolerance() -> f64 {
    let bits = RANK_TOLERANCE.load(Ordering::Relaxed);
    if bits != 0 {
        return f64::from_bits(bits);
    }
    let tol = std::env::var(RANK_TOLERANCE_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|t| t.is_finite() && *t > 0.0)
        .unwrap_or(DEFAULT_RANK_TOLERANCE);
    RANK_TOLERANCE.store(tol.to_bits(), Ordering::Relaxed);
    tol
}

/// Overrides the rank threshold for the rest of the process.
pub fn set_rank_tolerance(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0 && tol < 1.0) {
        return Err(domain(format!("rank tolerance must lie in (0, 1), got {tol}")));
    }
    RANK_TOLERANCE.store(tol.to_bits(), Ordering::Relaxed);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reality {
    RealSymmetric,
    ImaginaryAntisymmetric,
    GeneralHermitian,
}

impl Reality {
    /// Reality of a Kronecker product: imaginary factors pair up into real
    /// ones.
    pub fn of_product(factors: impl IntoIterator<Item = Reality>) -> Reality {
        let mut imaginary = 0usize;
        for r in factors {
            match r {
                Reality::RealSymmetric => {}
                Reality::ImaginaryAntisymmetric => imaginary += 1,
                Reality::GeneralHermitian => return Reality::GeneralHermitian,
            }
        }
        if imaginary.is_multiple_of(2) {
            Reality::RealSymmetric
        } else {
            Reality::ImaginaryAntisymmetric
        }
    }
}

/// A dense Hermitian matrix tagged with its reality class.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp {
    matrix: DMatrix<Complex64>,
    reality: Reality,
}

impl HermitianOp {
    /// Checks hermiticity to [`ENTRY_TOLERANCE`] and classifies reality from
    /// the entries.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let reality = classify(&matrix)?;
        Ok(HermitianOp { matrix, reality })
    }

    pub fn from_real(matrix: DMatrix<f64>) -> Result<Self> {
        HermitianOp::new(matrix.map(|x| Complex64::new(x, 0.0)))
    }

    /// Builds an operator with a declared reality flag, verifying that the
    /// entries agree with it.
    pub fn with_reality(matrix: DMatrix<Complex64>, reality: Reality) -> Result<Self> {
        let op = HermitianOp::new(matrix)?;
        let ok = match reality {
            Reality::GeneralHermitian => true,
            Reality::RealSymmetric => op.max_imag() <= ENTRY_TOLERANCE,
            Reality::ImaginaryAntisymmetric => op.max_real() <= ENTRY_TOLERANCE,
        };
        if !ok {
            return Err(domain(format!("entries do not match reality flag {reality:?}")));
        }
        Ok(HermitianOp {
            matrix: op.matrix,
            reality,
        })
    }

    pub fn identity(dim: usize) -> Self {
        HermitianOp {
            matrix: DMatrix::identity(dim, dim),
            reality: Reality::RealSymmetric,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn reality(&self) -> Reality {
        self.reality
    }

    pub fn max_real(&self) -> f64 {
        self.matrix.iter().map(|z| z.re.abs()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.matrix.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Real part of the entries, for operators known to be real.
    pub fn real_part(&self) -> DMatrix<f64> {
        self.matrix.map(|z| z.re)
    }

    /// `Tr(self * other)`.
    pub fn trace_product(&self, other: &HermitianOp) -> Complex64 {
        // Tr(AB) = sum_ij A_ij B_ji
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)] * other.matrix[(j, i)];
            }
        }
        acc
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `max |P^2 - P|` over entries.
    pub fn idempotence_defect(&self) -> f64 {
        let sq = &self.matrix * &self.matrix;
        (sq - &self.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_distance(&self, other: &HermitianOp) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        self.matrix.clone().symmetric_eigenvalues()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Row-major real parts followed by row-major imaginary parts.
    pub fn vectorize(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(2 * n * n);
        for part in [|z: &Complex64| z.re, |z: &Complex64| z.im] {
            for i in 0..n {
                for j in 0..n {
                    out.push(part(&self.matrix[(i, j)]));
                }
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> HermitianOp {
        HermitianOp {
            matrix: &self.matrix * Complex64::new(factor, 0.0),
            reality: self.reality,
        }
    }
}

fn classify(matrix: &DMatrix<Complex64>) -> Result<Reality> {
    if !matrix.is_square() || matrix.nrows() == 0 {
        return Err(domain(format!(
            "operator must be a nonempty square matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let n = matrix.nrows();
    for i in 0..n {
        for j in i..n {
            if (matrix[(i, j)] - matrix[(j, i)].conj()).norm() > ENTRY_TOLERANCE {
                return Err(domain(format!("matrix is not Hermitian at ({i}, {j})")));
            }
        }
    }
    let max_im = matrix.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let max_re = matrix.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    Ok(if max_im <= ENTRY_TOLERANCE {
        Reality::RealSymmetric
    } else if max_re <= ENTRY_TOLERANCE {
        Reality::ImaginaryAntisymmetric
    } else {
        Reality::GeneralHermitian
    })
}

/// Numerical rank of a set of equal-size operators and its smallest
/// relative singular value.
pub fn linear_independence_rank(ops: &[HermitianOp]) -> Result<(usize, f64)> {
    linear_independence_rank_with(ops, rank_tolerance())
}

pub fn linear_independence_rank_with(ops: &[HermitianOp], tol: f64) -> Result<(usize, f64)> {
    let first = ops.first().ok_or_else(|| domain("rank of an empty operator list"))?;
    let dim = first.dim();
    if let Some(bad) = ops.iter().position(|op| op.dim() != dim) {
        return Err(domain(format!(
            "operator {bad} has dimension {} != {dim}",
            ops[bad].dim()
        )));
    }
    let rows = 2 * dim * dim;
    let mut columns = DMatrix::<f64>::zeros(rows, ops.len());
    for (c, op) in ops.iter().enumerate() {
        for (r, v) in op.vectorize().into_iter().enumerate() {
            columns[(r, c)] = v;
        }
    }
    Ok(numerical_rank(columns, tol))
}

/// Rank and `sigma_min / sigma_max` of a real matrix.
pub(crate) fn numerical_rank(m: DMatrix<f64>, tol: f64) -> (usize, f64) {
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return (0, 0.0);
    }
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let rank = sv.iter().filter(|&&s| s / max > tol).count();
    (rank, min / max)
}

/// Kronecker product in the given site order.
pub fn tensor(ops: &[HermitianOp]) -> Result<HermitianOp> {
    let (first, rest) = ops.split_first().ok_or_else(|| domain("tensor of an empty list"))?;
    let matrix = rest
        .iter()
        .fold(first.matrix.clone(), |acc, op| acc.kronecker(&op.matrix));
    let reality = Reality::of_product(ops.iter().map(|op| op.reality));
    Ok(HermitianOp { matrix, reality })
}

/// Places factors acting on groups of sites into the full tensor space.
/// Sites not covered by any factor carry the identity. Each factor's
/// matrix is indexed by its sites in the listed order.
pub fn embed_factors(site_dims: &[usize], factors: &[(Vec<usize>, &DMatrix<Complex64>)]) -> Result<DMatrix<Complex64>> {
    let mut covered = vec![false; site_dims.len()];
    for (sites, m) in factors {
        let mut expected = 1;
        for &s in sites {
            if s >= site_dims.len() || covered[s] {
                return Err(domain(format!("site {s} is out of range or covered twice")));
            }
            covered[s] = true;
            expected *= site_dims[s];
        }
        if m.nrows() != expected || m.ncols() != expected {
            return Err(domain(format!(
                "factor on sites {sites:?} has size {}, expected {expected}",
                m.nrows()
            )));
        }
    }
    let total: usize = site_dims.iter().product();
    let digits = |mut idx: usize| {
        let mut d = vec![0; site_dims.len()];
        for s in (0..site_dims.len()).rev() {
            d[s] = idx % site_dims[s];
            idx /= site_dims[s];
        }
        d
    };
    let sub_index = |d: &[usize], sites: &[usize]| sites.iter().fold(0, |acc, &s| acc * site_dims[s] + d[s]);
    let all_digits: Vec<Vec<usize>> = (0..total).map(digits).collect();
    let free: Vec<usize> = (0..site_dims.len()).filter(|&s| !covered[s]).collect();
    let mut out = DMatrix::<Complex64>::zeros(total, total);
    for i in 0..total {
        let di = &all_digits[i];
        for j in 0..total {
            let dj = &all_digits[j];
            if free.iter().any(|&s| di[s] != dj[s]) {
                continue;
            }
            let mut v = Complex64::new(1.0, 0.0);
            for (sites, m) in factors {
                v *= m[(sub_index(di, sites), sub_index(dj, sites))];
                if v == Complex64::new(0.0, 0.0) {
                    break;
                }
            }
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

pub(crate) fn require_same_dim(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Domain(format!("{what}: dimension {a} does not match {b}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_y() -> HermitianOp {
        HermitianOp::new(DMatrix::from_row_slice(
            2,
            2,
            &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        ))
        .unwrap()
    }

    fn sigma_x() -> HermitianOp {
        HermitianOp::from_real(DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.])).unwrap()
    }

    #[test]
    fn classification() {
        assert_eq!(sigma_y().reality(), Reality::ImaginaryAntisymmetric);
        assert_eq!(sigma_x().reality(), Reality::RealSymmetric);
        let general = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(1., -1.), c(1., 1.), c(0., 0.)]);
        assert_eq!(HermitianOp::new(general).unwrap().reality(), Reality::GeneralHermitian);
        let non_herm = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(2., 0.), c(0., 0.)]);
        assert!(HermitianOp::new(non_herm).is_err());
        assert!(HermitianOp::with_reality(sigma_y().into_matrix(), Reality::RealSymmetric).is_err());
    }

    #[test]
    fn tensor_reality() {
        let yy = tensor(&[sigma_y(), sigma_y()]).unwrap();
        assert_eq!(yy.reality(), Reality::RealSymmetric);
        assert!(yy.max_imag() == 0.0);
        let yx = tensor(&[sigma_y(), sigma_x()]).unwrap();
        assert_eq!(yx.reality(), Reality::ImaginaryAntisymmetric);
        assert!(yx.max_real() == 0.0);
        let p1 = HermitianOp::from_real(DMatrix::from_row_slice(2, 2, &[1., 0., 0., 0.])).unwrap();
        let p11 = tensor(&[p1.clone(), p1]).unwrap();
        let mut expected = DMatrix::<f64>::zeros(4, 4);
        expected[(0, 0)] = 1.0;
        assert_eq!(p11.real_part(), expected);
    }

    #[test]
    fn rank_ignores_duplicates() {
        let ops = vec![sigma_x(), sigma_y(), sigma_x()];
        let (rank, min_rel) = linear_independence_rank(&ops).unwrap();
        assert_eq!(rank, 2);
        assert!(min_rel < 1e-12);
        assert!(linear_independence_rank(&[]).is_err());
        assert!(linear_independence_rank(&[sigma_x(), HermitianOp::identity(3)]).is_err());
    }

    #[test]
    fn embed_matches_kron_with_site_swap() {
        let x = sigma_x();
        let y = sigma_y();
        let direct = tensor(&[x.clone(), y.clone()]).unwrap();
        let a = embed_factors(&[2, 2], &[(vec![1], y.matrix()), (vec![0], x.matrix())]).unwrap();
        assert_eq!(&a, direct.matrix());
        let xy = tensor(&[x.clone(), y.clone()]).unwrap();
        let yx = tensor(&[y, x]).unwrap();
        // a two-site factor listed with reversed sites is the swapped product
        let b = embed_factors(&[2, 2], &[(vec![1, 0], yx.matrix())]).unwrap();
        assert_eq!(&b, xy.matrix());
        assert!(embed_factors(&[2, 2], &[(vec![0], sigma_x().matrix()), (vec![0], sigma_x().matrix())]).is_err());
    }

    #[test]
    fn vectorization_layout() {
        let v = sigma_y().vectorize();
        assert_eq!(v, [0., 0., 0., 0., 0., -1., 1., 0.]);
    }
}
