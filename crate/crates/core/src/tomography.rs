//! States as density matrices and as fiducial probability vectors, and the
//! linear map between them.
//!
//! States are unnormalized: the trace lies in `(0, 1]` and is itself one of
//! the reconstructed parameters.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bases::{sigma_basis, OperatorBasis};
use crate::error::{domain, Error, Result};
use crate::operator::{numerical_rank, rank_tolerance, require_same_dim, HermitianOp, Reality};

/// Minimum eigenvalue accepted as positive semidefinite.
pub const PSD_TOLERANCE: f64 = 1e-12;

/// Largest residual `|A c - p|` accepted by [`reconstruct`].
pub const CONSISTENCY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Complex,
    Real,
}

impl FieldKind {
    /// Dimension of the state space over this field for `C^n` or `R^n`.
    pub fn parameter_count(&self, n: usize) -> usize {
        match self {
            FieldKind::Complex => n * n,
            FieldKind::Real => n * (n + 1) / 2,
        }
    }
}

impl FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex" => Ok(FieldKind::Complex),
            "real" => Ok(FieldKind::Real),
            other => Err(Error::Malformed(format!("unknown field {other:?}"))),
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Complex => "complex",
            FieldKind::Real => "real",
        })
    }
}

/// A positive semidefinite operator with trace in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOp,
    field: FieldKind,
}

impl DensityMatrix {
    pub fn new(op: HermitianOp, field: FieldKind) -> Result<Self> {
        if field == FieldKind::Real && op.reality() != Reality::RealSymmetric {
            return Err(Error::InvalidState("real state with imaginary entries".into()));
        }
        let trace = op.trace();
        if !(trace > 0.0 && trace <= 1.0 + PSD_TOLERANCE) {
            return Err(Error::InvalidState(format!("trace {trace} outside (0, 1]")));
        }
        let min = op.min_eigenvalue();
        if min < -PSD_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (eigenvalue {min:e})"
            )));
        }
        Ok(DensityMatrix { op, field })
    }

    pub fn maximally_mixed(n: usize, field: FieldKind) -> Self {
        DensityMatrix {
            op: HermitianOp::identity(n).scale(1.0 / n as f64),
            field,
        }
    }

    pub fn op(&self) -> &HermitianOp {
        &self.op
    }

    pub fn field(&self) -> FieldKind {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn trace(&self) -> f64 {
        self.op.trace()
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        self.op.frobenius_distance(&other.op)
    }
}

/// `G G^T / Tr` with standard normal `G`.
pub fn random_real_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let rho = &g * g.transpose();
    let rho = &rho / rho.trace();
    // symmetrize away rounding so the entries are exactly symmetric
    let rho = (&rho + rho.transpose()) * 0.5;
    DensityMatrix::new(HermitianOp::from_real(rho).expect("symmetric"), FieldKind::Real).expect("Gram matrices are PSD")
}

/// `G G^† / Tr` with standard normal real and imaginary parts.
pub fn random_complex_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let g = DMatrix::<Complex64>::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let rho = &g * g.adjoint();
    let rho = &rho / rho.trace();
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::new(HermitianOp::new(rho).expect("Hermitian"), FieldKind::Complex).expect("Gram matrices are PSD")
}

/// Fiducial measurement effects with the locality of each one.
#[derive(Debug, Clone)]
pub struct MeasurementFrame {
    id: String,
    basis: OperatorBasis,
    locality: Vec<usize>,
}

impl MeasurementFrame {
    pub fn new(id: impl Into<String>, basis: OperatorBasis) -> Self {
        let locality = (0..basis.len()).map(|i| basis.locality_degree(i)).collect();
        MeasurementFrame {
            id: id.into(),
            basis,
            locality,
        }
    }

    /// Frame named after its basis kind and sites.
    pub fn from_basis(basis: OperatorBasis) -> Self {
        let sites: Vec<String> = basis.site_dims().iter().map(|d| d.to_string()).collect();
        let id = format!(
            "{}({})",
            serde_json::to_value(basis.kind())
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default(),
            sites.join(",")
        );
        MeasurementFrame::new(id, basis)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Per-operator number of sites acted on jointly.
    pub fn locality_degree(&self) -> &[usize] {
        &self.locality
    }

    /// Matrix `A_ij = Tr(F_i B_j)` from target-space coordinates to
    /// expectation values.
    fn forward_map(&self, field: FieldKind) -> (DMatrix<f64>, Vec<HermitianOp>) {
        let target = target_space_basis(self.dim(), field);
        let a = DMatrix::from_fn(self.len(), target.len(), |i, j| {
            self.basis.ops()[i].trace_product(&target[j]).re
        });
        (a, target)
    }

    /// Rank of the frame over the target space and the rank required for
    /// informational completeness.
    pub fn completeness_rank(&self, field: FieldKind) -> (usize, usize) {
        let (a, target) = self.forward_map(field);
        (numerical_rank(a, rank_tolerance()).0, target.len())
    }

    /// Dual operators `D_i` with `rho = sum_i p_i D_i`.
    pub fn dual(&self, field: FieldKind) -> Result<Vec<HermitianOp>> {
        let (a, target) = self.forward_map(field);
        self.check_complete(&a, target.len())?;
        let pinv = a.pseudo_inverse(1e-14).map_err(|e| domain(e.to_string()))?;
        let n = self.dim();
        (0..self.len())
            .map(|i| {
                let mut m = DMatrix::<Complex64>::zeros(n, n);
                for (j, b) in target.iter().enumerate() {
                    m += b.matrix() * Complex64::new(pinv[(j, i)], 0.0);
                }
                HermitianOp::new(m)
            })
            .collect()
    }

    fn check_complete(&self, a: &DMatrix<f64>, required: usize) -> Result<()> {
        let (rank, _) = numerical_rank(a.clone(), rank_tolerance());
        if rank < required {
            return Err(Error::IncompleteFrame {
                rank,
                required,
                deficit: required - rank,
            });
        }
        Ok(())
    }
}

/// Coordinates for Hermitian (complex) or real-symmetric (real) `n x n`
/// matrices: `|v><v|`, `|u><v| + |v><u|` and, for complex, the `y` terms.
pub fn target_space_basis(n: usize, field: FieldKind) -> Vec<HermitianOp> {
    let sigma = sigma_basis(n).expect("n >= 1");
    sigma
        .iter()
        .filter(|(label, _)| field == FieldKind::Complex || !label.sites[0].is_y())
        .map(|(_, op)| op.clone())
        .collect()
}

/// Expectation values of the frame effects, in frame order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GptStateVector {
    #[serde(serialize_with = "crate::json::f17_seq")]
    pub probs: Vec<f64>,
    pub frame_id: String,
}

/// `p_i = Tr(F_i rho)`.
pub fn expectations(rho: &DensityMatrix, frame: &MeasurementFrame) -> Result<GptStateVector> {
    require_same_dim(rho.dim(), frame.dim(), "state and frame")?;
    let mut probs = Vec::with_capacity(frame.len());
    for op in frame.basis().ops() {
        let v = op.trace_product(rho.op());
        if v.im.abs() > 1e-12 {
            return Err(domain(format!("expectation value has imaginary part {:e}", v.im)));
        }
        probs.push(v.re);
    }
    if frame.basis().kind().is_projector() {
        if let Some(p) = probs.iter().find(|&&p| !(-1e-12..=1.0 + 1e-12).contains(&p)) {
            return Err(Error::InvalidState(format!("projector probability {p} outside [0, 1]")));
        }
    }
    Ok(GptStateVector {
        probs,
        frame_id: frame.id().to_owned(),
    })
}

/// Finds the unique state in the target space whose expectation values are
/// `p`, by least squares followed by a residual check.
pub fn reconstruct(p: &GptStateVector, frame: &MeasurementFrame, field: FieldKind) -> Result<DensityMatrix> {
    if p.probs.len() != frame.len() {
        return Err(domain(format!(
            "{} probabilities for a frame of {} effects",
            p.probs.len(),
            frame.len()
        )));
    }
    if p.frame_id != frame.id() {
        return Err(domain(format!(
            "data from frame {:?} given to frame {:?}",
            p.frame_id,
            frame.id()
        )));
    }
    let (a, target) = frame.forward_map(field);
    frame.check_complete(&a, target.len())?;
    let b = DVector::from_column_slice(&p.probs);
    let coeffs = a
        .clone()
        .svd(true, true)
        .solve(&b, 0.0)
        .map_err(|e| domain(e.to_string()))?;
    let residual = (&a * &coeffs - &b).amax();
    if residual > CONSISTENCY_TOLERANCE {
        return Err(Error::Inconsistent { residual });
    }
    let n = frame.dim();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (c, bj) in coeffs.iter().zip(&target) {
        m += bj.matrix() * Complex64::new(*c, 0.0);
    }
    let op = match field {
        FieldKind::Real => HermitianOp::from_real(m.map(|z| z.re))?,
        FieldKind::Complex => HermitianOp::new(m)?,
    };
    DensityMatrix::new(op, field)
}

/// Qubit state from `(p_z+, p_z-, p_x+, p_y+)`: diagonal `(p_z+, p_z-)` and
/// off-diagonal `a = p_x+ - i p_y+ - (1 - i)/2 (p_z+ + p_z-)`.
pub fn qubit_gpt_to_density(p: [f64; 4]) -> Result<DensityMatrix> {
    let [zp, zm, xp, yp] = p;
    let a = Complex64::new(xp, -yp) - Complex64::new(0.5, -0.5) * (zp + zm);
    let m = DMatrix::from_row_slice(2, 2, &[Complex64::new(zp, 0.0), a, a.conj(), Complex64::new(zm, 0.0)]);
    let op = HermitianOp::new(m)?;
    let field = if op.reality() == Reality::RealSymmetric {
        FieldKind::Real
    } else {
        FieldKind::Complex
    };
    DensityMatrix::new(op, field)
        .map_err(|e| Error::InvalidState(format!("{p:?} is not a physical fiducial vector: {e}")))
}

/// Inverse of [`qubit_gpt_to_density`].
pub fn density_to_qubit_gpt(rho: &DensityMatrix) -> Result<[f64; 4]> {
    if rho.dim() != 2 {
        return Err(domain("qubit conversion needs a 2x2 state"));
    }
    let m = rho.op().matrix();
    let half_trace = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    Ok([
        m[(0, 0)].re,
        m[(1, 1)].re,
        half_trace + m[(0, 1)].re,
        half_trace - m[(0, 1)].im,
    ])
}
