//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain strings and numbers and returns a JSON string.
//! Failures come back as `{"error": "..."}` so the page has one code path,
//! and the functions run unchanged in native tests.

use std::collections::BTreeMap;

use bitomo::bases::{build_basis, BasisCertificate, BasisKind, PairingRule};
use bitomo::counting::{bilocal_redundancy_audit, kl_multi, SystemDims, TheoryProfile};
use bitomo::ideality::{build_ansatz, inclusion_family, rat, Rational};
use bitomo::partition::members;
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

/// Largest Hilbert-space dimension the heatmap view will build.
pub const MAX_DEMO_DIM: usize = 16;

fn respond<T: Serialize>(result: Result<T, String>) -> String {
    let body = result.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()));
    body.unwrap_or_else(|message| serde_json::json!({ "error": message }).to_string())
}

fn parse_dims(dims: &str) -> Result<SystemDims, String> {
    dims.parse().map_err(|e: bitomo::Error| e.to_string())
}

#[derive(Serialize)]
struct CountView {
    dims: Vec<usize>,
    n: usize,
    k: String,
    l: String,
    audit: Option<AuditView>,
}

#[derive(Serialize)]
struct AuditView {
    naive: String,
    true_k: String,
    surplus: String,
    per_class: BTreeMap<String, String>,
}

/// K and L of a composite, with the bilocal audit for three or more parts.
#[wasm_bindgen]
pub fn count(dims: &str, r: u32, s: u32) -> String {
    respond((|| {
        let dims = parse_dims(dims)?;
        let profile = TheoryProfile::new(r, s, 1).map_err(|e| e.to_string())?;
        let kl = kl_multi(&dims, &profile).map_err(|e| e.to_string())?;
        let audit = if dims.len() >= 3 {
            let a = bilocal_redundancy_audit(&dims, &profile).map_err(|e| e.to_string())?;
            Some(AuditView {
                naive: a.naive_count.to_string(),
                true_k: a.true_k.to_string(),
                surplus: a.surplus.to_string(),
                per_class: a.per_class.into_iter().map(|(k, v)| (k, v.to_string())).collect(),
            })
        } else {
            None
        };
        Ok(CountView {
            dims: dims.as_slice().to_vec(),
            n: dims.total(),
            k: kl.k.to_string(),
            l: kl.l.to_string(),
            audit,
        })
    })())
}

#[derive(Serialize)]
struct OperatorView {
    label: String,
    /// Row-major real and imaginary parts.
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Serialize)]
struct BasisView {
    kind: BasisKind,
    dim: usize,
    certificate: BasisCertificate,
    operators: Vec<OperatorView>,
}

/// All operators of a basis as matrices, for drawing.
#[wasm_bindgen]
pub fn basis(dims: &str, kind: &str) -> String {
    respond((|| {
        let dims = parse_dims(dims)?;
        if dims.total() > MAX_DEMO_DIM {
            return Err(format!(
                "dimension {} is above the demo limit {MAX_DEMO_DIM}",
                dims.total()
            ));
        }
        let kind: BasisKind = kind.parse().map_err(|e: bitomo::Error| e.to_string())?;
        let basis = build_basis(kind, &dims, &PairingRule::Adjacent).map_err(|e| e.to_string())?;
        let certificate = basis.certify().map_err(|e| e.to_string())?;
        let operators = basis
            .iter()
            .map(|(label, op)| OperatorView {
                label: label.to_string(),
                re: op.matrix().transpose().iter().map(|z| z.re).collect(),
                im: op.matrix().transpose().iter().map(|z| z.im).collect(),
            })
            .collect();
        Ok(BasisView {
            kind,
            dim: basis.dim(),
            certificate,
            operators,
        })
    })())
}

#[derive(Serialize)]
struct CoefficientView {
    shape: String,
    exact: String,
    value: f64,
}

#[derive(Serialize)]
struct IdealityView {
    epsilon: String,
    coefficients: Vec<CoefficientView>,
    /// `alpha - 1`, `alpha + beta + gamma`, `3 gamma + delta`: all zero only
    /// where adjoining a trivial system gives nothing new.
    novelty_residuals: Vec<String>,
    /// `K_ABCD - rhs` on four rebits; zero for every epsilon.
    four_rebit_residual: String,
}

/// The 3-local coefficients implied by bilocal ideality at
/// `epsilon = num / den`.
#[wasm_bindgen]
pub fn ideality_family(num: i32, den: i32) -> String {
    respond((|| {
        if den == 0 {
            return Err("epsilon denominator is zero".to_owned());
        }
        let eps = rat(num as i64, den as i64);
        let values = inclusion_family(3).and_then(|f| f.at(eps)).map_err(|e| e.to_string())?;
        let c: Vec<Rational> = values.iter().map(|(_, v)| *v).collect();
        let novelty = [c[0] - rat(1, 1), c[0] + c[1] + c[2], rat(3, 1) * c[2] + c[3]];

        let ansatz = build_ansatz(3).map_err(|e| e.to_string())?;
        let assignment: BTreeMap<String, Rational> = ansatz.unknowns().into_iter().zip(c.iter().copied()).collect();
        let profile = TheoryProfile::real_qm();
        let residual = ansatz
            .substitute(&assignment)
            .and_then(|a| a.equation())
            .and_then(|e| {
                e.evaluate(|block| {
                    let sub = SystemDims::new(members(block).map(|_| 2).collect())?;
                    Ok(kl_multi(&sub, &profile)?.k as i128)
                })
            })
            .map_err(|e| e.to_string())?;

        Ok(IdealityView {
            epsilon: eps.to_string(),
            coefficients: values
                .iter()
                .map(|(shape, v)| CoefficientView {
                    shape: shape.to_string(),
                    exact: v.to_string(),
                    value: *v.numer() as f64 / *v.denom() as f64,
                })
                .collect(),
            novelty_residuals: novelty.iter().map(ToString::to_string).collect(),
            four_rebit_residual: residual.to_string(),
        })
    })())
}
