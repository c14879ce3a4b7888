use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use bitomo::bases::{bilocal_projector_basis, build_basis, BasisCertificate, BasisKind, PairingRule};
use bitomo::counting::{bilocal_redundancy_audit, fit_profile, kl_multi, FitOutcome, SystemDims, TheoryProfile};
use bitomo::ideality::{inclusion_family, solve_ideality, verify_inclusion_numeric, IdealitySummary};
use bitomo::json::{f17, F17};
use bitomo::statefile::{read_state, write_state, BasisDump};
use bitomo::tomography::{
    expectations, random_complex_state, random_real_state, reconstruct, FieldKind, MeasurementFrame,
};
use bitomo::witness::{local_tomography_witness, witness_support, WitnessSummary};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::output::Outcome;
use crate::{FrameArg, KindArg};

pub type CmdResult = Result<Outcome, String>;

/// Frobenius error accepted for a reconstructed state.
pub const ROUND_TRIP_TOLERANCE: f64 = 1e-10;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

#[derive(Serialize)]
struct AuditDoc {
    naive_count: String,
    true_k: String,
    surplus: String,
    per_class: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct CountDoc {
    dims: Vec<usize>,
    r: u32,
    s: u32,
    alpha: u64,
    k: String,
    l: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    audit: Option<AuditDoc>,
}

pub fn count(dims: &SystemDims, r: u32, s: u32, alpha: u64, audit: bool) -> CmdResult {
    let profile = TheoryProfile::new(r, s, alpha).map_err(err)?;
    let kl = kl_multi(dims, &profile).map_err(err)?;
    let audit = if audit {
        let a = bilocal_redundancy_audit(dims, &profile).map_err(err)?;
        Some(AuditDoc {
            naive_count: a.naive_count.to_string(),
            true_k: a.true_k.to_string(),
            surplus: a.surplus.to_string(),
            per_class: a.per_class.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
        })
    } else {
        None
    };
    Outcome::new(
        &CountDoc {
            dims: dims.as_slice().to_vec(),
            r,
            s,
            alpha,
            k: kl.k.to_string(),
            l: kl.l.to_string(),
            audit,
        },
        true,
    )
}

/// Parses `N K` lines. Blank lines and `#` comments are skipped.
pub fn parse_table(text: &str) -> Result<Vec<(u64, u64)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [n, k] = fields.as_slice() else {
            return Err(format!("line {}: expected two columns, found {}", i + 1, fields.len()));
        };
        let parse = |s: &str| s.parse::<u64>().map_err(|e| format!("line {}: {s:?}: {e}", i + 1));
        out.push((parse(n)?, parse(k)?));
    }
    Ok(out)
}

#[derive(Serialize)]
#[serde(untagged)]
enum FitDoc {
    Fit { r: String, s: String },
    NoFit { fit: Option<()>, reason: String },
}

pub fn fit(file: Option<&Path>) -> CmdResult {
    let mut text = String::new();
    match file {
        Some(path) if path != Path::new("-") => {
            text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        }
        _ => {
            std::io::stdin().read_to_string(&mut text).map_err(err)?;
        }
    }
    let table = parse_table(&text)?;
    let doc = match fit_profile(&table).map_err(err)? {
        FitOutcome::Fit(p) => FitDoc::Fit {
            r: p.r.to_string(),
            s: p.s.to_string(),
        },
        FitOutcome::NoFit(reason) => FitDoc::NoFit { fit: None, reason },
    };
    Outcome::new(&doc, true)
}

/// `0-2,1-3` style list of site pairs.
pub fn parse_pairing(s: &str) -> Result<PairingRule, String> {
    let pairs = s
        .split(',')
        .map(|p| {
            let (a, b) = p
                .trim()
                .split_once('-')
                .ok_or_else(|| format!("pair {p:?} is not of the form A-B"))?;
            let a: usize = a.parse().map_err(|e| format!("{a:?}: {e}"))?;
            let b: usize = b.parse().map_err(|e| format!("{b:?}: {e}"))?;
            Ok((a, b))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(PairingRule::Preferred(pairs))
}

#[derive(Serialize)]
struct BasisDoc {
    kind: BasisKind,
    dims: Vec<usize>,
    dim: usize,
    count: usize,
    labels: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<BasisCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dump: Option<String>,
}

pub fn certificate_ok(cert: &BasisCertificate) -> bool {
    cert.full_rank && cert.max_idempotence_defect.is_none_or(|d| d <= 1e-12) && cert.factorization_defect <= 1e-12
}

pub fn basis(dims: &SystemDims, kind: KindArg, pairing: Option<&str>, check: bool, dump: Option<&Path>) -> CmdResult {
    let kind = match kind {
        KindArg::Complex => BasisKind::ComplexProjector,
        KindArg::Sigma => BasisKind::Sigma,
        KindArg::Real => BasisKind::RealProduct,
        KindArg::BilocalProjector => BasisKind::BilocalProjector,
    };
    let pairing = pairing.map(parse_pairing).transpose()?.unwrap_or_default();
    let basis = build_basis(kind, dims, &pairing).map_err(err)?;
    let certificate = check.then(|| basis.certify()).transpose().map_err(err)?;
    if let Some(path) = dump {
        let text = serde_json::to_string_pretty(&BasisDump::new(&basis)).map_err(err)?;
        std::fs::write(path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let ok = certificate.as_ref().is_none_or(certificate_ok);
    Outcome::new(
        &BasisDoc {
            kind,
            dims: dims.as_slice().to_vec(),
            dim: basis.dim(),
            count: basis.len(),
            labels: basis.labels().iter().map(ToString::to_string).collect(),
            certificate,
            dump: dump.map(|p| p.display().to_string()),
        },
        ok,
    )
}

pub struct TomoArgs {
    pub dims: SystemDims,
    pub field: FieldKind,
    pub frame: FrameArg,
    pub trials: usize,
    pub seed: u64,
    pub state: Option<PathBuf>,
    pub write_state: Option<PathBuf>,
}

#[derive(Serialize)]
struct TrialDoc {
    trial: usize,
    #[serde(serialize_with = "f17")]
    error: f64,
}

#[derive(Serialize)]
struct TomoSummary {
    trials: usize,
    #[serde(serialize_with = "f17")]
    max_error: f64,
    #[serde(serialize_with = "f17")]
    mean_error: f64,
    tolerance: F17,
    passed: bool,
}

#[derive(Serialize)]
struct TomoDoc {
    frame: String,
    field: FieldKind,
    seed: u64,
    frame_size: usize,
    rank: usize,
    required_rank: usize,
    per_trial: Vec<TrialDoc>,
    summary: TomoSummary,
}

pub fn frame_for(dims: &SystemDims, frame: FrameArg) -> Result<MeasurementFrame, String> {
    let basis = match frame {
        FrameArg::Complex => build_basis(BasisKind::ComplexProjector, dims, &PairingRule::Adjacent),
        FrameArg::BilocalProjector => bilocal_projector_basis(dims, &PairingRule::Adjacent),
    };
    Ok(MeasurementFrame::from_basis(basis.map_err(err)?))
}

pub fn tomo(args: TomoArgs) -> CmdResult {
    let frame = frame_for(&args.dims, args.frame)?;
    let n = args.dims.total();
    let supplied = args.state.as_deref().map(read_state).transpose().map_err(err)?;
    if let Some(rho) = &supplied {
        if rho.dim() != n {
            return Err(format!("state has dimension {}, dims give {n}", rho.dim()));
        }
    }
    let field = supplied.as_ref().map_or(args.field, |rho| rho.field());
    let (rank, required) = frame.completeness_rank(field);

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let count = if supplied.is_some() { 1 } else { args.trials };
    let mut per_trial = Vec::with_capacity(count);
    let mut last = None;
    for trial in 0..count {
        let rho = match &supplied {
            Some(rho) => rho.clone(),
            None => match field {
                FieldKind::Real => random_real_state(n, &mut rng),
                FieldKind::Complex => random_complex_state(n, &mut rng),
            },
        };
        let p = expectations(&rho, &frame).map_err(err)?;
        let back = reconstruct(&p, &frame, field).map_err(err)?;
        per_trial.push(TrialDoc {
            trial,
            error: back.frobenius_distance(&rho),
        });
        last = Some(back);
    }
    if let (Some(path), Some(rho)) = (&args.write_state, &last) {
        write_state(path, rho).map_err(err)?;
    }
    let max_error = per_trial.iter().map(|t| t.error).fold(0.0, f64::max);
    let mean_error = if per_trial.is_empty() {
        0.0
    } else {
        per_trial.iter().map(|t| t.error).sum::<f64>() / per_trial.len() as f64
    };
    let passed = max_error <= ROUND_TRIP_TOLERANCE;
    Outcome::new(
        &TomoDoc {
            frame: frame.id().to_owned(),
            field,
            seed: args.seed,
            frame_size: frame.len(),
            rank,
            required_rank: required,
            summary: TomoSummary {
                trials: per_trial.len(),
                max_error,
                mean_error,
                tolerance: F17(ROUND_TRIP_TOLERANCE),
                passed,
            },
            per_trial,
        },
        passed,
    )
}

#[derive(Serialize)]
struct SupportEntry {
    label: String,
    #[serde(serialize_with = "f17")]
    coefficient: f64,
}

#[derive(Serialize)]
struct WitnessDoc {
    report: WitnessSummary,
    /// Real-product expansion of the difference of the two states.
    difference_support: Vec<SupportEntry>,
}

pub fn witness(dims: &SystemDims) -> CmdResult {
    let report = local_tomography_witness(dims).map_err(err)?;
    let support = witness_support(dims, &report).map_err(err)?;
    Outcome::new(
        &WitnessDoc {
            report: WitnessSummary::new(dims, &report),
            difference_support: support
                .into_iter()
                .map(|(label, coefficient)| SupportEntry {
                    label: label.to_string(),
                    coefficient,
                })
                .collect(),
        },
        report.is_valid(),
    )
}

#[derive(Serialize)]
struct ShapeValue {
    shape: String,
    value: String,
}

#[derive(Serialize)]
struct FamilyDoc {
    /// Coefficients of the symmetrized bilocal condition.
    symmetrized: Vec<ShapeValue>,
    /// Coefficients as functions of epsilon.
    family: Vec<ShapeValue>,
}

#[derive(Serialize)]
struct VerifyDoc {
    dims: Vec<usize>,
    r: u32,
    s: u32,
    k_total: String,
    scale: String,
    residual: String,
}

#[derive(Serialize)]
struct IdealityDoc {
    #[serde(flatten)]
    summary: IdealitySummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    inclusion: Option<FamilyDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verify: Option<VerifyDoc>,
}

pub fn ideality(level: usize, verify_dims: Option<&SystemDims>, r: u32, s: u32) -> CmdResult {
    let solution = solve_ideality(level).map_err(err)?;
    let inclusion = if level == 3 {
        let fam = inclusion_family(3).map_err(err)?;
        Some(FamilyDoc {
            symmetrized: fam
                .symmetrized
                .iter()
                .map(|(s, v)| ShapeValue {
                    shape: s.to_string(),
                    value: v.to_string(),
                })
                .collect(),
            family: fam
                .coefficients
                .iter()
                .map(|(s, f)| ShapeValue {
                    shape: s.to_string(),
                    value: f.to_string(),
                })
                .collect(),
        })
    } else {
        None
    };
    let verify = match verify_dims {
        None => None,
        Some(_) if level != 3 => return Err("--verify-dims needs --level 3".into()),
        Some(dims) => {
            let profile = TheoryProfile::new(r, s, 1).map_err(err)?;
            let check = verify_inclusion_numeric(&profile, dims).map_err(err)?;
            Some(VerifyDoc {
                dims: dims.as_slice().to_vec(),
                r,
                s,
                k_total: check.k_total.to_string(),
                scale: check.scale.to_string(),
                residual: check.residual.to_string(),
            })
        }
    };
    let ok = verify.as_ref().is_none_or(|v| v.residual == "0");
    Outcome::new(
        &IdealityDoc {
            summary: solution.summary(),
            inclusion,
            verify,
        },
        ok,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_parsing() {
        let t = parse_table("# N K\n1 1\n\n2   3\n3\t6  # real\n").unwrap();
        assert_eq!(t, [(1, 1), (2, 3), (3, 6)]);
        assert!(parse_table("1 2 3").unwrap_err().contains("line 1"));
        assert!(parse_table("1 x").is_err());
    }

    #[test]
    fn pairing_parsing() {
        assert_eq!(
            parse_pairing("0-2, 1-3").unwrap(),
            PairingRule::Preferred(vec![(0, 2), (1, 3)])
        );
        assert!(parse_pairing("0:2").is_err());
    }
}
