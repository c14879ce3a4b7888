//! `bitomo report`: every headline number recomputed, with pass/fail.

use bitomo::bases::{bilocal_projector_basis, complex_projector_basis, real_product_basis, PairingRule};
use bitomo::counting::{bilocal_redundancy_audit, kl_compose, kl_multi, kl_single, KLPair, SystemDims, TheoryProfile};
use bitomo::ideality::solve_ideality;
use bitomo::tomography::{expectations, random_complex_state, random_real_state, reconstruct, FieldKind};
use bitomo::witness::{four_rebit_coincidence, local_tomography_witness};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::commands::{certificate_ok, frame_for, ROUND_TRIP_TOLERANCE};
use crate::output::{table_rows, Outcome};
use crate::FrameArg;

#[derive(Debug, Clone, Serialize)]
pub struct Item {
    pub name: &'static str,
    pub passed: bool,
    pub computed: String,
    pub expected: String,
}

#[derive(Debug, Serialize)]
struct ReportDoc {
    seed: u64,
    passed: usize,
    failed: usize,
    failures: Vec<&'static str>,
    items: Vec<Item>,
}

type Check = Result<(String, String, bool), String>;
type Job = Box<dyn Fn() -> Check + Send + Sync>;

fn dims(v: &[usize]) -> SystemDims {
    SystemDims::new(v.to_vec()).expect("static dims are valid")
}

fn e(x: impl std::fmt::Display) -> String {
    x.to_string()
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn complex_counting() -> Check {
    let mut counts = Vec::new();
    let mut ok = true;
    for n in 1..=4 {
        let basis = complex_projector_basis(n).map_err(e)?;
        let (rank, _) = basis.rank().map_err(e)?;
        ok &= rank == basis.len();
        counts.push(format!("{}/{rank}", basis.len()));
    }
    let expected = join((1..=4).map(|n| format!("{0}/{0}", n * n)));
    let computed = join(counts);
    Ok((computed.clone(), expected.clone(), ok && computed == expected))
}

fn real_counting() -> Check {
    let mut counts = Vec::new();
    for n in 1..=6 {
        let basis = real_product_basis(&dims(&[n])).map_err(e)?;
        let (rank, _) = basis.rank().map_err(e)?;
        counts.push(format!("{}/{rank}", basis.len()));
    }
    let expected = join((1..=6).map(|n| format!("{0}/{0}", n * (n + 1) / 2)));
    let computed = join(counts);
    Ok((computed.clone(), expected.clone(), computed == expected))
}

fn grouping_invariance() -> Check {
    let mut checks = 0;
    let mut failures = 0;
    for r in 1..=3 {
        for s in 1..=r {
            let p = TheoryProfile::new(r, s, 1).map_err(e)?;
            for len in 1..=4u32 {
                for code in 0..3usize.pow(len) {
                    let d: Vec<usize> = (0..len).map(|i| 1 + code / 3usize.pow(i) % 3).collect();
                    let folded = kl_multi(&dims(&d), &p).map_err(e)?;
                    let reversed = d
                        .iter()
                        .rev()
                        .try_fold(KLPair::TRIVIAL, |acc, &n| kl_compose(kl_single(n as u64, &p)?, acc))
                        .map_err(e)?;
                    let n: u64 = d.iter().map(|&x| x as u64).product();
                    let closed = (n.pow(r) + n.pow(s)) / 2;
                    checks += 1;
                    if folded != reversed || folded.k != closed {
                        failures += 1;
                    }
                }
            }
        }
    }
    Ok((
        format!("{failures} failures in {checks}"),
        format!("0 failures in {checks}"),
        failures == 0,
    ))
}

fn real_basis_rank() -> Check {
    let mut parts = Vec::new();
    for d in [&[2, 2][..], &[2, 2, 2]] {
        let basis = real_product_basis(&dims(d)).map_err(e)?;
        let (rank, _) = basis.rank().map_err(e)?;
        parts.push(format!("{}/{rank}", basis.len()));
    }
    let computed = join(parts);
    let expected = "10/10, 36/36".to_owned();
    Ok((computed.clone(), expected.clone(), computed == expected))
}

fn bilocal_projectors() -> Check {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for d in [&[2, 2][..], &[2, 2, 2]] {
        let cert = bilocal_projector_basis(&dims(d), &PairingRule::Adjacent)
            .and_then(|b| b.certify())
            .map_err(e)?;
        ok &= certificate_ok(&cert) && cert.all_real_symmetric && cert.max_locality <= 2;
        worst = worst.max(cert.max_idempotence_defect.unwrap_or(f64::INFINITY));
    }
    Ok((
        format!("max |P^2 - P| = {worst:e}, real, at most bilocal, full rank"),
        "max |P^2 - P| <= 1e-12, real, at most bilocal, full rank".into(),
        ok && worst <= 1e-12,
    ))
}

fn round_trip(seed: u64, trials: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let cases = [
        (dims(&[2, 2]), FrameArg::BilocalProjector, FieldKind::Real),
        (dims(&[3]), FrameArg::Complex, FieldKind::Complex),
    ];
    for (d, frame_kind, field) in cases {
        let frame = frame_for(&d, frame_kind)?;
        for _ in 0..trials {
            let rho = match field {
                FieldKind::Real => random_real_state(d.total(), &mut rng),
                FieldKind::Complex => random_complex_state(d.total(), &mut rng),
            };
            let back = reconstruct(&expectations(&rho, &frame).map_err(e)?, &frame, field).map_err(e)?;
            worst = worst.max(back.frobenius_distance(&rho));
        }
    }
    Ok((
        format!("max error {worst:.3e} over {} states", 2 * trials),
        format!("<= {ROUND_TRIP_TOLERANCE:e}"),
        worst <= ROUND_TRIP_TOLERANCE,
    ))
}

fn witness() -> Check {
    let w = local_tomography_witness(&dims(&[2, 2])).map_err(e)?;
    Ok((
        format!(
            "distance {}, local gap {:e}, {} gap {}",
            w.global_distance, w.max_local_stat_gap, w.discriminating_observable, w.discriminating_gap
        ),
        "distance >= 0.3, local gap <= 1e-12, separating gap >= 0.4".into(),
        w.is_valid() && w.global_distance >= 0.3 && w.discriminating_gap.abs() >= 0.4,
    ))
}

fn four_rebit_audit() -> Check {
    let a = bilocal_redundancy_audit(&dims(&[2, 2, 2, 2]), &TheoryProfile::real_qm()).map_err(e)?;
    let computed = format!("naive={} true={} surplus={}", a.naive_count, a.true_k, a.surplus);
    let expected = "naive=138 true=136 surplus=2".to_owned();
    Ok((computed.clone(), expected.clone(), computed == expected))
}

fn four_rebit_coincidence_item(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = four_rebit_coincidence(&mut rng).map_err(e)?;
    Ok((
        format!(
            "YYYY = {:.12}, pairings disagree by {:e}",
            r.pauli_coefficient, r.max_disagreement
        ),
        "pairings agree to 1e-12".into(),
        r.max_disagreement <= 1e-12,
    ))
}

fn ideality(level: usize, expected: &str) -> Check {
    let sol = solve_ideality(level).map_err(e)?;
    let mut computed = format!("({})", join(sol.coefficients().into_iter().map(|c| c.2)));
    if let Some(eps) = sol.epsilon {
        computed.push_str(&format!(" at epsilon {eps}"));
    }
    Ok((computed.clone(), expected.to_owned(), computed == expected))
}

pub fn items(seed: u64, trials: usize) -> Vec<Item> {
    let checks: Vec<(&'static str, Job)> = vec![
        ("complex_counting", Box::new(complex_counting)),
        ("real_counting", Box::new(real_counting)),
        ("grouping_invariance", Box::new(grouping_invariance)),
        ("real_basis_rank", Box::new(real_basis_rank)),
        ("bilocal_projector_idempotence", Box::new(bilocal_projectors)),
        ("round_trip_tomography", Box::new(move || round_trip(seed, trials))),
        ("local_tomography_witness", Box::new(witness)),
        ("four_rebit_audit", Box::new(four_rebit_audit)),
        (
            "four_rebit_coincidence",
            Box::new(move || four_rebit_coincidence_item(seed)),
        ),
        ("ideality_level_1", Box::new(|| ideality(1, "(1)"))),
        ("ideality_level_2", Box::new(|| ideality(2, "(1, -2)"))),
        (
            "ideality_level_3",
            Box::new(|| ideality(3, "(1, 1/3, -4/3, 4) at epsilon 1/2")),
        ),
    ];
    // independent items run concurrently; results keep the listed order
    std::thread::scope(|scope| {
        let handles: Vec<_> = checks.iter().map(|(name, check)| (*name, scope.spawn(check))).collect();
        handles
            .into_iter()
            .map(|(name, handle)| {
                let result = handle.join().unwrap_or_else(|_| Err("panicked".into()));
                match result {
                    Ok((computed, expected, passed)) => Item {
                        name,
                        passed,
                        computed,
                        expected,
                    },
                    Err(why) => Item {
                        name,
                        passed: false,
                        computed: format!("error: {why}"),
                        expected: String::new(),
                    },
                }
            })
            .collect()
    })
}

pub fn run_report(seed: u64, trials: usize) -> Outcome {
    let items = items(seed, trials);
    let failures: Vec<&'static str> = items.iter().filter(|i| !i.passed).map(|i| i.name).collect();
    let doc = ReportDoc {
        seed,
        passed: items.len() - failures.len(),
        failed: failures.len(),
        failures,
        items,
    };
    let mut rows = vec![vec![
        "item".to_owned(),
        "status".into(),
        "computed".into(),
        "expected".into(),
    ]];
    for i in &doc.items {
        let status = if i.passed { "PASS" } else { "FAIL" };
        rows.push(vec![
            i.name.to_owned(),
            status.into(),
            i.computed.clone(),
            i.expected.clone(),
        ]);
    }
    let text = format!("{}\n\n{} passed, {} failed", table_rows(&rows), doc.passed, doc.failed);
    let ok = doc.failed == 0;
    Outcome::new(&doc, ok).expect("report serializes").with_text(text)
}
