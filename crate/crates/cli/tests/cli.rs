use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bitomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bitomo"))
        .args(args)
        .env_remove("BITOMO_TOLERANCE_RANK")
        .output()
        .expect("binary runs")
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_bitomo"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.code().is_some_and(|c| c <= 1),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("bitomo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn count_with_audit() {
    let out = bitomo(&["count", "--dims", "2,2,2,2", "--audit"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["k"], "136");
    assert_eq!(v["l"], "120");
    assert_eq!(v["audit"]["naive_count"], "138");
    assert_eq!(v["audit"]["surplus"], "2");
    assert_eq!(v["audit"]["per_class"]["2+1+1"], "54");
}

#[test]
fn count_three_rebits_and_complex() {
    assert_eq!(json(&bitomo(&["count", "--dims", "2,2,2"]))["k"], "36");
    assert_eq!(
        json(&bitomo(&["count", "--dims", "3,3", "--r", "2", "--s", "2"]))["k"],
        "81"
    );
}

#[test]
fn count_text_is_aligned() {
    let out = bitomo(&["count", "--dims", "2,2", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("k      10"), "{text}");
    assert!(text.contains("l      6"), "{text}");
}

#[test]
fn fit_from_stdin_and_file() {
    let v = json(&with_stdin(&["fit"], "1 1\n2 3\n3 7\n"));
    assert_eq!(v["fit"], Value::Null);
    assert!(v["reason"].as_str().unwrap().contains("no (r, s)"));

    let path = scratch("real.txt");
    std::fs::write(&path, "# N K\n1 1\n2 3\n3 6\n4 10\n").unwrap();
    let v = json(&bitomo(&["fit", path.to_str().unwrap()]));
    assert_eq!((v["r"].as_str(), v["s"].as_str()), (Some("2"), Some("1")));

    let v = json(&with_stdin(&["fit", "-"], "1 1\n2 4\n3 9\n4 16\n"));
    assert_eq!((v["r"].as_str(), v["s"].as_str()), (Some("2"), Some("2")));
}

#[test]
fn fit_rejects_bad_tables() {
    for table in ["1 2\n2 3\n3 6\n", "2 3\n2 4\n3 6\n", "2 3 4\n", "2 3\n"] {
        let out = with_stdin(&["fit"], table);
        assert_eq!(out.status.code(), Some(2), "{table:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn basis_check_and_dump() {
    let path = scratch("basis.json");
    let out = bitomo(&[
        "basis",
        "--dims",
        "2,2,2",
        "--kind",
        "bilocal-projector",
        "--check",
        "--dump",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["count"], 36);
    assert_eq!(v["certificate"]["full_rank"], true);
    assert_eq!(v["certificate"]["max_locality"], 2);
    let dumped = bitomo::statefile::parse_basis_dump(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(dumped.len(), 36);
    assert!(dumped.iter().all(|(_, op)| op.idempotence_defect() <= 1e-12));
}

#[test]
fn basis_pairing_flag() {
    let v = json(&bitomo(&[
        "basis",
        "--dims",
        "2,2,2,2",
        "--kind",
        "bilocal-projector",
        "--pairing",
        "0-2,1-3,0-1,2-3,0-3,1-2",
        "--check",
    ]));
    assert_eq!(v["certificate"]["rank"], 136);
}

#[test]
fn rank_tolerance_env_and_flag() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_bitomo"));
        cmd.args(extra)
            .args(["basis", "--dims", "2,2", "--kind", "bilocal-projector", "--check"]);
        match env {
            Some(v) => cmd.env("BITOMO_TOLERANCE_RANK", v),
            None => cmd.env_remove("BITOMO_TOLERANCE_RANK"),
        };
        cmd.output().unwrap()
    };
    // the smallest relative singular value of this basis is about 0.14
    let loose = run(Some("0.5"), &[]);
    assert_eq!(loose.status.code(), Some(1));
    assert_eq!(json(&loose)["certificate"]["full_rank"], false);
    assert!(run(Some("0.5"), &["--tol", "rank=1e-10"]).status.success());
    assert!(run(None, &[]).status.success());
    assert_eq!(run(None, &["--tol", "speed=1"]).status.code(), Some(2));
}

#[test]
fn tomo_is_deterministic() {
    let a = bitomo(&["tomo", "--dims", "2,2", "--trials", "5", "--seed", "42"]);
    let b = bitomo(&["tomo", "--dims", "2,2", "--trials", "5", "--seed", "42"]);
    let c = bitomo(&["tomo", "--dims", "2,2", "--trials", "5", "--seed", "43"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let v = json(&a);
    assert_eq!(v["per_trial"].as_array().unwrap().len(), 5);
    assert!(v["summary"]["max_error"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn tomo_complex_and_incomplete() {
    let v = json(&bitomo(&[
        "tomo", "--dims", "3", "--field", "complex", "--frame", "complex",
    ]));
    assert_eq!(v["summary"]["passed"], true);
    let out = bitomo(&["tomo", "--dims", "2,2", "--field", "complex"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("deficit 6"));
}

#[test]
fn tomo_state_files() {
    let written = scratch("state.json");
    let out = bitomo(&[
        "tomo",
        "--dims",
        "2,2",
        "--trials",
        "1",
        "--write-state",
        written.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = json(&bitomo(&[
        "tomo",
        "--dims",
        "2,2",
        "--state",
        written.to_str().unwrap(),
    ]));
    assert_eq!(v["summary"]["trials"], 1);
    assert_eq!(v["summary"]["passed"], true);
    let out = bitomo(&["tomo", "--dims", "3", "--state", written.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn witness_output() {
    let v = json(&bitomo(&["witness"]));
    assert_eq!(v["report"]["valid"], true);
    assert_eq!(v["report"]["global_distance"].as_f64(), Some(1.0));
    assert_eq!(v["report"]["discriminating_observable"], "y12⊗y12");
    assert_eq!(v["difference_support"].as_array().unwrap().len(), 1);
}

#[test]
fn ideality_levels() {
    let v = json(&bitomo(&["ideality", "--level", "2"]));
    let values: Vec<&str> = v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["value"].as_str().unwrap())
        .collect();
    assert_eq!(values, ["1", "-2"]);

    let v = json(&bitomo(&[
        "ideality",
        "--level",
        "3",
        "--verify-dims",
        "2,3,2,3",
        "--r",
        "3",
        "--s",
        "1",
    ]));
    let values: Vec<&str> = v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["value"].as_str().unwrap())
        .collect();
    assert_eq!(values, ["1", "1/3", "-4/3", "4"]);
    assert_eq!(v["epsilon"], "1/2");
    assert_eq!(v["verify"]["residual"], "0");
    assert_eq!(v["inclusion"]["family"][3]["value"], "8epsilon");

    assert_eq!(bitomo(&["ideality", "--level", "4"]).status.code(), Some(2));
    assert_eq!(
        bitomo(&["ideality", "--level", "2", "--verify-dims", "2,2,2,2"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn report_passes_and_is_deterministic() {
    let a = bitomo(&["report"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, bitomo(&["report"]).stdout);
    let v = json(&a);
    assert_eq!(v["failed"], 0);
    let item = |name: &str| {
        v["items"]
            .as_array()
            .unwrap()
            .iter()
            .find(|i| i["name"] == name)
            .cloned()
            .unwrap()
    };
    assert_eq!(item("four_rebit_audit")["computed"], "naive=138 true=136 surplus=2");
    assert_eq!(item("ideality_level_3")["computed"], "(1, 1/3, -4/3, 4) at epsilon 1/2");

    let text = String::from_utf8(bitomo(&["report", "--format", "text"]).stdout).unwrap();
    assert!(text
        .lines()
        .any(|l| l.starts_with("four_rebit_audit") && l.contains("PASS")));
    assert!(text.ends_with("12 passed, 0 failed\n"));
}

#[test]
fn unknown_flags_are_rejected() {
    assert_eq!(bitomo(&["count", "--dims", "2", "--bogus"]).status.code(), Some(2));
    assert_eq!(bitomo(&["count", "--dims", "2,x"]).status.code(), Some(2));
}
