use bitomo_web::{basis, count, ideality_family};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).expect("exports return JSON")
}

#[test]
fn count_four_rebits() {
    let v = parse(count("2,2,2,2", 2, 1));
    assert_eq!(v["k"], "136");
    assert_eq!(v["audit"]["naive"], "138");
    assert_eq!(v["audit"]["surplus"], "2");
    let v = parse(count("2,2", 2, 2));
    assert_eq!(v["k"], "16");
    assert!(v["audit"].is_null());
}

#[test]
fn errors_are_json() {
    assert!(parse(count("2,,2", 2, 1))["error"].is_string());
    assert!(parse(count("2,2", 1, 2))["error"].is_string());
    assert!(parse(basis("2,2", "wavelet"))["error"].is_string());
    assert!(parse(basis("3,3,2", "real"))["error"]
        .as_str()
        .unwrap()
        .contains("demo limit"));
    assert!(parse(ideality_family(1, 0))["error"].is_string());
}

#[test]
fn basis_matrices_are_row_major() {
    let v = parse(basis("3", "sigma"));
    assert_eq!(v["dim"], 3);
    let ops = v["operators"].as_array().unwrap();
    assert_eq!(ops.len(), 9);
    let y12 = ops.iter().find(|o| o["label"] == "y12").unwrap();
    // sigma_y on levels 1, 2: -i at (0, 1) and +i at (1, 0)
    assert_eq!(y12["im"][1].as_f64(), Some(-1.0));
    assert_eq!(y12["im"][3].as_f64(), Some(1.0));

    let v = parse(basis("2,2", "bilocal-projector"));
    assert_eq!(v["certificate"]["full_rank"], true);
    assert_eq!(v["operators"].as_array().unwrap().len(), 10);
    assert!(v["operators"]
        .as_array()
        .unwrap()
        .iter()
        .all(|o| o["im"].as_array().unwrap().iter().all(|x| x == 0.0)));
}

#[test]
fn only_half_satisfies_novelty() {
    let v = parse(ideality_family(1, 2));
    let exact: Vec<&str> = v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["exact"].as_str().unwrap())
        .collect();
    assert_eq!(exact, ["1", "1/3", "-4/3", "4"]);
    assert!(v["novelty_residuals"].as_array().unwrap().iter().all(|r| r == "0"));
    assert_eq!(v["four_rebit_residual"], "0");

    for (num, den) in [(0, 1), (1, 4), (-3, 2), (2, 1)] {
        let v = parse(ideality_family(num, den));
        assert_eq!(v["four_rebit_residual"], "0", "epsilon {num}/{den}");
        assert!(v["novelty_residuals"].as_array().unwrap().iter().any(|r| r != "0"));
    }
}
