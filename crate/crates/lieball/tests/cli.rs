//! Exit-code and report-shape checks for the batch command surface.

use lieball::cli::run;

fn exec(args: &[&str]) -> i32 {
    let mut argv = vec!["lieball"];
    argv.extend_from_slice(args);
    run(argv)
}

#[test]
fn exit_codes_follow_the_contract() {
    // informational / passing checks
    assert_eq!(exec(&["catalog", "list"]), 0);
    assert_eq!(exec(&["signature", "--power", "2", "2"]), 0);
    assert_eq!(exec(&["verify", "isometry", "RIV:n=2", "--lambda", "auto", "--samples", "20"]), 0);
    assert_eq!(exec(&["classify", "Izero:n=2"]), 0);
    assert_eq!(exec(&["witness", "--n", "2", "--theta", "pi/6", "--samples", "20"]), 0);
    assert_eq!(exec(&["jet", "residual", "model:n=2,psi=z1^2"]), 0);

    // checks that run but fail
    assert_eq!(
        exec(&["verify", "isometry", "Gk:k=2", "--lambda", "1", "--samples", "20", "--tol", "1e-3"]),
        1
    );
    assert_eq!(exec(&["classify", "flat:n=2,m=4"]), 1);
    assert_eq!(exec(&["jet", "residual", "model:n=2,psi=z1^2,unpaired=true"]), 1);

    // input errors
    assert_eq!(exec(&["classify", "nonsense:n=2"]), 2);
    assert_eq!(exec(&["witness", "--n", "2", "--theta", "pi/2"]), 2);
    assert_eq!(exec(&["verify", "isometry", "RIV:n=2", "--radius", "1.5"]), 2);
    assert_eq!(exec(&["frobnicate"]), 2);
}

#[test]
fn reports_carry_config_and_version() {
    let dir = std::env::temp_dir().join("lieball-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("report.json");
    let code = exec(&[
        "verify",
        "isometry",
        "L:m=3",
        "--samples",
        "25",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 9);
    assert_eq!(report["config"]["samples"], 25);
    assert!(report["version"].is_string());
    assert_eq!(report["pass"], true);
    // lambda resolved from the embedding dimensions: 1/m
    assert_eq!(report["result"]["lambda_candidates"][0], 1.0 / 3.0);

    // determinism: identical argv + seed give byte-identical reports
    let out2 = dir.join("report2.json");
    let code = exec(&[
        "verify",
        "isometry",
        "L:m=3",
        "--samples",
        "25",
        "--seed",
        "9",
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        std::fs::read_to_string(&out2).unwrap()
    );
}
