use rspace_lab::cli_report::{self, run, Format, RunConfig, Suite, EXIT_FAILURE, EXIT_IO, EXIT_OK, EXIT_USAGE};

fn args(list: &[&str]) -> Vec<String> {
    std::iter::once("rspace-lab")
        .chain(list.iter().copied())
        .map(String::from)
        .collect()
}

fn out_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("rspace-lab-{}-{name}", std::process::id()))
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(args(&["--help"])), EXIT_OK);
    assert_eq!(run(args(&["--version"])), EXIT_OK);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(args(&["verify", "--suite", "nope"])), EXIT_USAGE);
    assert_eq!(run(args(&["atlas", "--space", "nope"])), EXIT_USAGE);
    assert_eq!(
        run(args(&["verify", "--space", "sphere", "--params", "1,2"])),
        EXIT_USAGE
    );
    assert_eq!(run(args(&["verify", "--params", "2"])), EXIT_USAGE);
    assert_eq!(run(args(&["verify", "--tol", "-1"])), EXIT_USAGE);
    assert_eq!(run(args(&["verify", "-s", "3"])), EXIT_USAGE);
    assert_eq!(run(args(&["frobnicate"])), EXIT_USAGE);
}

#[test]
fn unwritable_output_exits_74() {
    assert_eq!(run(args(&["atlas", "--out", "/nonexistent-dir/x.json"])), EXIT_IO);
}

#[test]
fn atlas_filter_selects_default_sphere() {
    let path = out_path("atlas.json");
    assert_eq!(
        run(args(&[
            "atlas",
            "--space",
            "sphere",
            "--format",
            "json",
            "--out",
            path.to_str().unwrap()
        ])),
        EXIT_OK
    );
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["computed_ratio"], 2);
    std::fs::remove_file(path).ok();
}

#[test]
fn verify_json_follows_schema() {
    let path = out_path("verify.json");
    let code = run(args(&[
        "verify",
        "--suite",
        "delta,roots",
        "--space",
        "grassmann_real",
        "--params",
        "1,1",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]));
    assert_eq!(code, EXIT_OK);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["meta"]["seed"], 7);
    assert!(doc["meta"]["version"].is_string());
    let checks = doc["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["id"].as_str().unwrap().starts_with("delta.")));
    for c in checks {
        for key in ["id", "paper_ref", "status", "computed", "expected", "tolerance"] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
        assert_eq!(c["status"], "pass");
    }
    std::fs::remove_file(path).ok();
}

#[test]
fn csv_has_one_row_per_check() {
    let mut cfg = RunConfig::with_seed(3);
    cfg.suites = vec![Suite::Algebra];
    let report = cli_report::build_verify_report(&cfg);
    let csv = cli_report::render_report(&report, Format::Csv);
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["id", "paper_ref", "status", "computed", "expected", "tolerance"]
    );
    assert_eq!(reader.records().count(), report.checks.len());
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let mut cfg = RunConfig::with_seed(11);
    cfg.suites = vec![Suite::Roots, Suite::Finsler];
    cfg.space = Some("quadric_real".to_string());
    let a = cli_report::render_report(&cli_report::build_verify_report(&cfg), Format::Json);
    let b = cli_report::render_report(&cli_report::build_verify_report(&cfg), Format::Json);
    assert_eq!(a, b);
}

#[test]
fn tight_tolerance_turns_checks_red() {
    let code = run(args(&[
        "verify",
        "--suite",
        "roots",
        "--space",
        "sphere",
        "--params",
        "2",
        "--tol",
        "1e-30",
        "--out",
        "/dev/null",
    ]));
    assert_eq!(code, EXIT_FAILURE);
}

#[test]
fn report_rows_for_sphere_and_projective_space() {
    let mut cfg = RunConfig::with_seed(7);
    cfg.space = Some("sphere".to_string());
    cfg.params = vec![2];
    let doc = cli_report::build_summary(&cfg);
    let r = &doc.rows[0];
    let two_pi = 2.0 * std::f64::consts::PI;
    assert!((r.sys - two_pi).abs() < 1e-6);
    assert_eq!(r.ratio, 2);
    for v in [r.c_g_u1, r.c_hz_u1, r.c_hz_d1.unwrap()] {
        assert!((v - two_pi).abs() < 1e-6);
    }
    cfg.space = Some("grassmann_real".to_string());
    cfg.params = vec![1, 2];
    let rp = &cli_report::build_summary(&cfg).rows[0];
    assert!((rp.c_hz_d1.unwrap() - 2.0 * rp.sys).abs() < 1e-12);
    assert!(doc.passed());
}
