//! One pass/fail line per acceptance criterion; exits nonzero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

mod common;

use rspace_lab::atlas::{self, Pi1};
use rspace_lab::cli_report::{self, Check, Format, Meta, Report, RunConfig, Status, Suite};

const SEED: u64 = 7;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn matching<'a>(report: &'a Report, prefixes: &[&str]) -> Vec<&'a Check> {
    report
        .checks
        .iter()
        .filter(|c| prefixes.iter().any(|p| c.id.starts_with(p)))
        .collect()
}

/// All selected checks pass (flags allowed) and at least `min` were found.
fn all_pass(report: &Report, prefixes: &[&str], min: usize) -> Outcome {
    let checks = matching(report, prefixes);
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| c.status == Status::Fail)
        .map(|c| c.id.as_str())
        .collect();
    outcome(
        checks.len() >= min && failed.is_empty(),
        format!(
            "{} checks, {} failed{}",
            checks.len(),
            failed.len(),
            if failed.is_empty() {
                String::new()
            } else {
                format!(": {}", failed.join(", "))
            }
        ),
    )
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn criterion_1() -> Outcome {
    let (report, elapsed) = timed(|| atlas::verify_table(SEED));
    let rows: Vec<_> = report.rows.iter().filter(|r| r.instantiable).collect();
    let ratios = rows.iter().all(|r| r.computed_ratio == Some(r.table_ratio));
    let dichotomy = rows
        .iter()
        .all(|r| (r.table_ratio == 2) == (r.table_pi1 == Pi1::Trivial));
    outcome(
        rows.len() >= 10 && ratios && dichotomy && report.all_pass() && elapsed < Duration::from_secs(60),
        format!(
            "{} instances, ratios {ratios}, pi1 dichotomy {dichotomy}, {:.1}s",
            rows.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2(cfg: &RunConfig) -> Outcome {
    let (checks, elapsed) = timed(|| cli_report::run_suite(cfg, Suite::Critical));
    let report = Report {
        meta: Meta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.seed,
        },
        checks,
    };
    let gaps = matching(&report, &["critical.max_minus_min", "critical.second_minus_min"]);
    let base = all_pass(&report, &["critical."], 15);
    outcome(
        base.pass && gaps.len() == 10 && cli_report::CRITICAL_RESTARTS >= 50 && elapsed < Duration::from_secs(300),
        format!(
            "{}, {} restarts, {:.1}s",
            base.detail,
            cli_report::CRITICAL_RESTARTS,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_6(report: &Report) -> Outcome {
    let base = all_pass(report, &["capacity.systole."], 7);
    let mut worst = 0.0_f64;
    for (id, params, expected) in [
        ("sphere", &[2][..], 2.0 * PI),
        ("quadric_real", &[1, 2][..], 2f64.sqrt() * PI),
        ("quadric_real", &[2, 2][..], 2f64.sqrt() * PI),
    ] {
        let scanned = common::scanned_systole(&common::instance(id, params), 7.0);
        worst = worst.max((scanned - expected).abs());
    }
    outcome(
        base.pass && worst < 1e-6,
        format!("{}, period-scan oracle deviation {worst:.1e}", base.detail),
    )
}

fn main() {
    let cfg = RunConfig::with_seed(SEED);
    let (first, elapsed) = timed(|| cli_report::build_verify_report(&cfg));
    let second = cli_report::build_verify_report(&cfg);
    let a = cli_report::render_report(&first, Format::Json);
    let b = cli_report::render_report(&second, Format::Json);

    let results = [
        criterion_1(),
        criterion_2(&cfg),
        all_pass(&first, &["delta.mismatches."], 2),
        all_pass(&first, &["orbit.moment_interior.", "orbit.moment_exterior."], 40),
        all_pass(
            &first,
            &[
                "capacity.u_formula.",
                "capacity.u_gromov_equals_hz.",
                "capacity.generator_area.",
                "capacity.normalized_ratio_scaled.",
                "capacity.disc_formula.",
                "capacity.disc_equals_u.",
                "capacity.quadric_contractible.",
            ],
            100,
        ),
        criterion_6(&first),
        all_pass(
            &first,
            &[
                "algebra.",
                "roots.",
                "orbit.complex_structure.",
                "orbit.kks_",
                "orbit.minimum_index.",
                "critical.even_indices.",
            ],
            300,
        ),
        all_pass(
            &first,
            &[
                "finsler.unit_ball_equals_box.",
                "finsler.f2_spread.",
                "finsler.f2_constant.",
                "finsler.monotonicity.",
            ],
            80,
        ),
        outcome(
            a == b && !a.is_empty(),
            format!("{} bytes, full verify {:.1}s", a.len(), elapsed.as_secs_f64()),
        ),
    ];

    let mut ok = true;
    for (i, r) in results.iter().enumerate() {
        println!(
            "criterion {}: {} ({})",
            i + 1,
            if r.pass { "PASS" } else { "FAIL" },
            r.detail
        );
        ok &= r.pass;
    }
    if !ok {
        std::process::exit(1);
    }
}
