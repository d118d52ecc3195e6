//! Command-line front end: atlas listing, verification suites and the
//! capacity summary, rendered as JSON, CSV or text.
//!
//! Every stochastic suite draws from its own seed, the master seed plus a
//! fixed offset, so reports are reproducible byte for byte.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fmt;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::atlas::{self, RSpaceDescriptor, SpaceInstance};
use crate::capacity::{self, CaseTag, NormalizationContext};
use crate::finsler::{self, FinslerNorm, Reading};
use crate::lie_core::{self, Family, TOL_ALG};
use crate::linalg;
use crate::orbit::{self, CutLocusModel, OrbitContext};
use crate::root_system::{self, TOL_SL2};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

pub const CRITICAL_RESTARTS: usize = 60;
pub const SAMPLES: usize = 1000;
pub const SYSTOLE_SAMPLES: usize = 50;

#[derive(Debug, Parser)]
#[command(name = "rspace-lab", version, about = "Symmetric R-space laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of R-spaces with tabulated and computed rank ratios.
    Atlas(CommonArgs),
    /// Run verification suites and report every check.
    Verify(CommonArgs),
    /// Capacity summary table.
    Report(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Master seed for all stochastic suites.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Suites to run (comma separated): algebra, roots, orbit, delta, critical, capacity, finsler. Default: all.
    #[arg(long, value_delimiter = ',')]
    pub suite: Vec<String>,
    /// Restrict to one atlas id, e.g. `sphere`.
    #[arg(long)]
    pub space: Option<String>,
    /// Parameters for `--space`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub params: Vec<usize>,
    /// Multiplier applied to every check tolerance.
    #[arg(long, default_value_t = 1.0)]
    pub tol: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Algebra,
    Roots,
    Orbit,
    Delta,
    Critical,
    Capacity,
    Finsler,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Algebra,
        Suite::Roots,
        Suite::Orbit,
        Suite::Delta,
        Suite::Critical,
        Suite::Capacity,
        Suite::Finsler,
    ];

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Roots => "roots",
            Suite::Orbit => "orbit",
            Suite::Delta => "delta",
            Suite::Critical => "critical",
            Suite::Capacity => "capacity",
            Suite::Finsler => "finsler",
        }
    }

    fn seed_offset(self) -> u64 {
        0x100 * (self as u64 + 1)
    }
}

#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub suites: Vec<Suite>,
    pub space: Option<String>,
    pub params: Vec<usize>,
    pub tol_scale: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn from_args(a: &CommonArgs) -> Result<RunConfig, UsageError> {
        let mut suites = Vec::new();
        for s in &a.suite {
            let suite = Suite::parse(s.trim()).ok_or_else(|| UsageError(format!("unknown suite `{s}`")))?;
            if !suites.contains(&suite) {
                suites.push(suite);
            }
        }
        if suites.is_empty() {
            suites = Suite::ALL.to_vec();
        }
        suites.sort();
        if !(a.tol.is_finite() && a.tol > 0.0) {
            return Err(UsageError(format!("--tol must be positive, got {}", a.tol)));
        }
        if let Some(id) = &a.space {
            if !atlas::list_entries().iter().any(|d| d.instantiable && &d.id == id) {
                return Err(UsageError(format!("unknown space id `{id}`")));
            }
            if !a.params.is_empty() {
                RSpaceDescriptor::lookup(id, &a.params).map_err(|e| UsageError(e.to_string()))?;
            }
        } else if !a.params.is_empty() {
            return Err(UsageError("--params requires --space".to_string()));
        }
        Ok(RunConfig {
            seed: a.seed,
            suites,
            space: a.space.clone(),
            params: a.params.clone(),
            tol_scale: a.tol,
            out: a.out.clone(),
            format: a.format,
        })
    }

    /// Default configuration for a seed: all suites, all spaces, text output.
    pub fn with_seed(seed: u64) -> RunConfig {
        RunConfig {
            seed,
            suites: Suite::ALL.to_vec(),
            space: None,
            params: Vec::new(),
            tol_scale: 1.0,
            out: None,
            format: Format::Json,
        }
    }

    pub fn suite_seed(&self, s: Suite) -> u64 {
        self.seed.wrapping_add(s.seed_offset())
    }

    /// Instantiable descriptors matching the space filter.
    pub fn instances(&self) -> Vec<RSpaceDescriptor> {
        match (&self.space, self.params.is_empty()) {
            (Some(id), false) => vec![RSpaceDescriptor::lookup(id, &self.params).expect("validated")],
            (Some(id), true) => atlas::list_entries()
                .into_iter()
                .filter(|d| d.instantiable && &d.id == id)
                .collect(),
            (None, _) => atlas::list_entries().into_iter().filter(|d| d.instantiable).collect(),
        }
    }

    fn matches(&self, d: &RSpaceDescriptor) -> bool {
        match &self.space {
            None => true,
            Some(id) => &d.id == id && (self.params.is_empty() || self.params == d.params),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Recorded discrepancy that does not fail the run.
    Flag,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: String,
    pub paper_ref: String,
    pub status: Status,
    pub computed: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl Check {
    fn from_bool(id: String, formula: &str, pass: bool, computed: f64, expected: f64, tolerance: f64) -> Check {
        Check {
            id,
            paper_ref: formula.to_string(),
            status: if pass { Status::Pass } else { Status::Fail },
            computed,
            expected,
            tolerance,
        }
    }

    /// `computed <= bound`.
    fn at_most(id: String, formula: &str, computed: f64, bound: f64) -> Check {
        Check::from_bool(id, formula, computed <= bound, computed, 0.0, bound)
    }

    /// `|computed - expected| <= tol |expected|`.
    fn relative(id: String, formula: &str, computed: f64, expected: f64, tol: f64) -> Check {
        let pass = (computed - expected).abs() <= tol * expected.abs();
        Check::from_bool(id, formula, pass, computed, expected, tol)
    }

    fn exact(id: String, formula: &str, computed: f64, expected: f64) -> Check {
        Check::from_bool(id, formula, computed == expected, computed, expected, 0.0)
    }

    fn flag_if_failed(mut self) -> Check {
        if self.status == Status::Fail {
            self.status = Status::Flag;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub version: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub meta: Meta,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

fn meta(seed: u64) -> Meta {
    Meta {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
    }
}

fn context_for(d: &RSpaceDescriptor, seed: u64) -> Result<OrbitContext, String> {
    OrbitContext::from_descriptor(d, seed).map_err(|e| e.to_string())
}

fn context_failure(suite: Suite, label: &str, err: &str) -> Check {
    Check {
        id: format!("{}.context.{label}", suite.name()),
        paper_ref: format!("instance construction: {err}"),
        status: Status::Fail,
        computed: f64::NAN,
        expected: 0.0,
        tolerance: 0.0,
    }
}

/// Runs `f` on the orbit context of every selected instance, in parallel, preserving order.
fn per_instance<F>(cfg: &RunConfig, suite: Suite, f: F) -> Vec<Check>
where
    F: Fn(&OrbitContext, u64) -> Vec<Check> + Sync,
{
    let seed = cfg.suite_seed(suite);
    cfg.instances()
        .par_iter()
        .map(|d| match context_for(d, cfg.seed) {
            Ok(ctx) => f(&ctx, seed),
            Err(e) => vec![context_failure(suite, &d.label(), &e)],
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub fn suite_algebra(cfg: &RunConfig) -> Vec<Check> {
    let t = cfg.tol_scale;
    let seed = cfg.suite_seed(Suite::Algebra);
    let algebras = [
        (Family::So, 4),
        (Family::So, 5),
        (Family::Su, 3),
        (Family::Sp, 2),
        (Family::U, 2),
    ];
    let mut checks: Vec<Check> = algebras
        .par_iter()
        .map(|&(family, n)| {
            let alg = lie_core::build_algebra(family, n).expect("supported size");
            let id = |name: &str| format!("algebra.{name}.{family}({n})");
            let mut out = vec![
                Check::at_most(
                    id("jacobi"),
                    "[X,[Y,Z]] + [Y,[Z,X]] + [Z,[X,Y]] = 0",
                    alg.jacobi_residual(),
                    TOL_ALG * t,
                ),
                Check::at_most(
                    id("antisymmetry"),
                    "c_ij^k = -c_ji^k",
                    alg.antisymmetry_residual(),
                    TOL_ALG * t,
                ),
                Check::at_most(
                    id("killing_from_structure_constants"),
                    "B_ij = tr(ad_i ad_j)",
                    alg.killing_consistency_residual(),
                    TOL_ALG * t * 100.0,
                ),
            ];
            if let Some(f) = family.killing_trace_factor(n) {
                let d = alg.dim();
                let mut worst = 0.0_f64;
                let scale = alg.killing_matrix.amax();
                for i in 0..d {
                    for j in 0..d {
                        let (ei, ej) = (
                            DVector::from_fn(d, |k, _| (k == i) as u8 as f64),
                            DVector::from_fn(d, |k, _| (k == j) as u8 as f64),
                        );
                        worst = worst.max((alg.killing_matrix[(i, j)] - f * alg.trace_form_coords(&ei, &ej)).abs());
                    }
                }
                out.push(Check::at_most(
                    id("killing_trace_factor"),
                    "B(X,Y) = k_family tr(XY)",
                    worst / scale,
                    1e-8 * t,
                ));
            }
            let mut rng = linalg::seeded_rng(seed, n as u64 + 16 * family.field_dim() as u64);
            let skew = (0..100)
                .map(|_| alg.ad_skew_residual(&linalg::gaussian_vector(&mut rng, alg.dim())))
                .fold(0.0, f64::max);
            out.push(Check::at_most(
                id("ad_skew"),
                "B([Z,X],Y) + B(X,[Z,Y]) = 0",
                skew,
                TOL_ALG * t,
            ));
            out
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let instances: Vec<Check> = cfg
        .instances()
        .par_iter()
        .map(|d| match atlas::instantiate(d) {
            Ok(s) => instance_algebra_checks(&s, t),
            Err(e) => vec![context_failure(Suite::Algebra, &d.label(), &e.to_string())],
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    checks.extend(instances);
    checks
}

fn instance_algebra_checks(s: &SpaceInstance, t: f64) -> Vec<Check> {
    let r = s.residuals();
    let label = s.label();
    let id = |name: &str| format!("algebra.{name}.{label}");
    vec![
        Check::at_most(
            id("theta_square"),
            "theta^2 = id",
            s.theta.square_residual(),
            TOL_ALG * t,
        ),
        Check::at_most(
            id("sigma_square"),
            "sigma^2 = id",
            s.sigma.square_residual(),
            TOL_ALG * t,
        ),
        Check::at_most(
            id("theta_inclusions"),
            "[k,k] < k, [k,p] < p, [p,p] < k",
            r.theta_inclusions,
            TOL_ALG * t,
        ),
        Check::at_most(
            id("sigma_inclusions"),
            "[k,k] < k, [k,p] < p, [p,p] < k",
            r.sigma_inclusions,
            TOL_ALG * t,
        ),
        Check::at_most(
            id("instance"),
            "theta sigma = sigma theta, ad_xi^2 = -1 on p_vee",
            r.max(),
            TOL_ALG * t,
        ),
    ]
}

fn root_checks(ctx: &OrbitContext, seed: u64, t: f64) -> Vec<Check> {
    let label = ctx.space.label();
    let alg = &ctx.space.g_vee;
    let id = |name: &str| format!("roots.{name}.{label}");
    let mut rng = linalg::seeded_rng(seed, 0x7007);
    let mut out = Vec::new();
    for (name, roots) in [("flat", &ctx.roots_flat), ("flat_bar", &ctx.roots_bar)] {
        let mut worst = 0.0_f64;
        for _ in 0..20 {
            let x = linalg::gaussian_vector(&mut rng, roots.subspace.dim());
            let lifted = roots.subspace.lift(&x);
            let b = -alg.killing_coords(&lifted, &lifted);
            worst = worst.max((roots.quadratic_form(&x) - b).abs() / b);
        }
        out.push(Check::at_most(
            id(&format!("killing_reconstruction_{name}")),
            "-B(X,X) = sum mult(a) a(X)^2",
            worst,
            1e-6 * t,
        ));
        out.push(Check::exact(
            id(&format!("negation_closed_{name}")),
            "a in S => -a in S",
            roots.negation_closed() as u8 as f64,
            1.0,
        ));
        out.push(Check::exact(
            id(&format!("multiplicity_sum_{name}")),
            "sum mult + dim centralizer = dim g",
            roots.multiplicity_total() as f64,
            alg.dim() as f64,
        ));
    }
    let cascade = &ctx.cascade;
    let sl2 = cascade
        .triples
        .iter()
        .map(|tr| tr.max_residual(alg))
        .fold(0.0, f64::max);
    out.push(Check::at_most(
        id("sl2_relations"),
        "[H,X] = 2X, [H,Y] = -2Y, [X,Y] = H",
        sl2,
        TOL_SL2 * t,
    ));
    let mut cross = 0.0_f64;
    for i in 0..cascade.triples.len() {
        for j in (i + 1)..cascade.triples.len() {
            cross = cross.max(cascade.triples[i].cross_residual(alg, &cascade.triples[j]));
        }
    }
    out.push(Check::at_most(
        id("sl2_commute"),
        "distinct strongly orthogonal triples commute",
        cross,
        TOL_SL2 * t,
    ));
    out.push(Check::exact(
        id("strongly_orthogonal"),
        "g_i +- g_j not a root",
        cascade.pairwise_strongly_orthogonal() as u8 as f64,
        1.0,
    ));
    out.push(Check::exact(
        id("cascade_count"),
        "number of strongly orthogonal roots = rk(N_C)",
        cascade.gammas.len() as f64,
        ctx.rank_nc as f64,
    ));
    out
}

pub fn suite_roots(cfg: &RunConfig) -> Vec<Check> {
    let t = cfg.tol_scale;
    per_instance(cfg, Suite::Roots, |ctx, seed| root_checks(ctx, seed, t))
}

fn orbit_checks(ctx: &OrbitContext, seed: u64, t: f64) -> Vec<Check> {
    let label = ctx.space.label();
    let id = |name: &str| format!("orbit.{name}.{label}");
    let x = orbit::random_orbit_point(ctx, seed);
    let res = orbit::orbit_residuals(ctx, &x.value);
    let mut rng = linalg::seeded_rng(seed, 0x0b0b);
    let k = ctx.random_generator(&mut rng, &ctx.space.k_vee_basis, 1.0);
    let moment = orbit::moment_image_spectrum_check(ctx, SAMPLES, seed);
    let mut hessian_odd = 0usize;
    let base_index = orbit::hessian_index(ctx, ctx.xi());
    hessian_odd += base_index % 2;
    vec![
        Check::at_most(
            id("certificate"),
            "spectrum of ad_x equals spectrum of ad_xi",
            res.certificate,
            orbit::TOL_CERT * t,
        ),
        Check::at_most(
            id("complex_structure"),
            "J^2 = -1 with J = ad_x",
            res.complex_structure,
            1e-7 * t,
        ),
        Check::at_most(
            id("kks_antisymmetry"),
            "w_x(v,w) = -w_x(w,v)",
            res.kks_antisymmetry,
            1e-10 * t,
        ),
        Check::from_bool(
            id("kks_nondegenerate"),
            "w_x nondegenerate on T_x O",
            res.kks_min_singular > 1e-6,
            res.kks_min_singular,
            0.0,
            1e-6,
        ),
        Check::at_most(
            id("kks_invariance"),
            "Ad_g^* w = w",
            orbit::kks_invariance_residual(ctx, &x.value, &k),
            1e-8 * t,
        ),
        Check::at_most(
            id("hamiltonian_field"),
            "w(X_H, .) = dH with X_H = 2 pi [x, xi]",
            orbit::hamiltonian_field_residual(ctx, &x.value),
            1e-8 * t,
        ),
        Check::at_most(
            id("period_one"),
            "time-one flow of H is the identity",
            orbit::period_one_residual(ctx, &x.value),
            1e-8 * t,
        ),
        Check::exact(
            id("minimum_index"),
            "Hessian index at xi is even",
            hessian_odd as f64,
            0.0,
        ),
        Check::exact(
            id("moment_interior"),
            "Ad_K Box_r contains the momentum image",
            moment.interior_accepted as f64,
            moment.interior_total as f64,
        ),
        Check::exact(
            id("moment_exterior"),
            "points outside Ad_K Box_r are not momentum images",
            moment.exterior_rejected as f64,
            moment.exterior_total as f64,
        ),
        Check::exact(
            id("moment_flat_image"),
            "mu(flat points) in closed Box_r",
            moment.flat_in_box as f64,
            moment.flat_total as f64,
        ),
        Check::at_most(
            id("moment_roundtrip"),
            "spectrum of ad(mu) = roots at X",
            moment.roundtrip_residual,
            1e-6 * t,
        ),
        Check::at_most(id("moment_in_k"), "sigma(mu) = mu", moment.k_residual, 1e-8 * t),
    ]
}

pub fn suite_orbit(cfg: &RunConfig) -> Vec<Check> {
    let t = cfg.tol_scale;
    per_instance(cfg, Suite::Orbit, |ctx, seed| orbit_checks(ctx, seed, t))
}

pub fn suite_delta(cfg: &RunConfig) -> Vec<Check> {
    let seed = cfg.suite_seed(Suite::Delta);
    [CutLocusModel::Cp1, CutLocusModel::Cp1xCp1]
        .into_iter()
        .filter(|m| cfg.matches(&m.descriptor()))
        .flat_map(|m| {
            let label = m.descriptor().label();
            match orbit::cut_locus_oracle_check(m, SAMPLES, seed, orbit::DELTA_BAND * cfg.tol_scale) {
                Ok(r) => vec![
                    Check::exact(
                        format!("delta.mismatches.{label}"),
                        "p in Delta iff |a(v)| = pi/2 for a root a",
                        r.mismatches as f64,
                        0.0,
                    ),
                    Check::from_bool(
                        format!("delta.hits.{label}"),
                        "constructed divisor points are detected",
                        r.flat_positive >= r.constructed_on_delta,
                        r.flat_positive as f64,
                        r.constructed_on_delta as f64,
                        0.0,
                    ),
                ],
                Err(e) => vec![context_failure(Suite::Delta, &label, &e.to_string())],
            }
        })
        .collect()
}

/// Spaces whose complexifications are the standard critical-value targets.
pub fn critical_targets() -> Vec<RSpaceDescriptor> {
    [
        ("grassmann_real", vec![1, 1]),
        ("grassmann_complex_hermitian", vec![1, 1]),
        ("sphere", vec![2]),
        ("sphere", vec![3]),
        ("grassmann_real", vec![1, 2]),
    ]
    .into_iter()
    .map(|(id, p)| RSpaceDescriptor::lookup(id, &p).expect("fixed parameters"))
    .collect()
}

pub fn suite_critical(cfg: &RunConfig) -> Vec<Check> {
    let seed = cfg.suite_seed(Suite::Critical);
    let t = cfg.tol_scale;
    let targets: Vec<RSpaceDescriptor> = if cfg.space.is_some() {
        cfg.instances()
    } else {
        critical_targets()
    };
    targets
        .iter()
        .flat_map(|d| {
            let label = d.label();
            let ctx = match context_for(d, cfg.seed) {
                Ok(c) => c,
                Err(e) => return vec![context_failure(Suite::Critical, &label, &e)],
            };
            let id = |name: &str| format!("critical.{name}.{label}");
            let clusters = match orbit::find_critical_points(&ctx, CRITICAL_RESTARTS, seed) {
                Ok(c) => c,
                Err(e) => return vec![context_failure(Suite::Critical, &label, &e.to_string())],
            };
            let odd = clusters.iter().filter(|c| c.hessian_index % 2 == 1).count();
            let mut out = vec![Check::exact(
                id("even_indices"),
                "Morse-Bott indices of H are even",
                odd as f64,
                0.0,
            )];
            match orbit::critical_gap_report(&clusters) {
                Ok((max_gap, smin_gap)) => {
                    out.push(Check::relative(
                        id("max_minus_min"),
                        "max H - min H = 4 pi rk(N_C)",
                        max_gap,
                        4.0 * PI * ctx.rank_nc as f64,
                        capacity::GAP_TOL * t,
                    ));
                    out.push(Check::relative(
                        id("second_minus_min"),
                        "second critical value - min H = 4 pi",
                        smin_gap,
                        4.0 * PI,
                        capacity::GAP_TOL * t,
                    ));
                }
                Err(e) => out.push(context_failure(Suite::Critical, &label, &e.to_string())),
            }
            out
        })
        .collect()
}

/// Expected flat systole for the rows with a closed-form value.
pub fn expected_systole(d: &RSpaceDescriptor) -> Option<f64> {
    match (d.id.as_str(), d.params.as_slice()) {
        ("sphere", _) => Some(2.0 * PI),
        ("quadric_real", _) => Some(2.0_f64.sqrt() * PI),
        ("grassmann_real", [1, 1]) => Some(PI),
        _ => None,
    }
}

fn capacity_checks(ctx: &OrbitContext, seed: u64, t: f64) -> Vec<Check> {
    let label = ctx.space.label();
    let d = &ctx.space.descriptor;
    let id = |name: &str| format!("capacity.{name}.{label}");
    let norm = NormalizationContext::default();
    let sys = match capacity::systole_flat(&ctx.space, SYSTOLE_SAMPLES, seed) {
        Ok(s) => s,
        Err(e) => return vec![context_failure(Suite::Capacity, &label, &e.to_string())],
    };
    let mut out = vec![Check::at_most(
        id("systole_closes"),
        "Ad(exp(T X)) xi = xi",
        sys.closure_residual,
        1e-8 * t,
    )];
    if let Some(expected) = expected_systole(d) {
        out.push(Check::relative(
            id("systole"),
            "shortest closed geodesic",
            sys.systole,
            expected,
            capacity::CAPACITY_TOL * t,
        ));
    }
    let spread = (1..5u64)
        .filter_map(|k| capacity::systole_flat(&ctx.space, SYSTOLE_SAMPLES, seed.wrapping_add(k)).ok())
        .map(|s| (s.systole - sys.systole).abs())
        .fold(0.0, f64::max);
    out.push(Check::at_most(
        id("systole_seed_spread"),
        "systole independent of sampling seed",
        spread,
        1e-6 * t,
    ));
    let u = capacity::capacities_u(ctx, &sys, &norm);
    let u_expected = capacity::u_multiplier(ctx.ratio) * sys.systole;
    out.push(Check::relative(
        id("u_formula"),
        &u.formula_ref,
        u.c_hz.unwrap_or(f64::NAN),
        u_expected,
        capacity::CAPACITY_TOL * t,
    ));
    out.push(Check::exact(
        id("u_gromov_equals_hz"),
        "c_G(U_1N) = c_HZ(U_1N)",
        u.c_g.unwrap_or(f64::NAN),
        u.c_hz.unwrap_or(f64::NAN),
    ));
    for c in &u.checks {
        let check = Check::relative(
            id(&c.name),
            match c.name.as_str() {
                "generator_area" => "w_KKS(A) = 4 pi",
                "normalized_ratio_scaled" => "c(U_rN) = 4 pi with sys = 2 pi R",
                "flat_ratio_scaled" => "c(U_rN) = 4 pi with the flat systole",
                _ => "flat systole = 2 pi R",
            },
            c.computed,
            c.expected,
            c.tolerance * t,
        );
        out.push(if c.audit_only { check.flag_if_failed() } else { check });
    }
    let disc = capacity::chz_disc(&ctx.space, &sys);
    let disc_expected = match disc.case_tag {
        CaseTag::DiscSimplyConnected => Some(sys.systole),
        CaseTag::DiscRp => Some(2.0 * sys.systole),
        CaseTag::DiscQuadric => Some(2.0_f64.sqrt() * sys.systole),
        _ => None,
    };
    match (disc.c_hz, disc_expected) {
        (Some(c), Some(e)) => out.push(Check::relative(
            id("disc_formula"),
            &disc.formula_ref,
            c,
            e,
            capacity::CAPACITY_TOL * t,
        )),
        (None, None) => {}
        _ => out.push(Check::from_bool(
            id("disc_formula"),
            &disc.formula_ref,
            false,
            f64::NAN,
            f64::NAN,
            0.0,
        )),
    }
    if ctx.ratio == 2 {
        if let (Some(c), Some(uc)) = (disc.c_hz, u.c_hz) {
            out.push(Check::relative(
                id("disc_equals_u"),
                "c_HZ(D_1N) = c_HZ(U_1N) when simply connected",
                c,
                uc,
                1e-12 * t,
            ));
        }
    }
    if d.id == "quadric_real" {
        let spec = capacity::quadric_geodesic_spectrum(d.params[0], d.params[1], 8.0);
        let shortest = spec.shortest().map(|e| e.length).unwrap_or(f64::NAN);
        out.push(Check::relative(
            id("quadric_spectrum_systole"),
            "shortest closed geodesic of S^p x S^q / Z_2",
            shortest,
            sys.systole,
            1e-9 * t,
        ));
        if let Some(c) = disc.c_hz {
            out.push(Check::relative(
                id("quadric_contractible"),
                "c_HZ(D_1 Q_pq) = shortest contractible closed geodesic",
                c,
                spec.shortest_contractible().map(|e| e.length).unwrap_or(f64::NAN),
                1e-9 * t,
            ));
        }
    }
    if let Some(scale) = capacity::rank_one_box_scale(ctx) {
        out.push(rank_one_disc_box(ctx, seed, scale));
    }
    out
}

/// `D_r N = U_r N` on rank-one spaces: disc and box membership agree on samples.
fn rank_one_disc_box(ctx: &OrbitContext, seed: u64, scale: f64) -> Check {
    let mut rng = linalg::seeded_rng(seed, 0xd15c);
    let mut agree = 0usize;
    for _ in 0..SAMPLES {
        let r = rand::Rng::random_range(&mut rng, 0.1..2.0);
        let t = DVector::from_element(1, rand::Rng::random_range(&mut rng, -2.0..2.0) * r / scale);
        let x_flat = ctx.flat.lift(&t);
        let k = ctx.random_generator(&mut rng, &ctx.space.k_basis, 1.0);
        let x = ctx.conjugate(ctx.xi(), &k, 1.0);
        let v = ctx.conjugate(&ctx.bracket(&x_flat, ctx.xi()), &k, 1.0);
        let disc = capacity::disc_contains(ctx, &x, &v, r).unwrap_or(false);
        let boxed = root_system::box_contains(&ctx.sigma_n, &t, r * scale);
        agree += (disc == boxed) as usize;
    }
    Check::exact(
        format!("capacity.rank_one_disc_box.{}", ctx.space.label()),
        "U_rN = D_rN when rk(N) = 1",
        agree as f64,
        SAMPLES as f64,
    )
}

pub fn suite_capacity(cfg: &RunConfig) -> Vec<Check> {
    let t = cfg.tol_scale;
    let mut checks = per_instance(cfg, Suite::Capacity, |ctx, seed| capacity_checks(ctx, seed, t));
    let seed = cfg.suite_seed(Suite::Capacity);
    let norm = NormalizationContext::default();
    let targets: Vec<RSpaceDescriptor> = critical_targets().into_iter().filter(|d| cfg.matches(d)).collect();
    for d in targets {
        let label = d.label();
        let check = match context_for(&d, cfg.seed).and_then(|ctx| {
            capacity::capacity_hermitian_ambient(&ctx, CRITICAL_RESTARTS, seed, &norm).map_err(|e| e.to_string())
        }) {
            Ok(r) => Check::from_bool(
                format!("capacity.hermitian_ambient.{label}"),
                &r.formula_ref,
                r.passes(),
                r.c_hz.unwrap_or(f64::NAN),
                r.c_hz.unwrap_or(f64::NAN),
                capacity::GAP_TOL * t,
            ),
            Err(e) => context_failure(Suite::Capacity, &label, &e),
        };
        checks.push(check);
    }
    checks
}

fn finsler_checks(ctx: &OrbitContext, seed: u64, t: f64) -> Vec<Check> {
    let label = ctx.space.label();
    let id = |name: &str| format!("finsler.{name}.{label}");
    let ball = finsler::unit_ball_vs_box(ctx, SAMPLES, seed);
    let f2 = finsler::f2_vs_riemannian(ctx, 50, seed, Reading::SchattenOnGVee);
    let mono = finsler::norm_monotonicity(ctx, SAMPLES, seed);
    let inv = [None, Some(1.0), Some(2.0)]
        .into_iter()
        .map(|p| finsler::invariance_residual(ctx, p, 10, seed))
        .fold(0.0, f64::max);
    let mut rng = linalg::seeded_rng(seed, 0xf5f5);
    let mut homogeneity = 0.0_f64;
    for _ in 0..20 {
        let a = ctx.flat.lift(&linalg::gaussian_vector(&mut rng, ctx.flat.dim()));
        let s = rand::Rng::random_range(&mut rng, -3.0..3.0);
        for p in [None, Some(1.0), Some(2.0)] {
            let f = FinslerNorm::new(ctx, p);
            let base = f.eval(&a);
            homogeneity = homogeneity.max((f.eval(&(&a * s)) - s.abs() * base).abs() / base);
        }
    }
    let mut out = vec![
        Check::exact(
            id("unit_ball_equals_box"),
            "F^inf(X) < 1 iff X in Box_1",
            ball.agreements as f64,
            ball.samples as f64,
        ),
        Check::at_most(
            id("f2_spread"),
            "F^2 proportional to the Riemannian norm",
            f2.spread,
            1e-8 * t,
        ),
        Check::relative(
            id("f2_constant"),
            "F^2(X)^2 / |X|^2 = r0^2 c",
            f2.constant * f2.constant,
            f2.predicted_square,
            1e-8 * t,
        ),
        Check::exact(
            id("monotonicity"),
            "F^inf <= F^p <= F^1",
            mono.ordered as f64,
            mono.samples as f64,
        ),
        Check::at_most(id("ad_h_invariance"), "F^p(Ad_h X) = F^p(X)", inv, 1e-8 * t),
        Check::at_most(id("homogeneity"), "F^p(sX) = |s| F^p(X)", homogeneity, 1e-10 * t),
    ];
    for reading in [Reading::SchattenOnK, Reading::InducedOnK] {
        let alt = finsler::f2_vs_riemannian(ctx, 50, seed, reading);
        let name = match reading {
            Reading::SchattenOnK => "f2_spread_schatten_on_k",
            _ => "f2_spread_induced_on_k",
        };
        let spread = if alt.spread.is_finite() {
            alt.spread
        } else {
            f64::INFINITY
        };
        out.push(Check::at_most(id(name), "alternative reading of ||ad_a||_2", spread, 1e-8 * t).flag_if_failed());
    }
    out
}

pub fn suite_finsler(cfg: &RunConfig) -> Vec<Check> {
    let t = cfg.tol_scale;
    per_instance(cfg, Suite::Finsler, |ctx, seed| finsler_checks(ctx, seed, t))
}

pub fn run_suite(cfg: &RunConfig, s: Suite) -> Vec<Check> {
    match s {
        Suite::Algebra => suite_algebra(cfg),
        Suite::Roots => suite_roots(cfg),
        Suite::Orbit => suite_orbit(cfg),
        Suite::Delta => suite_delta(cfg),
        Suite::Critical => suite_critical(cfg),
        Suite::Capacity => suite_capacity(cfg),
        Suite::Finsler => suite_finsler(cfg),
    }
}

pub fn build_verify_report(cfg: &RunConfig) -> Report {
    let checks = cfg.suites.iter().flat_map(|&s| run_suite(cfg, s)).collect();
    Report {
        meta: meta(cfg.seed),
        checks,
    }
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.12e}")
    } else {
        x.to_string()
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
}

pub fn render_report(r: &Report, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(r).expect("serializable") + "\n",
        Format::Csv => to_csv(&r.checks),
        Format::Text => {
            let mut s = format!("rspace-lab {} seed {}\n", r.meta.version, r.meta.seed);
            for c in &r.checks {
                let tag = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Flag => "FLAG",
                };
                s += &format!(
                    "{tag}  {:<60} computed {:>20} expected {:>20} tol {:.1e}  [{}]\n",
                    c.id,
                    num(c.computed),
                    num(c.expected),
                    c.tolerance,
                    c.paper_ref
                );
            }
            let failed = r.failures().count();
            let flagged = r.checks.iter().filter(|c| c.status == Status::Flag).count();
            s += &format!("{} checks, {} failed, {} flagged\n", r.checks.len(), failed, flagged);
            s
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AtlasDocument {
    pub meta: Meta,
    pub rows: Vec<atlas::TableRow>,
}

pub fn build_atlas(cfg: &RunConfig) -> AtlasDocument {
    let mut entries: Vec<RSpaceDescriptor> = atlas::list_entries()
        .into_iter()
        .filter(|d| cfg.space.is_none() || (d.instantiable && cfg.matches(d)))
        .collect();
    if cfg.space.is_some() && cfg.params.is_empty() {
        // An id alone selects its default parameters.
        entries.truncate(1);
    }
    let rows = entries.par_iter().map(|d| atlas::verify_row(d, cfg.seed)).collect();
    AtlasDocument {
        meta: meta(cfg.seed),
        rows,
    }
}

pub fn render_atlas(doc: &AtlasDocument, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(doc).expect("serializable") + "\n",
        Format::Csv => to_csv(&doc.rows),
        Format::Text => {
            let mut s = format!(
                "{:<4} {:<44} {:<22} {:>4} {:>6} {:>8} {:>5} {:>5}  {}\n",
                "row", "space", "name", "pi1", "table", "computed", "rk N", "rk NC", "status"
            );
            for r in &doc.rows {
                let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
                s += &format!(
                    "{:<4} {:<44} {:<22} {:>4} {:>6} {:>8} {:>5} {:>5}  {}{}\n",
                    r.table_row,
                    r.label,
                    r.name,
                    r.table_pi1.to_string(),
                    r.table_ratio,
                    r.computed_ratio.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
                    opt(r.rk_n),
                    opt(r.rk_nc),
                    if r.pass { "ok" } else { "MISMATCH" },
                    if r.note.is_empty() {
                        String::new()
                    } else {
                        format!(" ({})", r.note)
                    },
                );
            }
            s
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub space: String,
    pub sys: f64,
    pub ratio: u8,
    pub c_g_u1: f64,
    pub c_hz_u1: f64,
    pub c_hz_d1: Option<f64>,
    pub disc_case: CaseTag,
    pub normalized_pass: bool,
    pub flags: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryDocument {
    pub meta: Meta,
    pub rows: Vec<SummaryRow>,
    pub errors: Vec<String>,
}

impl SummaryDocument {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.rows.iter().all(|r| r.normalized_pass)
    }
}

pub fn build_summary(cfg: &RunConfig) -> SummaryDocument {
    let seed = cfg.suite_seed(Suite::Capacity);
    let norm = NormalizationContext::default();
    let results: Vec<Result<SummaryRow, String>> = cfg
        .instances()
        .par_iter()
        .map(|d| {
            let ctx = context_for(d, cfg.seed)?;
            let row = capacity::capacity_row(&ctx, SYSTOLE_SAMPLES, seed, &norm)
                .map_err(|e| format!("{}: {e}", d.label()))?;
            Ok(SummaryRow {
                space: row.space,
                sys: row.sys,
                ratio: row.ratio,
                c_g_u1: row.u.c_g.unwrap_or(f64::NAN),
                c_hz_u1: row.u.c_hz.unwrap_or(f64::NAN),
                c_hz_d1: row.disc.c_hz,
                disc_case: row.disc.case_tag,
                normalized_pass: row.u.passes(),
                flags: row.u.flags().join(";"),
            })
        })
        .collect();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => errors.push(e),
        }
    }
    SummaryDocument {
        meta: meta(cfg.seed),
        rows,
        errors,
    }
}

pub fn render_summary(doc: &SummaryDocument, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(doc).expect("serializable") + "\n",
        Format::Csv => to_csv(&doc.rows),
        Format::Text => {
            let over_pi = |x: f64| format!("{:.6} pi", x / PI);
            let mut s = format!(
                "{:<44} {:>13} {:>5} {:>13} {:>13} {:>13}  {}\n",
                "space", "sys", "ratio", "c_G(U_1)", "c_HZ(U_1)", "c_HZ(D_1)", "flags"
            );
            for r in &doc.rows {
                s += &format!(
                    "{:<44} {:>13} {:>5} {:>13} {:>13} {:>13}  {}\n",
                    r.space,
                    over_pi(r.sys),
                    r.ratio,
                    over_pi(r.c_g_u1),
                    over_pi(r.c_hz_u1),
                    r.c_hz_d1.map(over_pi).unwrap_or_else(|| "unknown".into()),
                    r.flags
                );
            }
            for e in &doc.errors {
                s += &format!("error: {e}\n");
            }
            s
        }
    }
}

fn emit(cfg: &RunConfig, content: &str) -> Result<(), i32> {
    let result = match &cfg.out {
        Some(path) => std::fs::write(path, content),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes()).and_then(|_| out.flush())
        }
    };
    result.map_err(|e| {
        eprintln!("rspace-lab: write failed: {e}");
        EXIT_IO
    })
}

pub fn cmd_atlas(cfg: &RunConfig) -> i32 {
    let doc = build_atlas(cfg);
    if let Err(code) = emit(cfg, &render_atlas(&doc, cfg.format)) {
        return code;
    }
    if doc.rows.iter().all(|r| r.pass) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> i32 {
    let report = build_verify_report(cfg);
    if let Err(code) = emit(cfg, &render_report(&report, cfg.format)) {
        return code;
    }
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

pub fn cmd_report(cfg: &RunConfig) -> i32 {
    let doc = build_summary(cfg);
    if let Err(code) = emit(cfg, &render_summary(&doc, cfg.format)) {
        return code;
    }
    if doc.passed() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

/// Parses arguments and dispatches; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (common, cmd): (&CommonArgs, fn(&RunConfig) -> i32) = match &cli.command {
        Command::Atlas(a) => (a, cmd_atlas),
        Command::Verify(a) => (a, cmd_verify),
        Command::Report(a) => (a, cmd_report),
    };
    match RunConfig::from_args(common) {
        Ok(cfg) => cmd(&cfg),
        Err(e) => {
            eprintln!("rspace-lab: {e}");
            EXIT_USAGE
        }
    }
}
