//! Systoles from flat frequencies, closed-geodesic spectra of real quadrics,
//! and the capacity formulas of the unit neighbourhoods and disc bundles.
//!
//! Two systole pipelines are kept side by side. The flat pipeline measures
//! closed geodesics `t -> Ad(exp tX) xi`, `X` in the flat, with the metric
//! `<X,Y>_N = -tr_R(XY) / (2d)` (`d` the field dimension), which gives the
//! unit round sphere. The normalization pipeline uses the reference value
//! `2 pi R` tied to a generator area of `4 pi`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::atlas::{self, AtlasError, Pi1, SpaceInstance};
use crate::linalg;
use crate::orbit::{self, OrbitContext, OrbitError};
use crate::root_system::{self, RestrictedRootSystem, RootError};

pub const RATIO_DENOMINATOR_CAP: u64 = 64;
pub const RATIO_TOL: f64 = 1e-9;
pub const LATTICE_BOUND: i64 = 8;
pub const GAP_TOL: f64 = 1e-3;
/// Relative agreement required between a capacity and its predicted value.
pub const CAPACITY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CapacityError {
    #[error("no sampled direction produced a closed geodesic ({skipped} skipped for irrational ratios)")]
    IrrationalRatioCap { skipped: usize },
    #[error("critical gap {computed} disagrees with predicted {expected}")]
    GapMismatch { computed: f64, expected: f64 },
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormalizationContext {
    pub sphere_radius: f64,
    pub generator_area: f64,
    pub sys_reference: f64,
}

impl Default for NormalizationContext {
    fn default() -> Self {
        NormalizationContext {
            sphere_radius: 1.0,
            generator_area: 4.0 * PI,
            sys_reference: 2.0 * PI,
        }
    }
}

impl NormalizationContext {
    pub fn is_consistent(&self) -> bool {
        (self.sys_reference - 2.0 * PI * self.sphere_radius).abs() <= 1e-12
            && (self.generator_area - 4.0 * PI * self.sphere_radius * self.sphere_radius).abs() <= 1e-12
    }
}

/// Best rational approximation `p/q` of `x >= 0` with `q <= cap`, if it matches within `tol`.
pub fn rational_approximation(x: f64, cap: u64, tol: f64) -> Option<(u64, u64)> {
    if !(x.is_finite() && x >= 0.0) {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e15 {
            break;
        }
        let a = a as u64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > cap {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if (x - p1 as f64 / q1 as f64).abs() <= tol * x.max(1.0) {
            return Some((p1, q1));
        }
        let frac = r - a as f64;
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    if q1 > 0 && (x - p1 as f64 / q1 as f64).abs() <= tol * x.max(1.0) {
        Some((p1, q1))
    } else {
        None
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Closed geodesics through the base point along flat directions.
#[derive(Debug, Clone)]
pub struct FlatGeodesics {
    pub flat: root_system::AbelianSubspace,
    pub roots: RestrictedRootSystem,
    /// Indices of positive roots whose root space meets `xi`.
    pub active: Vec<usize>,
    /// `|X|_N` per unit of flat coordinates.
    pub speed_factor: f64,
}

impl FlatGeodesics {
    pub fn new(s: &SpaceInstance, seed: u64) -> Result<FlatGeodesics, CapacityError> {
        let flat = atlas::flat_of(s, seed)?;
        let roots = root_system::compute_restricted_roots(&s.g_vee, &flat)?;
        let xi_norm = s.xi_coords.norm();
        let active = roots
            .roots
            .iter()
            .enumerate()
            .filter(|(_, r)| r.positive && (r.space.transpose() * &s.xi_coords).norm() > 1e-8 * xi_norm)
            .map(|(i, _)| i)
            .collect();
        let d = s.g_vee.family.field_dim() as f64;
        Ok(FlatGeodesics {
            flat,
            roots,
            active,
            speed_factor: 1.0 / (2.0 * d).sqrt(),
        })
    }

    /// Closing time and length of the geodesic along flat direction `u`.
    pub fn closure(&self, u: &DVector<f64>) -> Closure {
        let freqs: Vec<f64> = self.active.iter().map(|&i| self.roots.roots[i].eval(u).abs()).collect();
        let top = freqs.iter().cloned().fold(0.0_f64, f64::max);
        if top <= 1e-12 * u.norm().max(1e-300) {
            return Closure::Stationary;
        }
        let nonzero: Vec<f64> = freqs.into_iter().filter(|&w| w > 1e-9 * top).collect();
        let w_min = nonzero.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut s = 1u64;
        for &w in &nonzero {
            match rational_approximation(w / w_min, RATIO_DENOMINATOR_CAP, RATIO_TOL) {
                Some((p, q)) => {
                    let g = gcd(p, q);
                    s = lcm(s, q / g);
                }
                None => return Closure::Irrational,
            }
        }
        let period = 2.0 * PI * s as f64 / w_min;
        Closure::Closed {
            period,
            length: period * u.norm() * self.speed_factor,
        }
    }

    /// Directions `u` with `beta_i(u) = n_i` for a fixed basis of roots and
    /// integer vectors `0 < |n|_inf <= bound`.
    pub fn lattice_directions(&self, bound: i64) -> Vec<DVector<f64>> {
        let r = self.flat.dim();
        if r == 0 {
            return Vec::new();
        }
        let mut chosen: Vec<DVector<f64>> = Vec::new();
        for root in self.roots.positive_roots() {
            let mut trial = chosen.clone();
            trial.push(root.coords.clone());
            let m = DMatrix::from_columns(&trial);
            if m.clone().svd(false, false).singular_values.min() > 1e-6 {
                chosen = trial;
            }
            if chosen.len() == r {
                break;
            }
        }
        if chosen.len() < r {
            return Vec::new();
        }
        let a = DMatrix::from_columns(&chosen).transpose();
        let inv = match a.try_inverse() {
            Some(i) => i,
            None => return Vec::new(),
        };
        let side = (2 * bound + 1) as usize;
        let total = side.pow(r as u32);
        (0..total)
            .filter_map(|mut code| {
                let n = DVector::from_fn(r, |_, _| {
                    let v = (code % side) as i64 - bound;
                    code /= side;
                    v as f64
                });
                if n.amax() == 0.0 {
                    None
                } else {
                    Some(&inv * n)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Closure {
    Stationary,
    Irrational,
    Closed { period: f64, length: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct SystoleReport {
    pub space: String,
    pub systole: f64,
    /// Flat coordinates of the minimizing direction.
    pub direction: Vec<f64>,
    pub period: f64,
    pub directions_tried: usize,
    pub skipped_irrational: usize,
    /// `|Ad(exp(T X)) xi - xi|` for the minimizer, computed with the matrix exponential.
    pub closure_residual: f64,
}

/// Shortest closed geodesic over lattice directions and `samples` random flat directions.
pub fn systole_flat(s: &SpaceInstance, samples: usize, seed: u64) -> Result<SystoleReport, CapacityError> {
    let geo = FlatGeodesics::new(s, seed)?;
    let mut dirs = geo.lattice_directions(if geo.flat.dim() > 3 { 4 } else { LATTICE_BOUND });
    let mut rng = linalg::seeded_rng(seed, 0x5a5);
    for _ in 0..samples {
        dirs.push(linalg::unit_vector(&mut rng, geo.flat.dim()));
    }
    let results: Vec<Closure> = dirs.par_iter().map(|u| geo.closure(u)).collect();
    let skipped = results.iter().filter(|c| matches!(c, Closure::Irrational)).count();
    let best = results
        .iter()
        .enumerate()
        .filter_map(|(i, c)| match c {
            Closure::Closed { period, length } => Some((i, *period, *length)),
            _ => None,
        })
        .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap().then(a.0.cmp(&b.0)));
    let (i, period, length) = best.ok_or(CapacityError::IrrationalRatioCap { skipped })?;
    let u = &dirs[i];
    let x = geo.flat.lift(u);
    let alg = &s.g_vee;
    let e = (alg.matrix_of(&x) * period).exp();
    let moved = alg.coords_of(&(&e * alg.matrix_of(&s.xi_coords) * e.transpose()));
    Ok(SystoleReport {
        space: s.label(),
        systole: length,
        direction: u.iter().cloned().collect(),
        period,
        directions_tried: dirs.len(),
        skipped_irrational: skipped,
        closure_residual: (moved - &s.xi_coords).amax(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    Ratio1,
    Ratio2,
    DiscSimplyConnected,
    DiscRp,
    DiscQuadric,
    DiscUnknown,
    HermitianAmbient,
}

/// A computed value next to its prediction.
#[derive(Debug, Clone, Serialize)]
pub struct CrossCheck {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Recorded for audit; does not decide the report status.
    pub audit_only: bool,
}

impl CrossCheck {
    fn relative(name: &str, computed: f64, expected: f64, tolerance: f64, audit_only: bool) -> CrossCheck {
        let pass = (computed - expected).abs() <= tolerance * expected.abs().max(1e-300);
        CrossCheck {
            name: name.to_string(),
            computed,
            expected,
            tolerance,
            pass,
            audit_only,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityReport {
    pub space_id: String,
    pub c_g: Option<f64>,
    pub c_hz: Option<f64>,
    pub case_tag: CaseTag,
    pub formula_ref: String,
    pub sys: Option<f64>,
    pub checks: Vec<CrossCheck>,
}

impl CapacityReport {
    /// All non-audit cross-checks pass.
    pub fn passes(&self) -> bool {
        self.checks.iter().filter(|c| !c.audit_only).all(|c| c.pass)
    }

    /// Names of audit checks that disagree.
    pub fn flags(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| c.audit_only && !c.pass)
            .map(|c| c.name.clone())
            .collect()
    }
}

/// `sys` multiplier for the unit neighbourhood by rank ratio.
pub fn u_multiplier(ratio: u8) -> f64 {
    if ratio == 2 {
        1.0
    } else {
        2.0
    }
}

/// Gromov width and Hofer-Zehnder capacity of `U_1 N`, from both systole pipelines.
///
/// The reported values use the flat systole. The normalization pipeline takes
/// `sys = 2 pi R` with `R` read off the computed generator area of the orbit.
pub fn capacities_u(ctx: &OrbitContext, sys: &SystoleReport, norm: &NormalizationContext) -> CapacityReport {
    let ratio = ctx.ratio;
    let mult = u_multiplier(ratio);
    let value = mult * sys.systole;
    let area = orbit::calibration_gap(ctx);
    let radius = (area / norm.generator_area).sqrt() * norm.sphere_radius;
    let sys_norm = norm.sys_reference * radius;
    let c_norm = mult * sys_norm;
    let checks = vec![
        CrossCheck::relative("generator_area", area, norm.generator_area, CAPACITY_TOL, false),
        CrossCheck::relative(
            "normalized_ratio_scaled",
            ratio as f64 * c_norm,
            norm.generator_area,
            CAPACITY_TOL,
            false,
        ),
        CrossCheck::relative(
            "flat_ratio_scaled",
            ratio as f64 * value,
            norm.generator_area,
            CAPACITY_TOL,
            true,
        ),
        CrossCheck::relative("flat_vs_normalized_sys", sys.systole, sys_norm, CAPACITY_TOL, true),
    ];
    CapacityReport {
        space_id: ctx.space.label(),
        c_g: Some(value),
        c_hz: Some(value),
        case_tag: if ratio == 2 { CaseTag::Ratio2 } else { CaseTag::Ratio1 },
        formula_ref: if ratio == 2 {
            "c_G(U_1N) = c_HZ(U_1N) = sys when rk(N_C) = 2 rk(N)".to_string()
        } else {
            "c_G(U_1N) = c_HZ(U_1N) = 2 sys when rk(N_C) = rk(N)".to_string()
        },
        sys: Some(sys.systole),
        checks,
    }
}

/// Which disc-bundle formula applies to a descriptor.
pub fn disc_case(s: &SpaceInstance) -> CaseTag {
    let d = &s.descriptor;
    if d.id == "grassmann_real" && d.params.first() == Some(&1) {
        CaseTag::DiscRp
    } else if d.table_pi1 == Pi1::Trivial {
        CaseTag::DiscSimplyConnected
    } else if d.id == "quadric_real" {
        CaseTag::DiscQuadric
    } else {
        CaseTag::DiscUnknown
    }
}

/// Hofer-Zehnder capacity of the unit disc bundle `D_1 N`.
pub fn chz_disc(s: &SpaceInstance, sys: &SystoleReport) -> CapacityReport {
    let case = disc_case(s);
    let (factor, formula) = match case {
        CaseTag::DiscSimplyConnected => (Some(1.0), "c_HZ(D_1N) = sys for simply connected N"),
        CaseTag::DiscRp => (Some(2.0), "c_HZ(D_1 RP^n) = 2 sys"),
        CaseTag::DiscQuadric => (Some(2.0_f64.sqrt()), "c_HZ(D_1 Q_pq(R)) = sqrt(2) sys"),
        _ => (None, "no formula for this non-simply-connected space"),
    };
    CapacityReport {
        space_id: s.label(),
        c_g: None,
        c_hz: factor.map(|f| f * sys.systole),
        case_tag: case,
        formula_ref: formula.to_string(),
        sys: Some(sys.systole),
        checks: Vec::new(),
    }
}

/// Capacities of the Hermitian ambient `N_C`, cross-checked against the critical values of `H`.
pub fn capacity_hermitian_ambient(
    ctx: &OrbitContext,
    restarts: usize,
    seed: u64,
    norm: &NormalizationContext,
) -> Result<CapacityReport, CapacityError> {
    let c_g = norm.generator_area;
    let c_hz = norm.generator_area * ctx.rank_nc as f64;
    let clusters = orbit::find_critical_points(ctx, restarts, seed)?;
    let (max_gap, smin_gap) = orbit::critical_gap_report(&clusters)?;
    for (computed, expected) in [(max_gap, c_hz), (smin_gap, c_g)] {
        if (computed - expected).abs() > GAP_TOL * expected {
            return Err(CapacityError::GapMismatch { computed, expected });
        }
    }
    Ok(CapacityReport {
        space_id: ctx.space.label(),
        c_g: Some(c_g),
        c_hz: Some(c_hz),
        case_tag: CaseTag::HermitianAmbient,
        formula_ref: "c_G(N_C) = 4 pi, c_HZ(N_C) = 4 pi rk(N_C)".to_string(),
        sys: None,
        checks: vec![
            CrossCheck::relative("max_minus_min", max_gap, c_hz, GAP_TOL, false),
            CrossCheck::relative("second_minus_min", smin_gap, c_g, GAP_TOL, false),
        ],
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GeodesicEntry {
    pub length: f64,
    pub contractible: bool,
    pub description: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeodesicSpectrum {
    pub entries: Vec<GeodesicEntry>,
}

impl GeodesicSpectrum {
    pub fn shortest(&self) -> Option<&GeodesicEntry> {
        self.entries.first()
    }

    pub fn shortest_contractible(&self) -> Option<&GeodesicEntry> {
        self.entries.iter().find(|e| e.contractible)
    }

    /// Distinct lengths, merged within `tol`.
    pub fn distinct_lengths(&self, tol: f64) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for e in &self.entries {
            if out.last().is_none_or(|l| e.length - l > tol) {
                out.push(e.length);
            }
        }
        out
    }
}

/// Closed geodesics of `S^p x S^q / Z_2` with unit-radius factors, up to `max_length`.
///
/// A direction with factor speeds `(|u|, |w|)` closes on the cover when both
/// angles are multiples of `2 pi`, and through the diagonal antipodal map when
/// both are odd multiples of `pi`.
pub fn quadric_geodesic_spectrum(p: usize, q: usize, max_length: f64) -> GeodesicSpectrum {
    let mut entries = Vec::new();
    let bound = (max_length / PI).ceil() as u64 + 1;
    for m in 0..=bound {
        for n in 0..=bound {
            if m == 0 && n == 0 {
                continue;
            }
            let (mf, nf) = (m as f64, n as f64);
            let trivial = 2.0 * PI * (mf * mf + nf * nf).sqrt();
            if trivial <= max_length {
                entries.push(GeodesicEntry {
                    length: trivial,
                    contractible: (p >= 2 || m == 0) && (q >= 2 || n == 0),
                    description: format!("cover loop, windings ({m},{n})"),
                });
            }
            if m % 2 == 1 && n % 2 == 1 {
                let deck = PI * (mf * mf + nf * nf).sqrt();
                if deck <= max_length {
                    entries.push(GeodesicEntry {
                        length: deck,
                        contractible: false,
                        description: format!("antipodal closure, half-turns ({m},{n})"),
                    });
                }
            }
        }
    }
    entries.sort_by(|a, b| {
        a.length
            .partial_cmp(&b.length)
            .unwrap()
            .then(a.description.cmp(&b.description))
    });
    GeodesicSpectrum { entries }
}

/// `|v|_x < r` in the calibrated metric, with `v` represented by its generator `[x, v]`.
pub fn disc_contains(ctx: &OrbitContext, x: &DVector<f64>, v: &DVector<f64>, r: f64) -> Result<bool, CapacityError> {
    let m = orbit::moment_tn(ctx, x, v)?;
    Ok(ctx.norm(&m) < r)
}

/// `max_beta |beta(X)| / |X|_cal` on a rank-one flat, the factor relating
/// disc and box radii.
pub fn rank_one_box_scale(ctx: &OrbitContext) -> Option<f64> {
    if ctx.flat.dim() != 1 {
        return None;
    }
    let u = DVector::from_element(1, 1.0);
    Some(ctx.sigma_n.max_abs_root(&u) / ctx.norm(&ctx.flat.lift(&u)))
}

/// Full capacity summary row for one space.
#[derive(Debug, Clone, Serialize)]
pub struct CapacityRow {
    pub space: String,
    pub sys: f64,
    pub ratio: u8,
    pub u: CapacityReport,
    pub disc: CapacityReport,
}

pub fn capacity_row(
    ctx: &OrbitContext,
    samples: usize,
    seed: u64,
    norm: &NormalizationContext,
) -> Result<CapacityRow, CapacityError> {
    let sys = systole_flat(&ctx.space, samples, seed)?;
    Ok(CapacityRow {
        space: ctx.space.label(),
        sys: sys.systole,
        ratio: ctx.ratio,
        u: capacities_u(ctx, &sys, norm),
        disc: chz_disc(&ctx.space, &sys),
    })
}
