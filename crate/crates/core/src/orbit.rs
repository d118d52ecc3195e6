//! The adjoint orbit `O_xi` of the base element: tangent spaces, the KKS
//! form, momentum maps, the circle Hamiltonian and its critical values, the
//! divisor at infinity in flat coordinates and the momentum-image checks.
//!
//! Points and tangent vectors are coordinate vectors in `g_vee`. Pairings
//! use the calibrated form `<x,y> = -B(x,y)/c`, where `c` is fixed so that
//! the sl2-sphere of the first cascade root has Hamiltonian gap `4 pi`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::atlas::{self, AtlasError, RSpaceDescriptor, SpaceInstance};
use crate::lie_core::TOL_ALG;
use crate::linalg;
use crate::root_system::{self, AbelianSubspace, RestrictedRootSystem, RootError, StronglyOrthogonalSet};

pub const TOL_CERT: f64 = 1e-7;
const POLISH_SWITCH: f64 = 1e-4;
pub const GRAD_TOL: f64 = 1e-7;
pub const MAX_ITER: usize = 10_000;
pub const HESSIAN_STEP: f64 = 1e-4;
pub const NEGATIVE_CUTOFF: f64 = 1e-5;
pub const MERGE_FRACTION: f64 = 1e-4;
pub const DELTA_BAND: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("tangent vector is based at a different point")]
    BaseMismatch,
    #[error("point or vector is not in the real form (residual {0:e})")]
    NotOnRealForm(f64),
    #[error("restart {restart} did not converge in {iterations} iterations (gradient {gradient:e})")]
    NonConvergence {
        restart: usize,
        iterations: usize,
        gradient: f64,
    },
    #[error("fewer than two critical clusters")]
    FewerThanTwoClusters,
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error(transparent)]
    Root(#[from] RootError),
}

/// A point `a` of the orbit, with the conjugation steps that produced it.
#[derive(Debug, Clone)]
pub struct OrbitPoint {
    pub value: DVector<f64>,
    pub log: Vec<(DVector<f64>, f64)>,
}

/// A tangent vector `[base, generator]`.
#[derive(Debug, Clone)]
pub struct OrbitTangent {
    pub base: DVector<f64>,
    pub generator: DVector<f64>,
    pub vector: DVector<f64>,
}

/// A point `Ad(exp(ad_xi V)) xi` for `V` in the flat of the real form.
#[derive(Debug, Clone)]
pub struct FlatModelPoint {
    /// Coordinates of `V` in the flat `a`.
    pub v: DVector<f64>,
    /// Coordinates of `V` in the extended flat `a_bar`.
    pub v_bar: DVector<f64>,
    pub point: OrbitPoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalCluster {
    #[serde(skip)]
    pub representative: DVector<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub hessian_index: usize,
    pub population: usize,
}

/// Orbit data derived from an instance: calibration, cascade, flats and roots.
#[derive(Debug, Clone)]
pub struct OrbitContext {
    pub space: SpaceInstance,
    pub calibration: f64,
    pub cascade: StronglyOrthogonalSet,
    pub rank_n: usize,
    pub rank_nc: usize,
    pub ratio: u8,
    /// Maximal abelian subspace of `l`.
    pub flat: AbelianSubspace,
    /// Maximal abelian subspace of `p_vee` containing `flat`.
    pub flat_bar: AbelianSubspace,
    /// Roots of `g_vee` over `flat_bar`.
    pub roots_bar: RestrictedRootSystem,
    /// Roots of `g_vee` over `flat`.
    pub roots_flat: RestrictedRootSystem,
    /// `roots_flat` scaled by the rank ratio: the roots defining the box.
    pub sigma_n: RestrictedRootSystem,
    xi_frequencies: Vec<f64>,
    ad_xi: DMatrix<f64>,
}

impl OrbitContext {
    pub fn new(space: SpaceInstance, seed: u64) -> Result<OrbitContext, OrbitError> {
        let alg = &space.g_vee;
        let cascade = root_system::cascade_strongly_orthogonal(
            alg,
            &space.k_vee_basis,
            &space.p_vee_basis,
            &space.xi_coords,
            seed,
        )?;
        let t_gamma = &cascade.triples[0].h.1;
        let b = |x: &DVector<f64>, y: &DVector<f64>| alg.killing_coords(x, y);
        let xi_gamma = t_gamma * (b(&space.xi_coords, t_gamma) / b(t_gamma, t_gamma));
        let calibration = -b(&xi_gamma, &xi_gamma);
        let rd = atlas::rank_data(&space, seed)?;
        let flat = atlas::flat_of(&space, seed)?;
        let flat_bar = atlas::extended_flat(&space, &flat, seed)?;
        let roots_bar = root_system::compute_restricted_roots(alg, &flat_bar)?;
        let roots_flat = root_system::compute_restricted_roots(alg, &flat)?;
        let sigma_n = roots_flat.scaled(rd.ratio as f64);
        let ad_xi = alg.ad_of_coords(&space.xi_coords);
        let xi_frequencies = linalg::skew_frequencies(&ad_xi);
        Ok(OrbitContext {
            calibration,
            cascade,
            rank_n: rd.rk_n,
            rank_nc: rd.rk_nc,
            ratio: rd.ratio,
            flat,
            flat_bar,
            roots_bar,
            roots_flat,
            sigma_n,
            xi_frequencies,
            ad_xi,
            space,
        })
    }

    pub fn from_descriptor(d: &RSpaceDescriptor, seed: u64) -> Result<OrbitContext, OrbitError> {
        OrbitContext::new(atlas::instantiate(d)?, seed)
    }

    pub fn xi(&self) -> &DVector<f64> {
        &self.space.xi_coords
    }

    /// Calibrated pairing `-B(x,y)/c`.
    pub fn pair(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        -self.space.g_vee.killing_coords(x, y) / self.calibration
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        self.pair(x, x).max(0.0).sqrt()
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.space.g_vee.ad_of_coords(x) * y
    }

    /// `Ad(exp(t b)) a`, computed with the matrix exponential.
    pub fn conjugate(&self, a: &DVector<f64>, b: &DVector<f64>, t: f64) -> DVector<f64> {
        let alg = &self.space.g_vee;
        let e = (alg.matrix_of(b) * t).exp();
        alg.coords_of(&(&e * alg.matrix_of(a) * e.transpose()))
    }

    pub fn base_point(&self) -> OrbitPoint {
        OrbitPoint {
            value: self.xi().clone(),
            log: Vec::new(),
        }
    }

    /// Largest deviation between the ad-spectrum of `a` and that of `xi`.
    pub fn certificate_residual(&self, a: &DVector<f64>) -> f64 {
        let f = linalg::skew_frequencies(&self.space.g_vee.ad_of_coords(a));
        f.iter()
            .zip(&self.xi_frequencies)
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    }

    pub fn random_generator<R: Rng>(&self, rng: &mut R, span: &DMatrix<f64>, scale: f64) -> DVector<f64> {
        span * linalg::gaussian_vector(rng, span.ncols()) * scale
    }

    /// Element of `exp(k)` applied to `a`.
    pub fn random_k_conjugate<R: Rng>(&self, rng: &mut R, a: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let k = self.random_generator(rng, &self.space.k_basis, 1.0);
        (self.conjugate(a, &k, 1.0), k)
    }

    /// Orthonormal basis of the tangent space `[a, g]` (columns).
    pub fn tangent_basis(&self, a: &DVector<f64>) -> DMatrix<f64> {
        let ad = self.space.g_vee.ad_of_coords(a);
        let proj = -(&ad * &ad);
        let proj = (&proj + proj.transpose()) * 0.5;
        linalg::eigenspace(&proj, 1.0, 1e-6)
    }

    pub fn tangent(&self, x: &OrbitPoint, generator: DVector<f64>) -> OrbitTangent {
        let vector = self.bracket(&x.value, &generator);
        OrbitTangent {
            base: x.value.clone(),
            generator,
            vector,
        }
    }
}

/// Seeded point `Ad(exp(b)) xi` with a Gaussian generator `b` in `p_vee`.
pub fn random_orbit_point(ctx: &OrbitContext, seed: u64) -> OrbitPoint {
    let mut rng = linalg::seeded_rng(seed, 0x0b17);
    let b = ctx.random_generator(&mut rng, &ctx.space.p_vee_basis, 1.5);
    OrbitPoint {
        value: ctx.conjugate(ctx.xi(), &b, 1.0),
        log: vec![(b, 1.0)],
    }
}

fn same_base(x: &OrbitPoint, v: &OrbitTangent) -> bool {
    (&x.value - &v.base).amax() <= 1e-12 * (1.0 + x.value.amax())
}

/// `omega_x(v, w) = <x, [v, w]>`.
pub fn kks(ctx: &OrbitContext, x: &OrbitPoint, v: &OrbitTangent, w: &OrbitTangent) -> Result<f64, OrbitError> {
    if !same_base(x, v) || !same_base(x, w) {
        return Err(OrbitError::BaseMismatch);
    }
    Ok(kks_vectors(ctx, &x.value, &v.vector, &w.vector))
}

pub fn kks_vectors(ctx: &OrbitContext, x: &DVector<f64>, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
    ctx.pair(x, &ctx.bracket(v, w))
}

/// Gram matrix of the KKS form on a tangent basis at `x`.
pub fn kks_matrix(ctx: &OrbitContext, x: &DVector<f64>) -> DMatrix<f64> {
    let t = ctx.tangent_basis(x);
    let n = t.ncols();
    DMatrix::from_fn(n, n, |i, j| {
        kks_vectors(ctx, x, &t.column(i).into_owned(), &t.column(j).into_owned())
    })
}

/// Largest `|J(Jv) + v|` over a tangent basis with `J = ad_x`.
pub fn complex_structure_check(ctx: &OrbitContext, x: &OrbitPoint) -> f64 {
    let ad = ctx.space.g_vee.ad_of_coords(&x.value);
    let t = ctx.tangent_basis(&x.value);
    let jj = &ad * &ad * &t + &t;
    let proj = -(&ad * &ad);
    linalg::max_abs(&(proj * jj))
}

fn sigma_residual(ctx: &OrbitContext, y: &DVector<f64>, sign: f64) -> f64 {
    (ctx.space.sigma.apply(y) - y * sign).amax()
}

/// Momentum map of the cotangent action: `(x, v) -> [x, v]`.
pub fn moment_tn(ctx: &OrbitContext, x: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>, OrbitError> {
    let res = sigma_residual(ctx, x, -1.0).max(sigma_residual(ctx, v, -1.0));
    if res > 1e-8 * (1.0 + x.amax() + v.amax()) {
        return Err(OrbitError::NotOnRealForm(res));
    }
    Ok(ctx.bracket(x, v))
}

/// Tautological one-form at `(x, v)` evaluated on the tangent vector `(dx, dv)`.
pub fn canonical_one_form(
    ctx: &OrbitContext,
    _x: &DVector<f64>,
    v: &DVector<f64>,
    w: (&DVector<f64>, &DVector<f64>),
) -> f64 {
    ctx.pair(v, w.0)
}

/// Fundamental field of `a` at `(x, v)` on the tangent bundle.
pub fn fundamental_field_tn(
    ctx: &OrbitContext,
    a: &DVector<f64>,
    x: &DVector<f64>,
    v: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    (ctx.bracket(a, x), ctx.bracket(a, v))
}

/// Orthogonal projection to `k`: `(a + sigma a) / 2`.
pub fn moment_nc(ctx: &OrbitContext, a: &DVector<f64>) -> DVector<f64> {
    (a + ctx.space.sigma.apply(a)) * 0.5
}

/// `H(a) = -2 pi <xi, a>`; its minimum is attained at `xi`.
pub fn hamiltonian(ctx: &OrbitContext, a: &DVector<f64>) -> f64 {
    -2.0 * PI * ctx.pair(ctx.xi(), a)
}

/// Norm of the Riemannian gradient of `H`: `2 pi |[a, xi]|`.
pub fn hamiltonian_gradient_norm(ctx: &OrbitContext, a: &DVector<f64>) -> f64 {
    2.0 * PI * ctx.norm(&ctx.bracket(a, ctx.xi()))
}

/// Distance between `a` and its image under the time-one Hamiltonian flow.
pub fn period_one_residual(ctx: &OrbitContext, a: &DVector<f64>) -> f64 {
    (ctx.conjugate(a, ctx.xi(), -2.0 * PI) - a).amax()
}

/// Defect of `omega(X_H, v) = dH(v)` with `X_H = 2 pi [a, xi]`, over a tangent basis at `a`.
pub fn hamiltonian_field_residual(ctx: &OrbitContext, a: &DVector<f64>) -> f64 {
    let xh = ctx.bracket(a, ctx.xi()) * (2.0 * PI);
    let t = ctx.tangent_basis(a);
    let mut worst = 0.0_f64;
    for j in 0..t.ncols() {
        let v = t.column(j).into_owned();
        let dh = -2.0 * PI * ctx.pair(ctx.xi(), &v);
        worst = worst.max((kks_vectors(ctx, a, &xh, &v) - dh).abs());
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Objective {
    HDescent,
    HAscent,
    Commutator,
}

fn objective_value(ctx: &OrbitContext, obj: Objective, a: &DVector<f64>) -> f64 {
    match obj {
        Objective::HDescent => -ctx.xi().dot(a),
        Objective::HAscent => ctx.xi().dot(a),
        Objective::Commutator => (&ctx.ad_xi * a).norm_squared(),
    }
}

/// Frobenius gradient generator: `d f(b) = <G, b>` along `a -> Ad(exp(t b)) a`.
fn objective_gradient(ctx: &OrbitContext, obj: Objective, a: &DVector<f64>) -> DVector<f64> {
    match obj {
        Objective::HDescent => -ctx.bracket(a, ctx.xi()),
        Objective::HAscent => ctx.bracket(a, ctx.xi()),
        Objective::Commutator => {
            let pa = -(&ctx.ad_xi * (&ctx.ad_xi * a));
            ctx.bracket(a, &pa) * 2.0
        }
    }
}

struct Converged {
    point: DVector<f64>,
    iterations: usize,
    gradient: f64,
}

fn optimize<R: Rng>(ctx: &OrbitContext, start: DVector<f64>, obj: Objective, rng: &mut R) -> Converged {
    let mut a = start;
    let mut obj = obj;
    let mut step = 1.0;
    for it in 0..MAX_ITER {
        let grad_h = hamiltonian_gradient_norm(ctx, &a);
        if grad_h <= GRAD_TOL {
            return Converged {
                point: a,
                iterations: it,
                gradient: grad_h,
            };
        }
        if obj != Objective::Commutator && grad_h < POLISH_SWITCH {
            // Sufficient decrease in H drowns in rounding near a critical set.
            obj = Objective::Commutator;
            step = 1.0;
        }
        let g = objective_gradient(ctx, obj, &a);
        let g2 = g.norm_squared();
        if g2 < 1e-28 {
            // Stationary for the objective but not for H: leave the spurious set.
            let kick = ctx.random_generator(rng, &ctx.space.p_vee_basis, 1e-2);
            a = ctx.conjugate(&a, &kick, 1.0);
            continue;
        }
        let f0 = objective_value(ctx, obj, &a);
        let b = -&g;
        let mut t = step;
        let mut accepted = None;
        while t > 1e-14 {
            let cand = ctx.conjugate(&a, &b, t);
            if objective_value(ctx, obj, &cand) <= f0 - 1e-4 * t * g2 {
                accepted = Some(cand);
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some(c) => {
                a = c;
                step = (t * 2.0).min(1e3);
            }
            None => {
                let kick = ctx.random_generator(rng, &ctx.space.p_vee_basis, 1e-6);
                a = ctx.conjugate(&a, &kick, 1.0);
                step = 1.0;
            }
        }
    }
    let gradient = hamiltonian_gradient_norm(ctx, &a);
    Converged {
        point: a,
        iterations: MAX_ITER,
        gradient,
    }
}

/// Hessian of `H` at a critical point along unit tangent directions, by central differences.
pub fn hessian(ctx: &OrbitContext, a: &DVector<f64>) -> DMatrix<f64> {
    let t = ctx.tangent_basis(a);
    let n = t.ncols();
    let h0 = hamiltonian(ctx, a);
    let s = HESSIAN_STEP;
    let gens: Vec<DVector<f64>> = (0..n).map(|k| ctx.bracket(a, &t.column(k).into_owned())).collect();
    let second = |b: &DVector<f64>| {
        (hamiltonian(ctx, &ctx.conjugate(a, b, s)) + hamiltonian(ctx, &ctx.conjugate(a, b, -s)) - 2.0 * h0) / (s * s)
    };
    let mut hm = DMatrix::zeros(n, n);
    for k in 0..n {
        hm[(k, k)] = second(&gens[k]);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            let d = second(&(&gens[k] + &gens[l]));
            let v = 0.5 * (d - hm[(k, k)] - hm[(l, l)]);
            hm[(k, l)] = v;
            hm[(l, k)] = v;
        }
    }
    hm
}

pub fn hessian_index(ctx: &OrbitContext, a: &DVector<f64>) -> usize {
    let h = hessian(ctx, a);
    if h.nrows() == 0 {
        return 0;
    }
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .filter(|&&e| e < -NEGATIVE_CUTOFF)
        .count()
}

/// Critical sets of `H` from seeded restarts, merged by value.
///
/// Restarts cycle through descent and ascent of `H` and descent of
/// `|[xi, a]|^2`, whose zero set is the full critical set of `H`.
pub fn find_critical_points(
    ctx: &OrbitContext,
    restarts: usize,
    seed: u64,
) -> Result<Vec<CriticalCluster>, OrbitError> {
    let runs: Vec<(usize, Converged)> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = linalg::seeded_rng(seed, 0x1000 + i as u64);
            let start = random_orbit_point(ctx, seed.wrapping_mul(31).wrapping_add(i as u64)).value;
            let obj = match i % 3 {
                0 => Objective::Commutator,
                1 => Objective::HDescent,
                _ => Objective::HAscent,
            };
            (i, optimize(ctx, start, obj, &mut rng))
        })
        .collect();
    if let Some((i, c)) = runs.iter().find(|(_, c)| c.gradient > GRAD_TOL) {
        return Err(OrbitError::NonConvergence {
            restart: *i,
            iterations: c.iterations,
            gradient: c.gradient,
        });
    }
    let mut found: Vec<(f64, f64, DVector<f64>)> = runs
        .into_iter()
        .map(|(_, c)| (hamiltonian(ctx, &c.point), c.gradient, c.point))
        .collect();
    found.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let range = found.last().map(|l| l.0).unwrap_or(0.0) - found.first().map(|f| f.0).unwrap_or(0.0);
    let tol = (MERGE_FRACTION * range).max(1e-9);
    let mut groups: Vec<Vec<(f64, f64, DVector<f64>)>> = Vec::new();
    for item in found {
        match groups.last_mut() {
            Some(g) if (item.0 - g.last().unwrap().0).abs() <= tol => g.push(item),
            _ => groups.push(vec![item]),
        }
    }
    let clusters = groups
        .into_par_iter()
        .map(|g| {
            let population = g.len();
            let best = g
                .into_iter()
                .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                .expect("nonempty group");
            CriticalCluster {
                hessian_index: hessian_index(ctx, &best.2),
                value: best.0,
                gradient_norm: best.1,
                representative: best.2,
                population,
            }
        })
        .collect();
    Ok(clusters)
}

/// `(max - min, second lowest - min)` over cluster values.
pub fn critical_gap_report(clusters: &[CriticalCluster]) -> Result<(f64, f64), OrbitError> {
    if clusters.len() < 2 {
        return Err(OrbitError::FewerThanTwoClusters);
    }
    let mut v: Vec<f64> = clusters.iter().map(|c| c.value).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok((v[v.len() - 1] - v[0], v[1] - v[0]))
}

/// The point `Ad(exp([xi, V])) xi` for `V` with flat coordinates `v`.
pub fn flat_point(ctx: &OrbitContext, v: &DVector<f64>) -> FlatModelPoint {
    let lift = ctx.flat.lift(v);
    let gen = ctx.bracket(ctx.xi(), &lift);
    let value = ctx.conjugate(ctx.xi(), &gen, 1.0);
    FlatModelPoint {
        v: v.clone(),
        v_bar: ctx.flat_bar.basis.transpose() * &lift,
        point: OrbitPoint {
            value,
            log: vec![(gen, 1.0)],
        },
    }
}

/// Distance from `|alpha(v)|` to `pi/2 + pi Z`, minimized over the roots over `a_bar`.
pub fn delta_margin(ctx: &OrbitContext, fp: &FlatModelPoint) -> f64 {
    ctx.roots_bar
        .roots
        .iter()
        .map(|r| {
            let x = r.eval(&fp.v_bar).abs();
            let m = (x - FRAC_PI_2).rem_euclid(PI);
            m.min(PI - m)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn delta_contains(ctx: &OrbitContext, fp: &FlatModelPoint, band: f64) -> bool {
    delta_margin(ctx, fp) <= band
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CutLocusModel {
    Cp1,
    Cp1xCp1,
}

impl CutLocusModel {
    pub fn descriptor(self) -> RSpaceDescriptor {
        match self {
            CutLocusModel::Cp1 => RSpaceDescriptor::lookup("grassmann_real", &[1, 1]),
            CutLocusModel::Cp1xCp1 => RSpaceDescriptor::lookup("grassmann_complex_hermitian", &[1, 1]),
        }
        .expect("fixed parameters are valid")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CutLocusReport {
    pub model: CutLocusModel,
    pub samples: usize,
    pub constructed_on_delta: usize,
    pub flat_positive: usize,
    pub oracle_positive: usize,
    pub in_band: usize,
    pub mismatches: usize,
}

impl CutLocusReport {
    pub fn agreement(&self) -> f64 {
        let compared = self.samples - self.in_band;
        if compared == 0 {
            return 1.0;
        }
        1.0 - self.mismatches as f64 / compared as f64
    }
}

fn riemann_sphere(w: Option<Complex<f64>>) -> [f64; 3] {
    match w {
        None => [0.0, 1.0, 0.0],
        Some(w) => {
            let n = w.norm_sqr();
            [2.0 * w.re / (n + 1.0), (n - 1.0) / (n + 1.0), 2.0 * w.im / (n + 1.0)]
        }
    }
}

fn inv_conj(w: Option<Complex<f64>>, sign: f64) -> Option<Complex<f64>> {
    match w {
        None => Some(Complex::new(0.0, 0.0)),
        Some(w) if w.norm_sqr() == 0.0 => None,
        Some(w) => Some(Complex::new(sign, 0.0) / w.conj()),
    }
}

/// Chordal distance between `tau(p)` and the antipode of `p` for a point of `CP^1`.
///
/// The orbit point is read in the frame `(i s_x, i s_y, i s_z)` of `su(2)` and
/// sent to the chart in which the real form is the unit circle, so that
/// `tau(z) = 1 / conj(z)` and the antipode is `-1 / conj(z)`.
fn cp1_oracle_distance(m: &DMatrix<f64>) -> f64 {
    // Entries of the complex 2x2 matrix i(x s_x + y s_y + z s_z).
    let (z_im, x_im, y_re) = (m[(1, 0)], m[(3, 0)], m[(0, 2)]);
    let (x1, x2, x3) = (x_im, y_re, z_im);
    let r = (x1 * x1 + x2 * x2 + x3 * x3).sqrt();
    let (x1, x2, x3) = (x1 / r, x2 / r, x3 / r);
    let w = if 1.0 - x2 < 1e-15 {
        None
    } else {
        Some(Complex::new(x1, x3) / (1.0 - x2))
    };
    let a = riemann_sphere(inv_conj(w, 1.0));
    let b = riemann_sphere(inv_conj(w, -1.0));
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Relative distance from `tau(A,B) = (-B,-A)` to the cut locus of `(A,B)`.
fn cp1xcp1_oracle_distance(m: &DMatrix<f64>) -> f64 {
    let a = m.view((0, 0), (4, 4)).into_owned();
    let b = m.view((4, 4), (4, 4)).into_owned();
    (&a - &b).norm() / a.norm()
}

/// Compare the flat-coordinate predicate for the divisor at infinity with a
/// brute-force cut-locus computation in the two closed-form models.
pub fn cut_locus_oracle_check(
    model: CutLocusModel,
    samples: usize,
    seed: u64,
    band: f64,
) -> Result<CutLocusReport, OrbitError> {
    let ctx = OrbitContext::from_descriptor(&model.descriptor(), seed)?;
    let mut rng = linalg::seeded_rng(seed, 0xde17a);
    let mut report = CutLocusReport {
        model,
        samples,
        constructed_on_delta: 0,
        flat_positive: 0,
        oracle_positive: 0,
        in_band: 0,
        mismatches: 0,
    };
    let dim = ctx.flat.dim();
    let positive: Vec<&root_system::Root> = ctx.roots_bar.positive_roots().collect();
    for i in 0..samples {
        let u = linalg::unit_vector(&mut rng, dim);
        let u_bar = ctx.flat_bar.basis.transpose() * ctx.flat.lift(&u);
        let v = if i % 4 == 0 {
            let root = positive
                .iter()
                .max_by(|a, b| a.eval(&u_bar).abs().partial_cmp(&b.eval(&u_bar).abs()).unwrap())
                .expect("roots exist");
            let k = rng.random_range(0..3) as f64;
            report.constructed_on_delta += 1;
            &u * ((FRAC_PI_2 + k * PI) / root.eval(&u_bar).abs())
        } else {
            &u * rng.random_range(0.0..2.0 * PI)
        };
        let fp = flat_point(&ctx, &v);
        let (p, _) = ctx.random_k_conjugate(&mut rng, &fp.point.value);
        let margin = delta_margin(&ctx, &fp);
        let flat = margin <= band;
        let m = ctx.space.g_vee.matrix_of(&p);
        let dist = match model {
            CutLocusModel::Cp1 => cp1_oracle_distance(&m),
            CutLocusModel::Cp1xCp1 => cp1xcp1_oracle_distance(&m),
        };
        let oracle = dist <= 4.0 * band;
        report.flat_positive += flat as usize;
        report.oracle_positive += oracle as usize;
        if margin > band * 1e-2 && margin < band * 1e2 {
            report.in_band += 1;
        } else if flat != oracle {
            report.mismatches += 1;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentImageReport {
    pub space: String,
    pub r_max: f64,
    pub interior_total: usize,
    pub interior_accepted: usize,
    pub exterior_total: usize,
    pub exterior_rejected: usize,
    /// Largest spectral mismatch between `ad(mu)` and the prediction from the roots at `X`.
    pub roundtrip_residual: f64,
    /// Largest `|sigma(mu) - mu|`.
    pub k_residual: f64,
    pub flat_total: usize,
    /// Flat points whose `k`-projection lies in the closed box of radius `r_max`.
    pub flat_in_box: usize,
}

impl MomentImageReport {
    pub fn interior_rate(&self) -> f64 {
        self.interior_accepted as f64 / self.interior_total.max(1) as f64
    }

    pub fn exterior_rate(&self) -> f64 {
        self.exterior_rejected as f64 / self.exterior_total.max(1) as f64
    }
}

/// Largest frequency of `ad_m` on `g_vee` scaled by the rank ratio.
pub fn box_gauge(ctx: &OrbitContext, m: &DVector<f64>) -> f64 {
    let f = linalg::skew_frequencies(&ctx.space.g_vee.ad_of_coords(m));
    ctx.ratio as f64 * f.last().cloned().unwrap_or(0.0)
}

fn predicted_frequencies(roots: &RestrictedRootSystem, x: &DVector<f64>) -> Vec<f64> {
    let mut f = vec![0.0; roots.zero_multiplicity];
    for r in roots.positive_roots() {
        f.extend(std::iter::repeat_n(r.eval(x).abs(), 2 * r.mult));
    }
    f.sort_by(|a, b| a.partial_cmp(b).unwrap());
    f
}

/// Membership of momentum images in `Ad_K . Box_{r_max}` decided by ad-spectra.
pub fn moment_image_spectrum_check(ctx: &OrbitContext, samples: usize, seed: u64) -> MomentImageReport {
    let mut rng = linalg::seeded_rng(seed, 0x30e7);
    let r_max = ctx.ratio as f64;
    let dim = ctx.flat.dim();
    let alg = &ctx.space.g_vee;
    let mut rep = MomentImageReport {
        space: ctx.space.label(),
        r_max,
        interior_total: 0,
        interior_accepted: 0,
        exterior_total: 0,
        exterior_rejected: 0,
        roundtrip_residual: 0.0,
        k_residual: 0.0,
        flat_total: 0,
        flat_in_box: 0,
    };
    for i in 0..2 * samples {
        let interior = i % 2 == 0;
        let u = linalg::unit_vector(&mut rng, dim);
        let gauge = ctx.sigma_n.max_abs_root(&u);
        let target = if interior {
            rng.random_range(0.0..0.999) * r_max
        } else {
            rng.random_range(1.001..3.0) * r_max
        };
        let x_a = &u * (target / gauge);
        let x = ctx.flat.lift(&x_a);
        let k = ctx.random_generator(&mut rng, &ctx.space.k_basis, 1.0);
        let base = ctx.conjugate(ctx.xi(), &k, 1.0);
        let vel = ctx.conjugate(&ctx.bracket(&x, ctx.xi()), &k, 1.0);
        let mu = match moment_tn(ctx, &base, &vel) {
            Ok(m) => m,
            Err(_) => {
                rep.k_residual = f64::INFINITY;
                continue;
            }
        };
        rep.k_residual = rep.k_residual.max((ctx.space.sigma.apply(&mu) - &mu).amax());
        let spectrum = linalg::skew_frequencies(&alg.ad_of_coords(&mu));
        let predicted = predicted_frequencies(&ctx.roots_flat, &x_a);
        let rt = spectrum
            .iter()
            .zip(&predicted)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        rep.roundtrip_residual = rep.roundtrip_residual.max(rt);
        let member = box_gauge(ctx, &mu) < r_max;
        if interior {
            rep.interior_total += 1;
            rep.interior_accepted += member as usize;
        } else {
            rep.exterior_total += 1;
            rep.exterior_rejected += (!member) as usize;
        }
    }
    for _ in 0..samples {
        let v = linalg::gaussian_vector(&mut rng, dim) * 2.0;
        let fp = flat_point(ctx, &v);
        let m = moment_nc(ctx, &fp.point.value);
        rep.flat_total += 1;
        rep.flat_in_box += (box_gauge(ctx, &m) <= r_max * (1.0 + 1e-9)) as usize;
    }
    rep
}

/// Structural residuals of the orbit at a point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrbitResiduals {
    pub certificate: f64,
    pub complex_structure: f64,
    pub kks_antisymmetry: f64,
    pub kks_min_singular: f64,
    pub kks_min_compatibility: f64,
}

pub fn orbit_residuals(ctx: &OrbitContext, a: &DVector<f64>) -> OrbitResiduals {
    let om = kks_matrix(ctx, a);
    let anti = linalg::max_abs(&(&om + om.transpose()));
    let min_sv = if om.nrows() == 0 {
        0.0
    } else {
        om.clone().svd(false, false).singular_values.min()
    };
    let t = ctx.tangent_basis(a);
    let ad = ctx.space.g_vee.ad_of_coords(a);
    let compat = (0..t.ncols())
        .map(|j| {
            let v = t.column(j).into_owned();
            kks_vectors(ctx, a, &v, &(&ad * &v))
        })
        .fold(f64::INFINITY, f64::min);
    OrbitResiduals {
        certificate: ctx.certificate_residual(a),
        complex_structure: complex_structure_check(
            ctx,
            &OrbitPoint {
                value: a.clone(),
                log: vec![],
            },
        ),
        kks_antisymmetry: anti,
        kks_min_singular: min_sv,
        kks_min_compatibility: compat,
    }
}

/// Largest `|omega_x(v, w) - omega_{Ad_k x}(Ad_k v, Ad_k w)|` over a tangent basis.
pub fn kks_invariance_residual(ctx: &OrbitContext, a: &DVector<f64>, k: &DVector<f64>) -> f64 {
    let t = ctx.tangent_basis(a);
    let ak = ctx.conjugate(a, k, 1.0);
    let moved: Vec<DVector<f64>> = (0..t.ncols())
        .map(|j| ctx.conjugate(&t.column(j).into_owned(), k, 1.0))
        .collect();
    let mut worst = 0.0_f64;
    for i in 0..t.ncols() {
        for j in (i + 1)..t.ncols() {
            let before = kks_vectors(ctx, a, &t.column(i).into_owned(), &t.column(j).into_owned());
            let after = kks_vectors(ctx, &ak, &moved[i], &moved[j]);
            worst = worst.max((before - after).abs());
        }
    }
    worst
}

/// Structural sanity of the calibration: `<xi, xi>` and the first cascade sphere gap.
pub fn calibration_gap(ctx: &OrbitContext) -> f64 {
    let t = &ctx.cascade.triples[0].h.1;
    let alg = &ctx.space.g_vee;
    let xi_gamma = t * (alg.killing_coords(ctx.xi(), t) / alg.killing_coords(t, t));
    let reflected = ctx.xi() - xi_gamma * 2.0;
    hamiltonian(ctx, &reflected) - hamiltonian(ctx, ctx.xi())
}

/// Residual of `a` being fixed by the flow conjugation: used as a sanity bound in tests.
pub fn in_algebra(ctx: &OrbitContext, a: &DVector<f64>) -> bool {
    ctx.space.g_vee.membership_residual(&ctx.space.g_vee.matrix_of(a)) <= TOL_ALG
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(id: &str, params: &[usize]) -> OrbitContext {
        OrbitContext::from_descriptor(&RSpaceDescriptor::lookup(id, params).unwrap(), 11).unwrap()
    }

    #[test]
    fn cp1_calibration_is_two() {
        let c = ctx("grassmann_real", &[1, 1]);
        assert!((c.calibration - 2.0).abs() < 1e-10, "{}", c.calibration);
        assert!((calibration_gap(&c) - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn quadric_calibration_is_n() {
        for n in 2..5 {
            let c = ctx("sphere", &[n]);
            assert!((c.calibration - n as f64).abs() < 1e-9, "n={n}: {}", c.calibration);
        }
    }

    #[test]
    fn base_point_is_on_real_form_and_certified() {
        let c = ctx("sphere", &[3]);
        assert!(c.certificate_residual(c.xi()) < 1e-12);
        assert!(moment_nc(&c, c.xi()).amax() < 1e-12);
        assert!(complex_structure_check(&c, &c.base_point()) < 1e-10);
    }

    #[test]
    fn mismatched_base_is_rejected() {
        let c = ctx("grassmann_real", &[1, 1]);
        let x = c.base_point();
        let y = random_orbit_point(&c, 3);
        let v = c.tangent(&y, c.space.p_vee_basis.column(0).into_owned());
        assert!(matches!(kks(&c, &x, &v, &v), Err(OrbitError::BaseMismatch)));
    }

    #[test]
    fn zero_flat_vector_is_off_delta() {
        let c = ctx("grassmann_real", &[1, 1]);
        let fp = flat_point(&c, &DVector::zeros(c.flat.dim()));
        assert!(!delta_contains(&c, &fp, DELTA_BAND));
    }
}
