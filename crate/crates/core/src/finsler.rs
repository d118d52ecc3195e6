//! Invariant Finsler norms `F^p(a) = || r0 ad_a ||_p` (Schatten norms of the
//! adjoint operator on `g_vee`, scaled by the rank ratio `r0`) and their
//! comparison with the box and the calibrated Riemannian norm.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::linalg;
use crate::orbit::OrbitContext;
use crate::root_system;

/// Exponent of a Schatten norm; `None` is `p = infinity`.
pub type Exponent = Option<f64>;

fn lp(values: &[f64], p: Exponent) -> f64 {
    match p {
        None => values.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
        Some(p) => values.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FinslerNorm<'a> {
    pub ctx: &'a OrbitContext,
    pub p: Exponent,
}

impl<'a> FinslerNorm<'a> {
    pub fn new(ctx: &'a OrbitContext, p: Exponent) -> Self {
        FinslerNorm { ctx, p }
    }

    /// Norm of a generator given in `g_vee` coordinates.
    pub fn eval(&self, a: &DVector<f64>) -> f64 {
        let ad = self.ctx.space.g_vee.ad_of_coords(a);
        let sv = ad.svd(false, false).singular_values;
        self.ctx.ratio as f64 * lp(sv.as_slice(), self.p)
    }

    /// Norm of the flat element with coordinates `x`.
    pub fn eval_flat(&self, x: &DVector<f64>) -> f64 {
        self.eval(&self.ctx.flat.lift(x))
    }
}

/// Alternative readings of `||ad_a||_p`, kept as diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reading {
    SchattenOnGVee,
    SchattenOnK,
    InducedOnK,
}

/// `ad_a` restricted to `k` in the orthonormal basis `k_basis`.
fn ad_on_k(ctx: &OrbitContext, a: &DVector<f64>) -> DMatrix<f64> {
    let k = &ctx.space.k_basis;
    k.transpose() * ctx.space.g_vee.ad_of_coords(a) * k
}

/// Induced `L^p -> L^p` operator norm for `p` in `{1, 2, infinity}`.
fn induced_norm(m: &DMatrix<f64>, p: Exponent) -> f64 {
    match p {
        None => (0..m.nrows())
            .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max),
        Some(p) if (p - 1.0).abs() < 1e-12 => (0..m.ncols())
            .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max),
        _ => m.clone().svd(false, false).singular_values.max(),
    }
}

pub fn norm_under(ctx: &OrbitContext, reading: Reading, p: Exponent, a: &DVector<f64>) -> f64 {
    let r0 = ctx.ratio as f64;
    match reading {
        Reading::SchattenOnGVee => FinslerNorm::new(ctx, p).eval(a),
        Reading::SchattenOnK => r0 * lp(ad_on_k(ctx, a).svd(false, false).singular_values.as_slice(), p),
        Reading::InducedOnK => r0 * induced_norm(&ad_on_k(ctx, a), p),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BallBoxReport {
    pub space: String,
    pub samples: usize,
    pub agreements: usize,
    /// Largest `|F^inf(X) - max_beta |beta(X)||`.
    pub gauge_residual: f64,
}

impl BallBoxReport {
    pub fn rate(&self) -> f64 {
        self.agreements as f64 / self.samples.max(1) as f64
    }
}

/// `F^inf(X) < 1` against `X in Box_1` for flat samples spread around the boundary.
pub fn unit_ball_vs_box(ctx: &OrbitContext, samples: usize, seed: u64) -> BallBoxReport {
    let mut rng = linalg::seeded_rng(seed, 0xf1b0);
    let f = FinslerNorm::new(ctx, None);
    let dim = ctx.flat.dim();
    let mut agreements = 0;
    let mut gauge_residual = 0.0_f64;
    for _ in 0..samples {
        let u = linalg::unit_vector(&mut rng, dim);
        let gauge = ctx.sigma_n.max_abs_root(&u);
        let radius = rand::Rng::random_range(&mut rng, 0.0..2.0) / gauge;
        let x = u * radius;
        let fx = f.eval_flat(&x);
        gauge_residual = gauge_residual.max((fx - ctx.sigma_n.max_abs_root(&x)).abs());
        agreements += ((fx < 1.0) == root_system::box_contains(&ctx.sigma_n, &x, 1.0)) as usize;
    }
    BallBoxReport {
        space: ctx.space.label(),
        samples,
        agreements,
        gauge_residual,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProportionalityReport {
    pub space: String,
    pub reading: Reading,
    pub constant: f64,
    /// `(max - min) / mean` of `F^2(X) / |X|_cal`.
    pub spread: f64,
    /// `r0^2 c`, the predicted square of the constant.
    pub predicted_square: f64,
}

/// Ratio `F^2(X) / |X|_cal` over random flat samples.
pub fn f2_vs_riemannian(ctx: &OrbitContext, samples: usize, seed: u64, reading: Reading) -> ProportionalityReport {
    let mut rng = linalg::seeded_rng(seed, 0xf2f2);
    let ratios: Vec<f64> = (0..samples.max(2))
        .map(|_| {
            let a = ctx.flat.lift(&linalg::gaussian_vector(&mut rng, ctx.flat.dim()));
            norm_under(ctx, reading, Some(2.0), &a) / ctx.norm(&a)
        })
        .collect();
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let r0 = ctx.ratio as f64;
    ProportionalityReport {
        space: ctx.space.label(),
        reading,
        constant: mean,
        spread: if mean > 0.0 { (max - min) / mean } else { f64::INFINITY },
        predicted_square: r0 * r0 * ctx.calibration,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub space: String,
    pub samples: usize,
    /// Samples with `F^inf <= F^p <= F^1` for every tested `p`.
    pub ordered: usize,
    /// Largest `F^inf / F^1`.
    pub max_ratio: f64,
}

pub const MONOTONE_EXPONENTS: [f64; 4] = [1.0, 1.5, 2.0, 4.0];

/// Ordering of the Schatten family on random flat samples.
pub fn norm_monotonicity(ctx: &OrbitContext, samples: usize, seed: u64) -> MonotonicityReport {
    let mut rng = linalg::seeded_rng(seed, 0xf3f3);
    let mut ordered = 0;
    let mut max_ratio = 0.0_f64;
    for _ in 0..samples {
        let a = ctx.flat.lift(&linalg::gaussian_vector(&mut rng, ctx.flat.dim()));
        let sv = ctx.space.g_vee.ad_of_coords(&a).svd(false, false).singular_values;
        let mut chain: Vec<f64> = MONOTONE_EXPONENTS.iter().map(|&p| lp(sv.as_slice(), Some(p))).collect();
        chain.push(lp(sv.as_slice(), None));
        let slack = 1e-12 * chain[0];
        ordered += chain.windows(2).all(|w| w[1] <= w[0] + slack) as usize;
        if chain[0] > 0.0 {
            max_ratio = max_ratio.max(chain[chain.len() - 1] / chain[0]);
        }
    }
    MonotonicityReport {
        space: ctx.space.label(),
        samples,
        ordered,
        max_ratio,
    }
}

/// Largest `|F^p(Ad_h X) - F^p(X)|` for random `h` in `exp(h)`.
pub fn invariance_residual(ctx: &OrbitContext, p: Exponent, samples: usize, seed: u64) -> f64 {
    let mut rng = linalg::seeded_rng(seed, 0xf4f4);
    let f = FinslerNorm::new(ctx, p);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let a = ctx.flat.lift(&linalg::gaussian_vector(&mut rng, ctx.flat.dim()));
        let h = ctx.random_generator(&mut rng, &ctx.space.h_basis, 1.0);
        let moved = ctx.conjugate(&a, &h, 1.0);
        worst = worst.max((f.eval(&moved) - f.eval(&a)).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_norms_are_ordered() {
        let v = [3.0, 4.0, 0.0];
        assert!((lp(&v, Some(2.0)) - 5.0).abs() < 1e-12);
        assert_eq!(lp(&v, None), 4.0);
        assert_eq!(lp(&v, Some(1.0)), 7.0);
    }

    #[test]
    fn induced_norms_on_a_diagonal_matrix() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -3.0]));
        for p in [None, Some(1.0), Some(2.0)] {
            assert!((induced_norm(&m, p) - 3.0).abs() < 1e-12);
        }
    }
}
