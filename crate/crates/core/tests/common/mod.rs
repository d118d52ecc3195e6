//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rspace_lab::atlas::{self, RSpaceDescriptor, SpaceInstance};
use rspace_lab::capacity::FlatGeodesics;

pub fn instance(id: &str, params: &[usize]) -> SpaceInstance {
    atlas::instantiate(&RSpaceDescriptor::lookup(id, params).unwrap()).unwrap()
}

/// `|Ad(exp X) xi - xi|` with `X` given as a matrix.
pub fn return_residual(s: &SpaceInstance, x: &DMatrix<f64>) -> f64 {
    let e = x.clone().exp();
    let xi = s.g_vee.matrix_of(&s.xi_coords);
    (&e * &xi * e.transpose() - &xi).norm()
}

/// Shortest nonzero `X` in the flat with `Ad(exp X) xi = xi`, found by a grid
/// scan over a ball followed by compass refinement of every local minimum.
/// Lengths use `|X|_N = |X|_F / sqrt(2 d)`, `d` the real dimension of the field.
pub fn scanned_systole(s: &SpaceInstance, radius: f64) -> f64 {
    let geo = FlatGeodesics::new(s, 7).unwrap();
    let basis = &geo.flat.basis;
    let r = basis.ncols();
    assert!(r <= 2, "scan implemented for rank one and two");
    let scale = (2.0 * s.g_vee.family.field_dim() as f64).sqrt();
    let frob = radius * scale;
    let steps = if r == 1 { 2000 } else { 90 };
    let h = frob / steps as f64;
    let mat = |c: &DVector<f64>| s.g_vee.matrix_of(&(basis * c));
    let f = |c: &DVector<f64>| return_residual(s, &mat(c));
    let n = 2 * steps + 1;
    let coord = |i: usize| -frob + h * i as f64;
    let point = |idx: &[usize]| DVector::from_fn(r, |k, _| coord(idx[k]));
    let grid: Vec<Vec<usize>> = if r == 1 {
        (0..n).map(|i| vec![i]).collect()
    } else {
        (0..n).flat_map(|i| (0..n).map(move |j| vec![i, j])).collect()
    };
    let values: Vec<f64> = grid.iter().map(|g| f(&point(g))).collect();
    let at = |idx: &[usize]| if r == 1 { idx[0] } else { idx[0] * n + idx[1] };
    let mut best = f64::INFINITY;
    for (g, &v) in grid.iter().zip(&values) {
        let is_min = (0..r).all(|k| {
            [-1i64, 1].iter().all(|&d| {
                let j = g[k] as i64 + d;
                if j < 0 || j >= n as i64 {
                    return true;
                }
                let mut nb = g.clone();
                nb[k] = j as usize;
                values[at(&nb)] >= v
            })
        });
        if !is_min {
            continue;
        }
        let mut c = point(g);
        if c.norm() < 2.0 * h {
            continue;
        }
        let mut fc = f(&c);
        let mut step = h;
        while step > 1e-13 {
            let mut moved = false;
            for k in 0..r {
                for sgn in [-1.0, 1.0] {
                    let mut t = c.clone();
                    t[k] += sgn * step;
                    let ft = f(&t);
                    if ft < fc {
                        c = t;
                        fc = ft;
                        moved = true;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        if fc < 1e-8 && c.norm() <= frob {
            best = best.min(c.norm() / scale);
        }
    }
    best
}

/// First `t > 0` at which the flat geodesic along `u` returns, by scanning and bisection on the residual.
pub fn scanned_period(s: &SpaceInstance, geo: &FlatGeodesics, u: &DVector<f64>, t_max: f64) -> f64 {
    let x = s.g_vee.matrix_of(&geo.flat.lift(u));
    let f = |t: f64| return_residual(s, &(&x * t));
    let n = 20_000;
    let dt = t_max / n as f64;
    let vals: Vec<f64> = (0..=n).map(|i| f(i as f64 * dt)).collect();
    for i in 1..n {
        if vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] && vals[i] < 0.05 * vals.iter().cloned().fold(0.0, f64::max)
        {
            let (mut a, mut b) = ((i - 1) as f64 * dt, (i + 1) as f64 * dt);
            for _ in 0..200 {
                let m1 = a + (b - a) / 3.0;
                let m2 = b - (b - a) / 3.0;
                if f(m1) < f(m2) {
                    b = m2;
                } else {
                    a = m1;
                }
            }
            let t = 0.5 * (a + b);
            if f(t) < 1e-8 {
                return t;
            }
        }
    }
    f64::INFINITY
}
