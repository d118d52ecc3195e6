use std::f64::consts::PI;

mod common;

use common::{instance, scanned_period, scanned_systole};
use nalgebra::DVector;
use proptest::prelude::*;
use rspace_lab::atlas::{self, RSpaceDescriptor};
use rspace_lab::capacity::{self, CaseTag, Closure, FlatGeodesics, NormalizationContext};
use rspace_lab::orbit::OrbitContext;

#[test]
fn systoles_match_lattice_scan() {
    let cases: [(&str, &[usize], f64); 6] = [
        ("sphere", &[2], 2.0 * PI),
        ("sphere", &[3], 2.0 * PI),
        ("quadric_real", &[1, 2], 2f64.sqrt() * PI),
        ("quadric_real", &[2, 2], 2f64.sqrt() * PI),
        ("grassmann_real", &[1, 1], PI),
        ("grassmann_quaternionic", &[1, 1], 2f64.sqrt() * PI),
    ];
    for (id, params, expected) in cases {
        let s = instance(id, params);
        let report = capacity::systole_flat(&s, 50, 7).unwrap();
        let scanned = scanned_systole(&s, 7.0);
        assert!(
            (report.systole - expected).abs() < 1e-6,
            "{id}{params:?}: {}",
            report.systole
        );
        assert!(
            (scanned - report.systole).abs() < 1e-6,
            "{id}{params:?}: scan {scanned} vs {}",
            report.systole
        );
        assert!(report.closure_residual < 1e-8);
    }
}

#[test]
fn reported_period_is_first_return() {
    for (id, params) in [
        ("quadric_real", &[2, 3][..]),
        ("sphere", &[4][..]),
        ("unitary_group", &[2][..]),
    ] {
        let s = instance(id, params);
        let geo = FlatGeodesics::new(&s, 7).unwrap();
        let report = capacity::systole_flat(&s, 50, 7).unwrap();
        let u = DVector::from_vec(report.direction.clone());
        let t = scanned_period(&s, &geo, &u, 1.5 * report.period);
        assert!(
            (t - report.period).abs() < 1e-6 * report.period,
            "{id}: {t} vs {}",
            report.period
        );
    }
}

#[test]
fn systole_is_seed_independent() {
    let s = instance("quadric_real", &[2, 3]);
    let values: Vec<f64> = (0..5)
        .map(|seed| capacity::systole_flat(&s, 50, seed).unwrap().systole)
        .collect();
    assert!(values.iter().all(|v| (v - values[0]).abs() < 1e-6), "{values:?}");
}

/// Closed geodesics of `S^p x S^q / Z_2` found by scanning return times of
/// `(cos(at) e0 + sin(at) e1, cos(bt) f0 + sin(bt) f1)` in `R^(p+1) x R^(q+1)`.
/// Returns `(length, contractible)`; iterates of primitive loops included.
fn embedded_spectrum(p: usize, q: usize, max_len: f64) -> Vec<(f64, bool)> {
    let point = |a: f64, b: f64, t: f64| {
        let mut v = DVector::zeros(p + q + 2);
        v[0] = (a * t).cos();
        v[1] = (a * t).sin();
        v[p + 1] = (b * t).cos();
        v[p + 2] = (b * t).sin();
        v
    };
    let mut out = Vec::new();
    for m in 0..=8u32 {
        for n in 0..=8u32 {
            if (m, n) == (0, 0) || gcd(m, n) != 1 {
                continue;
            }
            let norm = ((m * m + n * n) as f64).sqrt();
            let (a, b) = (m as f64 / norm, n as f64 / norm);
            let start = point(a, b, 0.0);
            let res = |t: f64| {
                let v = point(a, b, t);
                ((&v - &start).norm(), (&v + &start).norm())
            };
            let dt = 1e-3;
            let mut t = 10.0 * dt;
            let first = loop {
                let (plus, minus) = res(t);
                if plus < 5e-3 || minus < 5e-3 {
                    let deck = minus < plus;
                    let g = |s: f64| if deck { res(s).1 } else { res(s).0 };
                    let (mut lo, mut hi) = (t - dt, t + 12.0 * dt);
                    for _ in 0..200 {
                        let m1 = lo + (hi - lo) / 3.0;
                        let m2 = hi - (hi - lo) / 3.0;
                        if g(m1) < g(m2) {
                            hi = m2;
                        } else {
                            lo = m1;
                        }
                    }
                    break (0.5 * (lo + hi), deck);
                }
                t += dt;
                if t > max_len + 1.0 {
                    break (f64::INFINITY, false);
                }
            };
            let (t1, deck) = first;
            let mut k = 1;
            while k as f64 * t1 <= max_len {
                let tk = k as f64 * t1;
                let through_deck = deck && k % 2 == 1;
                let winding_a = (a * tk / (2.0 * PI)).round() as i64;
                let winding_b = (b * tk / (2.0 * PI)).round() as i64;
                let contractible = !through_deck && (p >= 2 || winding_a == 0) && (q >= 2 || winding_b == 0);
                out.push((tk, contractible));
                k += 1;
            }
        }
    }
    out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    out
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn quadric_spectrum_matches_embedded_scan() {
    let max_len = 8.0;
    for (p, q) in [(1, 2), (2, 2), (1, 3), (2, 3)] {
        let spec = capacity::quadric_geodesic_spectrum(p, q, max_len);
        let oracle = embedded_spectrum(p, q, max_len);
        let mut lengths: Vec<f64> = oracle.iter().map(|e| e.0).collect();
        lengths.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        let distinct = spec.distinct_lengths(1e-6);
        assert_eq!(distinct.len(), lengths.len(), "({p},{q}): {distinct:?} vs {lengths:?}");
        for (x, y) in distinct.iter().zip(&lengths) {
            assert!((x - y).abs() < 1e-6, "({p},{q}): {distinct:?} vs {lengths:?}");
        }
        let shortest = spec.shortest().unwrap().length;
        assert!((shortest - oracle[0].0).abs() < 1e-6);
        let contractible = oracle.iter().find(|e| e.1).unwrap().0;
        assert!(
            (spec.shortest_contractible().unwrap().length - contractible).abs() < 1e-6,
            "({p},{q})"
        );
        assert!((contractible - 2f64.sqrt() * shortest).abs() < 1e-6);
    }
}

#[test]
fn disc_formula_dispatch() {
    let cases: [(&str, &[usize], CaseTag, Option<f64>); 5] = [
        ("sphere", &[2], CaseTag::DiscSimplyConnected, Some(1.0)),
        ("grassmann_real", &[1, 2], CaseTag::DiscRp, Some(2.0)),
        ("quadric_real", &[2, 2], CaseTag::DiscQuadric, Some(2f64.sqrt())),
        ("unitary_group", &[2], CaseTag::DiscUnknown, None),
        ("symplectic_group", &[2], CaseTag::DiscSimplyConnected, Some(1.0)),
    ];
    for (id, params, tag, factor) in cases {
        let s = instance(id, params);
        let sys = capacity::systole_flat(&s, 20, 3).unwrap();
        let r = capacity::chz_disc(&s, &sys);
        assert_eq!(r.case_tag, tag, "{id}");
        assert_eq!(r.c_hz, factor.map(|f| f * sys.systole), "{id}");
    }
}

#[test]
fn sphere_capacities_equal_systole() {
    let c = OrbitContext::from_descriptor(&RSpaceDescriptor::lookup("sphere", &[2]).unwrap(), 7).unwrap();
    let row = capacity::capacity_row(&c, 50, 7, &NormalizationContext::default()).unwrap();
    for v in [row.u.c_g, row.u.c_hz, row.disc.c_hz] {
        assert!((v.unwrap() - 2.0 * PI).abs() < 1e-6);
    }
    assert!(row.u.passes());
    assert!(row.u.flags().is_empty());
}

#[test]
fn normalized_capacity_is_four_pi_over_ratio_everywhere() {
    for d in atlas::list_entries().into_iter().filter(|d| d.instantiable) {
        let c = OrbitContext::from_descriptor(&d, 7).unwrap();
        let row = capacity::capacity_row(&c, 20, 7, &NormalizationContext::default()).unwrap();
        assert!(row.u.passes(), "{}: {:?}", d.label(), row.u.checks);
        assert_eq!(row.u.c_g, row.u.c_hz);
        assert_eq!(row.u.c_hz.unwrap(), capacity::u_multiplier(c.ratio) * row.sys);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_approximation_recovers_fractions(p in 1u64..40, q in 1u64..40) {
        let x = p as f64 / q as f64;
        let (a, b) = capacity::rational_approximation(x, 64, 1e-9).unwrap();
        prop_assert_eq!(a * q, b * p);
    }

    #[test]
    fn closure_length_is_homogeneous(seed in 0u64..1000, s in 0.2..5.0_f64) {
        let inst = instance("quadric_real", &[2, 3]);
        let geo = FlatGeodesics::new(&inst, 7).unwrap();
        let dirs = geo.lattice_directions(2);
        let u = &dirs[(seed as usize) % dirs.len()];
        match (geo.closure(u), geo.closure(&(u * s))) {
            (Closure::Closed { length: a, period: ta }, Closure::Closed { length: b, period: tb }) => {
                prop_assert!((a - b).abs() < 1e-9 * a);
                prop_assert!((ta - s * tb).abs() < 1e-9 * ta);
            }
            (x, y) => prop_assert!(false, "{:?} {:?}", x, y),
        }
    }
}
