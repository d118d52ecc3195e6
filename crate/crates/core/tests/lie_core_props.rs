use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rspace_lab::lie_core::{build_algebra, build_sum_algebra, Family, LieAlgebraBasis};

fn frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

/// Killing form from matrix commutators and Frobenius projections only.
fn killing_oracle(alg: &LieAlgebraBasis, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let d = alg.dim();
    let ad = |z: &DMatrix<f64>| {
        DMatrix::from_fn(d, d, |k, j| {
            let bj = alg.basis_matrix(j);
            frobenius(alg.basis_matrix(k), &(z * bj - bj * z))
        })
    };
    (ad(x) * ad(y)).trace()
}

/// `Re tr(XY)` in the defining complex representation, read off the real embedding.
fn defining_trace(family: Family, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let real = (x * y).trace();
    match family {
        Family::So => real,
        Family::Su | Family::U | Family::Sp => real / 2.0,
    }
}

fn coords(dim: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-2.0..2.0_f64, dim).prop_map(DVector::from_vec)
}

const ALGEBRAS: [(Family, usize, f64); 6] = [
    (Family::So, 4, 2.0),
    (Family::So, 5, 3.0),
    (Family::Su, 2, 4.0),
    (Family::Su, 3, 6.0),
    (Family::Sp, 1, 4.0),
    (Family::Sp, 2, 6.0),
];

#[test]
fn killing_matches_trace_form_multiple() {
    for (family, n, factor) in ALGEBRAS {
        let alg = build_algebra(family, n).unwrap();
        assert_eq!(family.killing_trace_factor(n), Some(factor));
        let d = alg.dim();
        for i in 0..d {
            for j in 0..d {
                let (bi, bj) = (alg.basis_matrix(i), alg.basis_matrix(j));
                let oracle = killing_oracle(&alg, bi, bj);
                assert!(
                    (alg.killing_matrix[(i, j)] - oracle).abs() < 1e-9,
                    "{family}({n}) entry ({i},{j})"
                );
                assert!(
                    (oracle - factor * defining_trace(family, bi, bj)).abs() < 1e-9,
                    "{family}({n}) factor"
                );
            }
        }
    }
}

#[test]
fn dimensions_of_classical_algebras() {
    let cases = [
        (Family::So, 5, 10),
        (Family::Su, 3, 8),
        (Family::U, 3, 9),
        (Family::Sp, 2, 10),
    ];
    for (family, n, dim) in cases {
        assert_eq!(build_algebra(family, n).unwrap().dim(), dim);
    }
    assert_eq!(build_sum_algebra(Family::Su, 2, 2).unwrap().dim(), 6);
}

#[test]
fn unitary_killing_form_is_degenerate() {
    let alg = build_algebra(Family::U, 2).unwrap();
    let rank = alg.killing_matrix.clone().svd(false, false).rank(1e-9);
    assert_eq!(rank, alg.dim() - 1);
    assert_eq!(Family::U.killing_trace_factor(2), None);
}

#[test]
fn su3_killing_is_six_times_trace() {
    let alg = build_algebra(Family::Su, 3).unwrap();
    let x = alg.basis_matrix(0).clone();
    let y = alg.basis_matrix(3).clone() + alg.basis_matrix(0);
    let k = killing_oracle(&alg, &x, &y);
    assert!((k - 6.0 * defining_trace(Family::Su, &x, &y)).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_is_matrix_commutator(x in coords(10), y in coords(10)) {
        let alg = build_algebra(Family::Sp, 2).unwrap();
        let (mx, my) = (alg.matrix_of(&x), alg.matrix_of(&y));
        let direct = &mx * &my - &my * &mx;
        let via_coords = alg.matrix_of(&alg.bracket_coords(&x, &y));
        prop_assert!((direct - via_coords).amax() < 1e-10);
    }

    #[test]
    fn jacobi_identity_on_samples(x in coords(8), y in coords(8), z in coords(8)) {
        let alg = build_algebra(Family::Su, 3).unwrap();
        let b = |p: &DVector<f64>, q: &DVector<f64>| alg.bracket_coords(p, q);
        let total = b(&x, &b(&y, &z)) + b(&y, &b(&z, &x)) + b(&z, &b(&x, &y));
        prop_assert!(total.amax() < 1e-10);
    }

    #[test]
    fn bracket_is_antisymmetric(x in coords(10), y in coords(10)) {
        let alg = build_algebra(Family::So, 5).unwrap();
        prop_assert!((alg.bracket_coords(&x, &y) + alg.bracket_coords(&y, &x)).amax() < 1e-12);
    }

    #[test]
    fn killing_form_is_ad_invariant(x in coords(8), y in coords(8), z in coords(8)) {
        let alg = build_algebra(Family::Su, 3).unwrap();
        let lhs = alg.killing_coords(&alg.bracket_coords(&z, &x), &y);
        let rhs = alg.killing_coords(&x, &alg.bracket_coords(&z, &y));
        prop_assert!((lhs + rhs).abs() < 1e-9);
    }

    #[test]
    fn coordinates_round_trip(x in coords(10)) {
        let alg = build_algebra(Family::Sp, 2).unwrap();
        prop_assert!((alg.coords_of(&alg.matrix_of(&x)) - &x).amax() < 1e-12);
        prop_assert!(alg.membership_residual(&alg.matrix_of(&x)) < 1e-12);
    }

    #[test]
    fn killing_negative_definite_on_semisimple(x in coords(10)) {
        prop_assume!(x.norm() > 1e-3);
        let alg = build_algebra(Family::So, 5).unwrap();
        prop_assert!(alg.killing_coords(&x, &x) < 0.0);
    }
}
