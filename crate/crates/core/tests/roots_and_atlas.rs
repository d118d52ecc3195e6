use std::sync::OnceLock;

use nalgebra::DVector;
use proptest::prelude::*;
use rspace_lab::atlas::{self, Pi1, RSpaceDescriptor};
use rspace_lab::orbit::OrbitContext;
use rspace_lab::root_system::{box_contains, compute_restricted_roots, find_maximal_abelian};

fn ctx(id: &str, params: &[usize]) -> OrbitContext {
    OrbitContext::from_descriptor(&RSpaceDescriptor::lookup(id, params).unwrap(), 7).unwrap()
}

fn quadric() -> &'static OrbitContext {
    static CELL: OnceLock<OrbitContext> = OnceLock::new();
    CELL.get_or_init(|| ctx("quadric_real", &[2, 3]))
}

fn lagrangian() -> &'static OrbitContext {
    static CELL: OnceLock<OrbitContext> = OnceLock::new();
    CELL.get_or_init(|| ctx("lagrangian", &[3]))
}

/// Eigenvalues of `ad_X` on the complexification are `±i alpha(X)`, so the
/// multiset of `|alpha(X)|` with multiplicities must match the frequency spectrum.
fn eigen_oracle(c: &OrbitContext, x: &DVector<f64>) -> Vec<f64> {
    let ad = c.space.g_vee.ad_of_coords(&c.roots_flat.subspace.lift(x));
    let mut f: Vec<f64> = ad.complex_eigenvalues().iter().map(|z| z.im.abs()).collect();
    f.sort_by(|a, b| a.partial_cmp(b).unwrap());
    f
}

fn root_spectrum(c: &OrbitContext, x: &DVector<f64>) -> Vec<f64> {
    let rs = &c.roots_flat;
    let mut f: Vec<f64> = vec![0.0; rs.zero_multiplicity];
    for r in &rs.roots {
        f.extend(std::iter::repeat_n(r.eval(x).abs(), r.mult));
    }
    f.sort_by(|a, b| a.partial_cmp(b).unwrap());
    f
}

#[test]
fn table_rows_match_at_default_parameters() {
    let report = atlas::verify_table(7);
    let instantiated: Vec<_> = report.rows.iter().filter(|r| r.instantiable).collect();
    assert!(instantiated.len() >= 10);
    assert!(report.all_pass());
    for r in &instantiated {
        assert_eq!(r.computed_ratio, Some(r.table_ratio), "{}", r.label);
        assert_eq!(r.table_ratio == 2, r.table_pi1 == Pi1::Trivial, "{}", r.label);
    }
}

#[test]
fn instances_satisfy_cartan_inclusions() {
    for d in atlas::list_entries().into_iter().filter(|d| d.instantiable) {
        let s = atlas::instantiate(&d).unwrap();
        assert!(s.residuals().passes(), "{}: {:?}", d.label(), s.residuals());
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(RSpaceDescriptor::lookup("sphere", &[1, 2]).is_err());
    assert!(RSpaceDescriptor::lookup("no_such_space", &[2]).is_err());
}

#[test]
fn sphere_has_one_positive_root_and_ratio_two() {
    let c = ctx("sphere", &[3]);
    assert_eq!(c.ratio, 2);
    assert_eq!(c.rank_n, 1);
    assert_eq!(c.sigma_n.positive_roots().count(), 1);
}

#[test]
fn roots_match_eigenvalue_oracle() {
    for c in [quadric(), lagrangian()] {
        let x = DVector::from_fn(c.roots_flat.subspace.dim(), |i, _| 0.37 + 0.61 * i as f64);
        let (a, b) = (eigen_oracle(c, &x), root_spectrum(c, &x));
        assert_eq!(a.len(), b.len());
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-8, "{}: {a:?} vs {b:?}", c.space.label());
        }
    }
}

#[test]
fn cascade_has_rank_nc_elements_on_hermitian_ambients() {
    for d in atlas::list_entries()
        .into_iter()
        .filter(|d| d.instantiable && d.hermitian)
    {
        let c = OrbitContext::from_descriptor(&d, 11).unwrap();
        assert_eq!(c.cascade.len(), c.rank_nc, "{}", d.label());
        assert!(c.cascade.pairwise_strongly_orthogonal());
    }
}

#[test]
fn maximal_abelian_subspace_is_abelian_and_seed_independent_in_rank() {
    let s = atlas::instantiate(&RSpaceDescriptor::lookup("unitary_group", &[3]).unwrap()).unwrap();
    let dims: Vec<usize> = (0..4)
        .map(|seed| {
            let a = find_maximal_abelian(&s.g_vee, &s.p_vee_basis, seed).unwrap();
            assert!(a.commutation_residual(&s.g_vee) < 1e-10);
            let roots = compute_restricted_roots(&s.g_vee, &a).unwrap();
            assert!(roots.negation_closed());
            a.dim()
        })
        .collect();
    assert!(dims.windows(2).all(|w| w[0] == w[1]));
}

fn flat_vec(dim: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-2.0..2.0_f64, dim).prop_map(DVector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn killing_reconstruction_quadric(x in flat_vec(2)) {
        prop_assume!(x.norm() > 1e-3);
        let c = quadric();
        let alg = &c.space.g_vee;
        let lifted = c.roots_flat.subspace.lift(&x);
        let b = -alg.killing_coords(&lifted, &lifted);
        prop_assert!((c.roots_flat.quadratic_form(&x) - b).abs() <= 1e-6 * b);
    }

    #[test]
    fn killing_reconstruction_lagrangian(x in flat_vec(3)) {
        prop_assume!(x.norm() > 1e-3);
        let c = lagrangian();
        let lifted = c.roots_flat.subspace.lift(&x);
        let b = -c.space.g_vee.killing_coords(&lifted, &lifted);
        prop_assert!((c.roots_flat.quadratic_form(&x) - b).abs() <= 1e-6 * b);
    }

    #[test]
    fn box_is_symmetric_and_nested(x in flat_vec(3), r in 0.1..3.0_f64) {
        let roots = &lagrangian().sigma_n;
        let inside = box_contains(roots, &x, r);
        prop_assert_eq!(inside, box_contains(roots, &(-&x), r));
        if inside {
            prop_assert!(box_contains(roots, &x, 1.5 * r));
        }
        prop_assert_eq!(inside, roots.max_abs_root(&x) < r);
    }

    #[test]
    fn weyl_reflections_permute_roots(i in 0usize..6) {
        let roots = &lagrangian().roots_flat;
        let i = i % roots.roots.len();
        prop_assert!(roots.reflection_preserves(i));
    }
}

#[test]
fn sphere_model_identity_needs_identity_middle_block() {
    for n in 1..5 {
        let (s, c, d) = atlas::sphere_model_matrices(n);
        assert!((c.transpose() * &s * &c - &d).amax() < 1e-12);
        let uniform = atlas::sphere_model_uniform_c(n);
        assert!((uniform.transpose() * &s * &uniform - &d).amax() > 0.1);
    }
}
