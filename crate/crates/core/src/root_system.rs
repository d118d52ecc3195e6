//! Maximal abelian subspaces, restricted roots, the root box and the
//! strongly orthogonal cascade with its sl2-triples.
//!
//! Subspaces are matrices whose columns are orthonormal vectors in algebra
//! coordinates. A root is stored as a covector on the coordinates of its
//! abelian subspace, so `alpha(X) = coords . x`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::lie_core::LieAlgebraBasis;
use crate::linalg;

pub const TOL_ROOT: f64 = 1e-6;
pub const TOL_SL2: f64 = 1e-8;

const CENTRALIZER_TOL: f64 = 1e-8;
const MAX_ROUNDS: usize = 10;
const GENERIC_ATTEMPTS: u64 = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("ambient side is zero-dimensional")]
    EmptySide,
    #[error("centralizer iteration did not stabilize within {0} rounds")]
    MaximalityNotCertified(usize),
    #[error("eigenvalue clusters {0:e} and {1:e} are too close to separate")]
    ClusteringAmbiguous(f64, f64),
    #[error("decomposition is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("cascade stalled after {found} of {expected} roots")]
    CascadeStalled { found: usize, expected: usize },
    #[error("root space is empty")]
    RootSpaceEmpty,
}

/// A maximal abelian subspace of a Lie triple system inside an algebra.
#[derive(Debug, Clone)]
pub struct AbelianSubspace {
    /// Orthonormal basis of the ambient side (columns).
    pub side: DMatrix<f64>,
    /// Orthonormal basis of the abelian subspace (columns).
    pub basis: DMatrix<f64>,
    pub seed: u64,
}

impl AbelianSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Algebra coordinates of the element with subspace coordinates `x`.
    pub fn lift(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.basis * x
    }

    /// Largest bracket between basis vectors.
    pub fn commutation_residual(&self, alg: &LieAlgebraBasis) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim() {
            let ad = alg.ad_of_coords(&self.basis.column(i).into_owned());
            for j in (i + 1)..self.dim() {
                worst = worst.max((&ad * self.basis.column(j)).amax());
            }
        }
        worst
    }

    /// Dimension of the centralizer of the subspace inside its side.
    pub fn centralizer_dim(&self, alg: &LieAlgebraBasis) -> usize {
        centralizer_in(alg, &self.side, &self.basis).ncols()
    }
}

/// Elements of `side` commuting with every column of `set`.
pub fn centralizer_in(alg: &LieAlgebraBasis, side: &DMatrix<f64>, set: &DMatrix<f64>) -> DMatrix<f64> {
    let d = alg.dim();
    if set.ncols() == 0 {
        return side.clone();
    }
    let mut stacked = DMatrix::zeros(d * set.ncols(), side.ncols());
    for i in 0..set.ncols() {
        let ad = alg.ad_of_coords(&set.column(i).into_owned());
        stacked.view_mut((i * d, 0), (d, side.ncols())).copy_from(&(ad * side));
    }
    let kernel = linalg::null_space(&stacked, CENTRALIZER_TOL);
    if kernel.ncols() == 0 {
        return DMatrix::zeros(d, 0);
    }
    side * kernel
}

fn is_abelian(alg: &LieAlgebraBasis, basis: &DMatrix<f64>) -> bool {
    for i in 0..basis.ncols() {
        let ad = alg.ad_of_coords(&basis.column(i).into_owned());
        if (ad * basis).amax() > CENTRALIZER_TOL {
            return false;
        }
    }
    true
}

fn generic_in<R: Rng>(rng: &mut R, span: &DMatrix<f64>) -> DVector<f64> {
    let c = linalg::unit_vector(rng, span.ncols());
    span * c
}

/// Maximal abelian subspace of `side` found from a seeded generic element.
pub fn find_maximal_abelian(
    alg: &LieAlgebraBasis,
    side: &DMatrix<f64>,
    seed: u64,
) -> Result<AbelianSubspace, RootError> {
    extend_to_maximal_abelian(alg, side, &DMatrix::zeros(alg.dim(), 0), seed)
}

/// Maximal abelian subspace of `side` containing the columns of `base`.
///
/// Each round adds a generic element of the current centralizer until the
/// centralizer is itself abelian, which certifies maximality.
pub fn extend_to_maximal_abelian(
    alg: &LieAlgebraBasis,
    side: &DMatrix<f64>,
    base: &DMatrix<f64>,
    seed: u64,
) -> Result<AbelianSubspace, RootError> {
    if side.ncols() == 0 {
        return Err(RootError::EmptySide);
    }
    let mut rng = linalg::seeded_rng(seed, 0x7a11);
    let mut set: Vec<DVector<f64>> = (0..base.ncols()).map(|i| base.column(i).into_owned()).collect();
    for _ in 0..MAX_ROUNDS {
        let current = linalg::columns_to_matrix(alg.dim(), &set);
        let z = centralizer_in(alg, side, &current);
        if z.ncols() == 0 {
            return Err(RootError::MaximalityNotCertified(MAX_ROUNDS));
        }
        if is_abelian(alg, &z) {
            let basis = linalg::orthonormalize(alg.dim(), &column_vec(&z), 1e-9);
            return Ok(AbelianSubspace {
                side: side.clone(),
                basis,
                seed,
            });
        }
        set.push(generic_in(&mut rng, &z));
    }
    Err(RootError::MaximalityNotCertified(MAX_ROUNDS))
}

fn column_vec(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    (0..m.ncols()).map(|i| m.column(i).into_owned()).collect()
}

pub fn rank_of(a: &AbelianSubspace) -> usize {
    a.dim()
}

/// One restricted root with its multiplicity and real root space (for `±alpha` together).
#[derive(Debug, Clone)]
pub struct Root {
    pub coords: DVector<f64>,
    pub mult: usize,
    pub positive: bool,
    /// Orthonormal basis of the real space `(g_alpha + g_-alpha) ∩ g`, in the coordinates used for extraction.
    pub space: DMatrix<f64>,
}

impl Root {
    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.coords.dot(x)
    }
}

/// Restricted roots of an algebra (or invariant subspace) over an abelian subspace.
#[derive(Debug, Clone)]
pub struct RestrictedRootSystem {
    pub subspace: AbelianSubspace,
    pub roots: Vec<Root>,
    pub zero_multiplicity: usize,
    /// Dimension of the space the roots were extracted on.
    pub ambient_dim: usize,
    /// Factor by which the covectors were rescaled after extraction.
    pub scale: f64,
    /// Generic element of the subspace (coordinates) that fixes positivity.
    pub positivity_element: DVector<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RootJson {
    pub coords: Vec<f64>,
    pub mult: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RootSystemJson {
    pub roots: Vec<RootJson>,
    pub zero_multiplicity: usize,
    pub scale: f64,
    pub positivity_element: Vec<f64>,
    pub subspace_basis: Vec<Vec<f64>>,
}

/// Restricted roots of the whole algebra.
pub fn compute_restricted_roots(alg: &LieAlgebraBasis, a: &AbelianSubspace) -> Result<RestrictedRootSystem, RootError> {
    compute_roots_on(alg, a, &DMatrix::identity(alg.dim(), alg.dim()))
}

/// Restricted roots of the `ad_a`-invariant subspace spanned by the columns of `w`.
pub fn compute_roots_on(
    alg: &LieAlgebraBasis,
    a: &AbelianSubspace,
    w: &DMatrix<f64>,
) -> Result<RestrictedRootSystem, RootError> {
    let r = a.dim();
    let m = w.ncols();
    let restricted: Vec<DMatrix<f64>> = (0..r)
        .map(|j| w.transpose() * alg.ad_of_coords(&a.basis.column(j).into_owned()) * w)
        .collect();
    let mut stacked = DMatrix::zeros(m * r.max(1), m);
    for (j, rj) in restricted.iter().enumerate() {
        stacked.view_mut((j * m, 0), (m, m)).copy_from(rj);
    }
    let centralizer = if r == 0 {
        m
    } else {
        linalg::null_space(&stacked, CENTRALIZER_TOL).ncols()
    };
    let mut last = RootError::ClusteringAmbiguous(0.0, 0.0);
    for attempt in 0..GENERIC_ATTEMPTS {
        let mut rng = linalg::seeded_rng(a.seed, 0x2007 + attempt);
        let t = if r > 0 {
            linalg::unit_vector(&mut rng, r)
        } else {
            DVector::zeros(0)
        };
        match roots_for_element(a, w, &restricted, t) {
            Ok(rs) if rs.zero_multiplicity == centralizer => return Ok(rs),
            Ok(rs) => last = RootError::ClusteringAmbiguous(rs.zero_multiplicity as f64, centralizer as f64),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn roots_for_element(
    a: &AbelianSubspace,
    w: &DMatrix<f64>,
    restricted: &[DMatrix<f64>],
    t: DVector<f64>,
) -> Result<RestrictedRootSystem, RootError> {
    let r = a.dim();
    let m = w.ncols();
    let mut ad_t = DMatrix::zeros(m, m);
    for j in 0..r {
        ad_t += &restricted[j] * t[j];
    }
    let sym = -(&ad_t * &ad_t);
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());

    let scale_ref = eig.eigenvalues.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
    let tol = TOL_ROOT * scale_ref;
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        let v = eig.eigenvalues[i];
        match clusters.last_mut() {
            Some(c) if (v - eig.eigenvalues[*c.last().unwrap()]).abs() < tol => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    for pair in clusters.windows(2) {
        let hi = eig.eigenvalues[*pair[0].last().unwrap()];
        let lo = eig.eigenvalues[pair[1][0]];
        if (lo - hi).abs() < 10.0 * tol {
            return Err(RootError::ClusteringAmbiguous(hi, lo));
        }
    }

    let mut zero_multiplicity = 0;
    let mut roots = Vec::new();
    for c in clusters {
        let lambda = c.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / c.len() as f64;
        if lambda.abs() < tol.max(1e-9) {
            zero_multiplicity += c.len();
            continue;
        }
        if c.len() % 2 != 0 {
            return Err(RootError::ClusteringAmbiguous(lambda, lambda));
        }
        let q = linalg::columns_to_matrix(
            m,
            &c.iter()
                .map(|&i| eig.eigenvectors.column(i).into_owned())
                .collect::<Vec<_>>(),
        );
        let at = q.transpose() * &ad_t * &q;
        let at_norm2 = at.norm_squared();
        let alpha_t = lambda.sqrt();
        let coords = DVector::from_fn(r, |j, _| {
            let aj = q.transpose() * &restricted[j] * &q;
            alpha_t * aj.dot(&at) / at_norm2
        });
        let space = w * &q;
        roots.push(Root {
            coords: coords.clone(),
            mult: c.len() / 2,
            positive: true,
            space: space.clone(),
        });
        roots.push(Root {
            coords: -coords,
            mult: c.len() / 2,
            positive: false,
            space,
        });
    }
    Ok(RestrictedRootSystem {
        subspace: a.clone(),
        roots,
        zero_multiplicity,
        ambient_dim: m,
        scale: 1.0,
        positivity_element: t,
    })
}

impl RestrictedRootSystem {
    /// Copy with every covector multiplied by `s`.
    pub fn scaled(&self, s: f64) -> RestrictedRootSystem {
        let mut out = self.clone();
        for r in &mut out.roots {
            r.coords *= s;
        }
        out.scale *= s;
        out
    }

    pub fn positive_roots(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(|r| r.positive)
    }

    pub fn rank(&self) -> usize {
        self.subspace.dim()
    }

    /// Index of a root matching `coords` within `tol`.
    pub fn find(&self, coords: &DVector<f64>, tol: f64) -> Option<usize> {
        self.roots.iter().position(|r| (&r.coords - coords).amax() <= tol)
    }

    pub fn multiplicity_total(&self) -> usize {
        self.roots.iter().map(|r| r.mult).sum::<usize>() + self.zero_multiplicity
    }

    /// Largest mismatch in multiplicity between `alpha` and `-alpha`, or `None` if some negative is missing.
    pub fn negation_closed(&self) -> bool {
        self.roots.iter().all(|r| {
            self.find(&(-&r.coords), TOL_ROOT * 10.0)
                .map(|i| self.roots[i].mult == r.mult)
                .unwrap_or(false)
        })
    }

    /// `sum mult * alpha(x)^2`.
    pub fn quadratic_form(&self, x: &DVector<f64>) -> f64 {
        self.roots.iter().map(|r| r.mult as f64 * r.eval(x).powi(2)).sum()
    }

    pub fn max_abs_root(&self, x: &DVector<f64>) -> f64 {
        self.roots.iter().fold(0.0_f64, |m, r| m.max(r.eval(x).abs()))
    }

    /// Reflection of `x` in the hyperplane of `roots[i]`, using the Euclidean structure of the coordinates.
    pub fn reflect(&self, i: usize, x: &DVector<f64>) -> DVector<f64> {
        let a = &self.roots[i].coords;
        x - a * (2.0 * a.dot(x) / a.dot(a))
    }

    /// Whether the reflection `s_i` maps the root list onto itself.
    pub fn reflection_preserves(&self, i: usize) -> bool {
        self.roots.iter().all(|r| {
            let a = &self.roots[i].coords;
            let image = &r.coords - a * (2.0 * a.dot(&r.coords) / a.dot(a));
            self.find(&image, 1e-6 * (1.0 + self.scale)).is_some()
        })
    }

    pub fn to_json(&self) -> RootSystemJson {
        RootSystemJson {
            roots: self
                .roots
                .iter()
                .map(|r| RootJson {
                    coords: r.coords.iter().cloned().collect(),
                    mult: r.mult,
                })
                .collect(),
            zero_multiplicity: self.zero_multiplicity,
            scale: self.scale,
            positivity_element: self.positivity_element.iter().cloned().collect(),
            subspace_basis: (0..self.subspace.dim())
                .map(|i| self.subspace.basis.column(i).iter().cloned().collect())
                .collect(),
        }
    }
}

/// Strict membership in the root box `{ |alpha(x)| < r for all alpha }`.
pub fn box_contains(roots: &RestrictedRootSystem, x: &DVector<f64>, r: f64) -> bool {
    roots.roots.iter().all(|a| a.eval(x).abs() < r)
}

/// An sl2-triple in the complexification, each element stored as (real, imaginary) coordinates.
#[derive(Debug, Clone)]
pub struct SL2Triple {
    pub h: (DVector<f64>, DVector<f64>),
    pub x: (DVector<f64>, DVector<f64>),
    pub y: (DVector<f64>, DVector<f64>),
    pub root: DVector<f64>,
}

type Complex = (DVector<f64>, DVector<f64>);

/// Bracket of complexified elements given as (real, imaginary) coordinate pairs.
pub fn complex_bracket(alg: &LieAlgebraBasis, p: &Complex, q: &Complex) -> Complex {
    let br = |u: &DVector<f64>, v: &DVector<f64>| alg.bracket_coords(u, v);
    (br(&p.0, &q.0) - br(&p.1, &q.1), br(&p.0, &q.1) + br(&p.1, &q.0))
}

fn complex_residual(p: &Complex, q: &Complex) -> f64 {
    (&p.0 - &q.0).amax().max((&p.1 - &q.1).amax())
}

fn cscale(s: f64, p: &Complex) -> Complex {
    (&p.0 * s, &p.1 * s)
}

impl SL2Triple {
    /// Residuals of `[H,X] = 2X`, `[H,Y] = -2Y`, `[X,Y] = H`.
    pub fn residuals(&self, alg: &LieAlgebraBasis) -> [f64; 3] {
        [
            complex_residual(&complex_bracket(alg, &self.h, &self.x), &cscale(2.0, &self.x)),
            complex_residual(&complex_bracket(alg, &self.h, &self.y), &cscale(-2.0, &self.y)),
            complex_residual(&complex_bracket(alg, &self.x, &self.y), &self.h),
        ]
    }

    pub fn max_residual(&self, alg: &LieAlgebraBasis) -> f64 {
        self.residuals(alg).iter().cloned().fold(0.0, f64::max)
    }

    /// Largest bracket between any element of `self` and any element of `other`.
    pub fn cross_residual(&self, alg: &LieAlgebraBasis, other: &SL2Triple) -> f64 {
        let mine = [&self.h, &self.x, &self.y];
        let theirs = [&other.h, &other.x, &other.y];
        let mut worst = 0.0_f64;
        for p in mine {
            for q in theirs {
                let b = complex_bracket(alg, p, q);
                worst = worst.max(b.0.amax()).max(b.1.amax());
            }
        }
        worst
    }
}

/// sl2-triple of a root of a maximal torus, normalized so `gamma(H) = 2`.
pub fn build_sl2_triple(
    alg: &LieAlgebraBasis,
    roots: &RestrictedRootSystem,
    index: usize,
) -> Result<SL2Triple, RootError> {
    let root = &roots.roots[index];
    if root.space.ncols() == 0 {
        return Err(RootError::RootSpaceEmpty);
    }
    let t = roots.subspace.lift(&roots.positivity_element);
    let gamma_t = root.eval(&roots.positivity_element);
    if gamma_t.abs() < TOL_ROOT {
        return Err(RootError::RootSpaceEmpty);
    }
    let u = root.space.column(0).into_owned();
    // ad_T u = gamma(T) w fixes the orientation of the plane.
    let w = alg.bracket_coords(&t, &u) / gamma_t;
    let t_gamma = alg.bracket_coords(&u, &w);
    let coords = roots.subspace.basis.transpose() * &t_gamma;
    let gamma_of_tg = root.eval(&coords);
    if gamma_of_tg.abs() < TOL_ROOT {
        return Err(RootError::RootSpaceEmpty);
    }
    let zero = DVector::zeros(alg.dim());
    let h_im = &t_gamma * (-2.0 / gamma_of_tg);
    let y_scale = -1.0 / gamma_of_tg;
    Ok(SL2Triple {
        h: (zero.clone(), h_im),
        x: (u.clone(), -w.clone()),
        y: (&u * y_scale, &w * y_scale),
        root: root.coords.clone(),
    })
}

/// Strongly orthogonal noncompact roots and their triples.
#[derive(Debug, Clone)]
pub struct StronglyOrthogonalSet {
    pub gammas: Vec<DVector<f64>>,
    pub triples: Vec<SL2Triple>,
    /// Root system of the maximal torus used for the cascade.
    pub torus_roots: RestrictedRootSystem,
    /// Indices into `torus_roots.roots`.
    pub indices: Vec<usize>,
}

impl StronglyOrthogonalSet {
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    /// Whether `gammas[i] ± gammas[j]` avoids the root list for all `i != j`.
    pub fn pairwise_strongly_orthogonal(&self) -> bool {
        let n = self.gammas.len();
        (0..n).all(|i| (i + 1..n).all(|j| strongly_orthogonal(&self.torus_roots, &self.gammas[i], &self.gammas[j])))
    }
}

fn strongly_orthogonal(roots: &RestrictedRootSystem, a: &DVector<f64>, b: &DVector<f64>) -> bool {
    let tol = 1e-5;
    roots.find(&(a + b), tol).is_none() && roots.find(&(a - b), tol).is_none()
}

/// Residual of the Hermitian condition: `ad_Z = 0` on `k_vee` and `ad_Z^2 = -1` on `p_vee`.
pub fn hermitian_residual(alg: &LieAlgebraBasis, k_vee: &DMatrix<f64>, p_vee: &DMatrix<f64>, z: &DVector<f64>) -> f64 {
    let ad = alg.ad_of_coords(z);
    let on_k = (&ad * k_vee).amax();
    let on_p = (&ad * &ad * p_vee + p_vee).amax();
    on_k.max(on_p)
}

/// Highest-root cascade of strongly orthogonal noncompact roots.
pub fn cascade_strongly_orthogonal(
    alg: &LieAlgebraBasis,
    k_vee: &DMatrix<f64>,
    p_vee: &DMatrix<f64>,
    z: &DVector<f64>,
    seed: u64,
) -> Result<StronglyOrthogonalSet, RootError> {
    let res = hermitian_residual(alg, k_vee, p_vee, z);
    if res > 1e-8 {
        return Err(RootError::NotHermitian(res));
    }
    let zn = z.norm();
    let base = linalg::columns_to_matrix(alg.dim(), &[z / zn]);
    let torus = extend_to_maximal_abelian(alg, k_vee, &base, seed)?;
    let roots = compute_restricted_roots(alg, &torus)?;
    let z_coords = torus.basis.transpose() * z;
    let mut rng = linalg::seeded_rng(seed, 0xca5c);
    let functional = linalg::unit_vector(&mut rng, torus.dim());

    let mut candidates: Vec<usize> = roots
        .roots
        .iter()
        .enumerate()
        .filter(|(_, r)| (r.eval(&z_coords) - 1.0).abs() < 1e-6)
        .map(|(i, _)| i)
        .collect();
    let mut indices = Vec::new();
    while !candidates.is_empty() {
        let key = |i: &usize| {
            let c = &roots.roots[*i].coords;
            let rounded: Vec<i64> = c.iter().map(|v| (v * 1e6).round() as i64).collect();
            (functional.dot(c), rounded)
        };
        let best = *candidates
            .iter()
            .max_by(|a, b| {
                let (fa, ra) = key(a);
                let (fb, rb) = key(b);
                fa.partial_cmp(&fb).unwrap().then(ra.cmp(&rb))
            })
            .expect("nonempty");
        indices.push(best);
        let g = roots.roots[best].coords.clone();
        candidates.retain(|&i| {
            i != best
                && (&roots.roots[i].coords - &g).amax() > 1e-6
                && (&roots.roots[i].coords + &g).amax() > 1e-6
                && strongly_orthogonal(&roots, &roots.roots[i].coords, &g)
        });
    }
    let p_abelian = find_maximal_abelian(alg, p_vee, seed)?;
    if indices.len() != p_abelian.dim() {
        return Err(RootError::CascadeStalled {
            found: indices.len(),
            expected: p_abelian.dim(),
        });
    }
    let triples = indices
        .iter()
        .map(|&i| build_sl2_triple(alg, &roots, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StronglyOrthogonalSet {
        gammas: indices.iter().map(|&i| roots.roots[i].coords.clone()).collect(),
        triples,
        torus_roots: roots,
        indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::{build_algebra, Family, Involution};

    fn sphere_side(n: usize) -> (LieAlgebraBasis, DMatrix<f64>) {
        let alg = build_algebra(Family::So, n + 1).unwrap();
        let mut m = DMatrix::identity(n + 1, n + 1);
        m[(n, n)] = -1.0;
        let inv = Involution::from_conjugation(&alg, &m).unwrap();
        (alg, inv.minus_space)
    }

    #[test]
    fn sphere_rank_and_roots() {
        for n in 2..5 {
            let (alg, p) = sphere_side(n);
            let a = find_maximal_abelian(&alg, &p, 3).unwrap();
            assert_eq!(rank_of(&a), 1);
            let roots = compute_restricted_roots(&alg, &a).unwrap();
            assert_eq!(roots.roots.len(), 2);
            assert_eq!(roots.roots[0].mult, n - 1);
            assert!(roots.negation_closed());
            assert_eq!(roots.multiplicity_total(), alg.dim());
        }
    }

    #[test]
    fn one_dimensional_side_is_returned() {
        let alg = build_algebra(Family::So, 3).unwrap();
        let side = linalg::columns_to_matrix(3, &[DVector::from_vec(vec![0.0, 1.0, 0.0])]);
        let a = find_maximal_abelian(&alg, &side, 1).unwrap();
        assert_eq!(a.dim(), 1);
        assert!((a.basis.column(0).dot(&side.column(0)).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn box_is_strict() {
        let (alg, p) = sphere_side(2);
        let a = find_maximal_abelian(&alg, &p, 0).unwrap();
        let roots = compute_restricted_roots(&alg, &a).unwrap();
        let unit = &roots.roots[0].coords;
        let x = DVector::from_element(1, (1.0 - 1e-12) / unit[0].abs());
        assert!(box_contains(&roots, &x, 1.0));
        assert!(!box_contains(&roots, &(x * 1.5), 1.0));
        assert!(box_contains(&roots, &DVector::zeros(1), 1e-9));
    }

    #[test]
    fn su2_triple() {
        let alg = build_algebra(Family::Su, 2).unwrap();
        let full = DMatrix::identity(3, 3);
        let t = find_maximal_abelian(&alg, &full, 5).unwrap();
        let roots = compute_restricted_roots(&alg, &t).unwrap();
        let i = roots.roots.iter().position(|r| r.positive).unwrap();
        let tr = build_sl2_triple(&alg, &roots, i).unwrap();
        assert!(tr.max_residual(&alg) < TOL_SL2);
    }
}
