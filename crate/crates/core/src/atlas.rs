//! Catalogue of symmetric R-spaces with matrix models of the ambient data
//! `(g_vee, theta, sigma, xi)`.
//!
//! `theta` is the involution with fixed algebra `k_vee` (the Hermitian pair of
//! the complexification), `sigma` the one with fixed algebra `k` (the isometry
//! algebra of the real form). `xi` spans the centre of `k_vee` and is odd
//! under `sigma`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::lie_core::{
    build_algebra, build_sum_algebra, embed_complex, embed_quaternion, quaternion_block, AlgebraElement, Family,
    Involution, LieAlgebraBasis, LieError, TOL_ALG,
};
use crate::linalg;
use crate::root_system::{self, AbelianSubspace, RootError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AtlasError {
    #[error("size out of range: {0}")]
    SizeOutOfRange(String),
    #[error("row `{0}` has no matrix model")]
    UnsupportedRow(String),
    #[error("rank ratio {rk_nc}/{rk_n} is not 1 or 2")]
    RatioNotIntegral { rk_n: usize, rk_nc: usize },
    #[error("invalid parameters for `{id}`: {params:?}")]
    InvalidParams { id: String, params: Vec<usize> },
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Root(#[from] RootError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pi1 {
    Trivial,
    Z,
    Z2,
}

impl fmt::Display for Pi1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pi1::Trivial => "0",
            Pi1::Z => "Z",
            Pi1::Z2 => "Z2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RSpaceDescriptor {
    pub id: String,
    pub params: Vec<usize>,
    pub name: String,
    pub complexification: String,
    pub table_pi1: Pi1,
    pub table_ratio: u8,
    pub hermitian: bool,
    pub table_row: String,
    pub instantiable: bool,
}

impl RSpaceDescriptor {
    fn new(id: &str, params: &[usize], name: String, complexification: String, pi1: Pi1, ratio: u8, row: &str) -> Self {
        let hermitian = id.ends_with("_hermitian");
        RSpaceDescriptor {
            id: id.to_string(),
            params: params.to_vec(),
            name,
            complexification,
            table_pi1: pi1,
            table_ratio: ratio,
            hermitian,
            table_row: row.to_string(),
            instantiable: true,
        }
    }

    fn exceptional(name: &str, complexification: &str, pi1: Pi1, ratio: u8, row: &str) -> Self {
        RSpaceDescriptor {
            id: "exceptional".to_string(),
            params: vec![],
            name: name.to_string(),
            complexification: complexification.to_string(),
            table_pi1: pi1,
            table_ratio: ratio,
            hermitian: false,
            table_row: row.to_string(),
            instantiable: false,
        }
    }

    /// Short label such as `sphere(3)`.
    pub fn label(&self) -> String {
        if !self.instantiable {
            return self.name.clone();
        }
        let p: Vec<String> = self.params.iter().map(|x| x.to_string()).collect();
        format!("{}({})", self.id, p.join(","))
    }

    /// Descriptor for an id and parameter list, with table data attached.
    pub fn lookup(id: &str, params: &[usize]) -> Result<RSpaceDescriptor, AtlasError> {
        let bad = || AtlasError::InvalidParams {
            id: id.to_string(),
            params: params.to_vec(),
        };
        let one = |ps: &[usize]| if ps.len() == 1 { Ok(ps[0]) } else { Err(bad()) };
        let two = |ps: &[usize]| if ps.len() == 2 { Ok((ps[0], ps[1])) } else { Err(bad()) };
        let d = match id {
            "grassmann_real" => {
                let (p, q) = two(params)?;
                if p == 0 || q < p {
                    return Err(bad());
                }
                let (pi1, row) = match (p, q) {
                    (1, 1) => (Pi1::Z, "1a"),
                    (1, _) => (Pi1::Z2, "1"),
                    _ => (Pi1::Z2, "1b"),
                };
                let name = if p == 1 {
                    format!("RP^{q}")
                } else {
                    format!("Gr_R({p},{})", p + q)
                };
                Self::new(id, params, name, format!("Gr_C({p},{})", p + q), pi1, 1, row)
            }
            "grassmann_quaternionic" => {
                let (p, q) = two(params)?;
                if p == 0 || q < p {
                    return Err(bad());
                }
                let cx = format!("Gr_C({},{})", 2 * p, 2 * p + 2 * q);
                Self::new(id, params, format!("Gr_H({p},{})", p + q), cx, Pi1::Trivial, 2, "2")
            }
            "unitary_group" => {
                let n = one(params)?;
                if n < 2 {
                    return Err(bad());
                }
                Self::new(
                    id,
                    params,
                    format!("U({n})"),
                    format!("Gr_C({n},{})", 2 * n),
                    Pi1::Z,
                    1,
                    "3",
                )
            }
            "orthogonal_group" => {
                let n = one(params)?;
                if n < 5 {
                    return Err(bad());
                }
                Self::new(
                    id,
                    params,
                    format!("SO({n})"),
                    format!("SO({})/U({n})", 2 * n),
                    Pi1::Z2,
                    1,
                    "4",
                )
            }
            "unitary_quaternionic" => {
                let n = one(params)?;
                if n < 3 {
                    return Err(bad());
                }
                let cx = format!("SO({})/U({})", 4 * n, 2 * n);
                Self::new(id, params, format!("U({})/Sp({n})", 2 * n), cx, Pi1::Z, 1, "5")
            }
            "symplectic_group" => {
                let n = one(params)?;
                if n < 2 {
                    return Err(bad());
                }
                let cx = format!("Sp({})/U({})", 2 * n, 2 * n);
                Self::new(id, params, format!("Sp({n})"), cx, Pi1::Trivial, 2, "6")
            }
            "lagrangian" => {
                let n = one(params)?;
                if n < 3 {
                    return Err(bad());
                }
                Self::new(
                    id,
                    params,
                    format!("U({n})/O({n})"),
                    format!("Sp({n})/U({n})"),
                    Pi1::Z,
                    1,
                    "7",
                )
            }
            "sphere" => {
                let n = one(params)?;
                if n < 2 {
                    return Err(bad());
                }
                Self::new(id, params, format!("S^{n}"), format!("Q_{n}(C)"), Pi1::Trivial, 2, "8a")
            }
            "quadric_real" => {
                let (p, q) = two(params)?;
                if p == 0 || q < 2 || (p > 1 && q < p) {
                    return Err(bad());
                }
                let (pi1, row) = if p == 1 { (Pi1::Z, "8b") } else { (Pi1::Z2, "8c") };
                let cx = format!("Q_{}(C)", p + q);
                Self::new(id, params, format!("Q_{{{p},{q}}}(R)"), cx, pi1, 1, row)
            }
            "grassmann_complex_hermitian" => {
                let (p, q) = two(params)?;
                if p == 0 || q < p {
                    return Err(bad());
                }
                let name = format!("Gr_C({p},{})", p + q);
                let cx = format!("{name} x {name}");
                Self::new(id, params, name, cx, Pi1::Trivial, 2, "H1")
            }
            "orthogonal_complex_structures_hermitian" => {
                let n = one(params)?;
                if n < 2 {
                    return Err(bad());
                }
                let name = format!("SO({})/U({n})", 2 * n);
                Self::new(
                    id,
                    params,
                    name.clone(),
                    format!("{name} x {name}"),
                    Pi1::Trivial,
                    2,
                    "H2",
                )
            }
            "symplectic_complex_structures_hermitian" => {
                let n = one(params)?;
                if n < 1 {
                    return Err(bad());
                }
                let name = format!("Sp({n})/U({n})");
                Self::new(
                    id,
                    params,
                    name.clone(),
                    format!("{name} x {name}"),
                    Pi1::Trivial,
                    2,
                    "H3",
                )
            }
            "quadric_complex_hermitian" => {
                let n = one(params)?;
                if n < 1 {
                    return Err(bad());
                }
                let name = format!("Q_{n}(C)");
                Self::new(
                    id,
                    params,
                    name.clone(),
                    format!("{name} x {name}"),
                    Pi1::Trivial,
                    2,
                    "H4",
                )
            }
            other => return Err(AtlasError::UnsupportedRow(other.to_string())),
        };
        Ok(d)
    }
}

/// All catalogue entries at the default small parameters.
pub fn list_entries() -> Vec<RSpaceDescriptor> {
    let rows: &[(&str, &[usize])] = &[
        ("grassmann_real", &[1, 1]),
        ("grassmann_real", &[1, 2]),
        ("grassmann_real", &[2, 2]),
        ("grassmann_real", &[2, 3]),
        ("grassmann_quaternionic", &[1, 1]),
        ("grassmann_quaternionic", &[1, 2]),
        ("unitary_group", &[2]),
        ("unitary_group", &[3]),
        ("orthogonal_group", &[5]),
        ("unitary_quaternionic", &[3]),
        ("symplectic_group", &[2]),
        ("lagrangian", &[3]),
        ("sphere", &[2]),
        ("sphere", &[3]),
        ("sphere", &[4]),
        ("sphere", &[5]),
        ("quadric_real", &[1, 2]),
        ("quadric_real", &[1, 3]),
        ("quadric_real", &[2, 2]),
        ("quadric_real", &[2, 3]),
        ("grassmann_complex_hermitian", &[1, 1]),
        ("grassmann_complex_hermitian", &[1, 2]),
        ("orthogonal_complex_structures_hermitian", &[3]),
        ("symplectic_complex_structures_hermitian", &[2]),
        ("quadric_complex_hermitian", &[3]),
    ];
    let mut out: Vec<RSpaceDescriptor> = rows
        .iter()
        .map(|(id, ps)| RSpaceDescriptor::lookup(id, ps).expect("default parameters are valid"))
        .collect();
    out.push(RSpaceDescriptor::exceptional(
        "Gr_H(2,4)/Z2",
        "E6/U(1)xSpin(10)",
        Pi1::Z2,
        1,
        "9",
    ));
    out.push(RSpaceDescriptor::exceptional(
        "OP^2",
        "E6/U(1)xSpin(10)",
        Pi1::Trivial,
        2,
        "10",
    ));
    out.push(RSpaceDescriptor::exceptional(
        "SU(8)/Sp(4).Z2",
        "E7/U(1)xE6",
        Pi1::Z2,
        1,
        "11",
    ));
    out.push(RSpaceDescriptor::exceptional(
        "U(1)xE6/F4",
        "E7/U(1)xE6",
        Pi1::Z,
        1,
        "12",
    ));
    out.push(RSpaceDescriptor::exceptional("(C x O)P^2", "", Pi1::Trivial, 2, "H5"));
    out.push(RSpaceDescriptor::exceptional("E7/E6xSO(2)", "", Pi1::Trivial, 2, "H6"));
    out
}

/// An instantiated catalogue entry.
#[derive(Debug, Clone)]
pub struct SpaceInstance {
    pub descriptor: RSpaceDescriptor,
    pub g_vee: LieAlgebraBasis,
    pub theta: Involution,
    pub sigma: Involution,
    pub xi: AlgebraElement,
    pub xi_coords: DVector<f64>,
    /// Fixed algebra of `sigma`.
    pub k_basis: DMatrix<f64>,
    /// `-1` space of `sigma`.
    pub p_basis: DMatrix<f64>,
    /// Fixed algebra of `theta`.
    pub k_vee_basis: DMatrix<f64>,
    /// `-1` space of `theta`.
    pub p_vee_basis: DMatrix<f64>,
    /// `k ∩ k_vee`.
    pub h_basis: DMatrix<f64>,
    /// `k ∩ p_vee`.
    pub l_basis: DMatrix<f64>,
    /// `l ∩ [k, k]`, the alternative with the centre of `k` removed.
    pub l_derived_basis: DMatrix<f64>,
}

fn intersect(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.nrows();
    if a.ncols() == 0 || b.ncols() == 0 {
        return DMatrix::zeros(d, 0);
    }
    let pa = a * a.transpose();
    let pb = b * b.transpose();
    let prod = &pa * &pb;
    let sym = (&prod + prod.transpose()) * 0.5;
    linalg::eigenspace(&sym, 1.0, 1e-6)
}

/// Orthonormal basis of `[k, k]` for `k` spanned by the columns.
pub fn derived_subalgebra(alg: &LieAlgebraBasis, k: &DMatrix<f64>) -> DMatrix<f64> {
    let mut vecs = Vec::new();
    for i in 0..k.ncols() {
        let ad = alg.ad_of_coords(&k.column(i).into_owned());
        let img = ad * k;
        for j in (i + 1)..k.ncols() {
            vecs.push(img.column(j).into_owned());
        }
    }
    let m = linalg::columns_to_matrix(alg.dim(), &vecs);
    if m.ncols() == 0 {
        return DMatrix::zeros(alg.dim(), 0);
    }
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let cols: Vec<DVector<f64>> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-9 * smax.max(1.0))
        .map(|i| u.column(i).into_owned())
        .collect();
    linalg::orthonormalize(alg.dim(), &cols, 1e-9)
}

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_row_slice(v))
}

/// `[[0,-1],[1,0]]` in `n x n` blocks.
fn j0(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, n + i)] = -1.0;
        m[(n + i, i)] = 1.0;
    }
    m
}

fn pm(p: usize, q: usize) -> Vec<f64> {
    let mut v = vec![1.0; p];
    v.extend(std::iter::repeat_n(-1.0, q));
    v
}

fn complex_real(m: &DMatrix<f64>) -> DMatrix<f64> {
    embed_complex(m, &DMatrix::zeros(m.nrows(), m.ncols()))
}

fn complex_imag(m: &DMatrix<f64>) -> DMatrix<f64> {
    embed_complex(&DMatrix::zeros(m.nrows(), m.ncols()), m)
}

/// Complex conjugation on `C^n` as a real `2n x 2n` matrix.
fn conjugation(n: usize) -> DMatrix<f64> {
    let v: Vec<f64> = (0..2 * n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    diag(&v)
}

fn quaternion_real(m: &DMatrix<f64>) -> DMatrix<f64> {
    let z = DMatrix::zeros(m.nrows(), m.ncols());
    embed_quaternion([m, &z, &z, &z])
}

/// Block diagonal of `n` copies of left multiplication by a unit imaginary quaternion.
fn quaternion_unit_diag(n: usize, which: usize) -> DMatrix<f64> {
    let mut c = [0.0; 4];
    c[which] = 1.0;
    let b = quaternion_block(c[0], c[1], c[2], c[3]);
    let mut m = DMatrix::zeros(4 * n, 4 * n);
    for i in 0..n {
        m.view_mut((4 * i, 4 * i), (4, 4)).copy_from(&b);
    }
    m
}

fn so_rotation(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    m[(1, 0)] = 1.0;
    m[(0, 1)] = -1.0;
    m
}

/// `i diag((q/n) 1_p, -(p/n) 1_q)` embedded, with `p, q` counted in complex entries.
fn grading_element(p: usize, q: usize) -> DMatrix<f64> {
    let n = (p + q) as f64;
    let mut v = vec![q as f64 / n; p];
    v.extend(std::iter::repeat_n(-(p as f64) / n, q));
    complex_imag(&diag(&v))
}

struct Model {
    alg: LieAlgebraBasis,
    theta: DMatrix<f64>,
    sigma: DMatrix<f64>,
    xi: DMatrix<f64>,
}

/// Hermitian data `(algebra, theta_N, Z)` used for the doubled ambients.
fn hermitian_factor(d: &RSpaceDescriptor) -> Result<(Family, usize, DMatrix<f64>, DMatrix<f64>), AtlasError> {
    let ps = &d.params;
    Ok(match d.id.as_str() {
        "grassmann_complex_hermitian" => {
            let (p, q) = (ps[0], ps[1]);
            (Family::Su, p + q, complex_real(&diag(&pm(p, q))), grading_element(p, q))
        }
        "orthogonal_complex_structures_hermitian" => {
            let n = ps[0];
            (Family::So, 2 * n, j0(n), j0(n) * 0.5)
        }
        "symplectic_complex_structures_hermitian" => {
            let n = ps[0];
            let j = quaternion_unit_diag(n, 1);
            (Family::Sp, n, j.clone(), j * 0.5)
        }
        "quadric_complex_hermitian" => {
            let n = ps[0];
            let mut t = vec![-1.0, -1.0];
            t.extend(std::iter::repeat_n(1.0, n));
            (Family::So, n + 2, diag(&t), so_rotation(n + 2))
        }
        other => return Err(AtlasError::UnsupportedRow(other.to_string())),
    })
}

fn lie_size(e: LieError) -> AtlasError {
    match e {
        LieError::SizeOutOfRange { .. } => AtlasError::SizeOutOfRange(e.to_string()),
        other => AtlasError::Lie(other),
    }
}

fn build_model(d: &RSpaceDescriptor) -> Result<Model, AtlasError> {
    let ps = &d.params;
    let model = match d.id.as_str() {
        "grassmann_real" => {
            let (p, q) = (ps[0], ps[1]);
            Model {
                alg: build_algebra(Family::Su, p + q).map_err(lie_size)?,
                theta: complex_real(&diag(&pm(p, q))),
                sigma: conjugation(p + q),
                xi: grading_element(p, q),
            }
        }
        "grassmann_quaternionic" => {
            let (p, q) = (ps[0], ps[1]);
            let n = p + q;
            let mut omega = DMatrix::zeros(2 * n, 2 * n);
            for i in 0..n {
                omega[(2 * i, 2 * i + 1)] = -1.0;
                omega[(2 * i + 1, 2 * i)] = 1.0;
            }
            Model {
                alg: build_algebra(Family::Su, 2 * n).map_err(lie_size)?,
                theta: complex_real(&diag(&pm(2 * p, 2 * q))),
                sigma: complex_real(&omega) * conjugation(2 * n),
                xi: grading_element(2 * p, 2 * q),
            }
        }
        "unitary_group" => {
            let n = ps[0];
            Model {
                alg: build_algebra(Family::Su, 2 * n).map_err(lie_size)?,
                theta: complex_real(&j0(n)),
                sigma: complex_real(&diag(&pm(n, n))),
                xi: complex_real(&j0(n)) * 0.5,
            }
        }
        "orthogonal_group" => {
            let n = ps[0];
            Model {
                alg: build_algebra(Family::So, 2 * n).map_err(lie_size)?,
                theta: j0(n),
                sigma: diag(&pm(n, n)),
                xi: j0(n) * 0.5,
            }
        }
        "symplectic_group" => {
            let n = ps[0];
            Model {
                alg: build_algebra(Family::Sp, 2 * n).map_err(lie_size)?,
                theta: quaternion_real(&j0(n)),
                sigma: quaternion_real(&diag(&pm(n, n))),
                xi: quaternion_real(&j0(n)) * 0.5,
            }
        }
        "unitary_quaternionic" => {
            let n = ps[0];
            if 4 * n > crate::lie_core::MAX_MATRIX_SIZE {
                return Err(AtlasError::SizeOutOfRange(format!("so({})", 4 * n)));
            }
            let j = quaternion_unit_diag(n, 1);
            Model {
                alg: build_algebra(Family::So, 4 * n).map_err(lie_size)?,
                theta: j.clone(),
                sigma: quaternion_unit_diag(n, 2),
                xi: j * 0.5,
            }
        }
        "lagrangian" => {
            let n = ps[0];
            let j = quaternion_unit_diag(n, 1);
            Model {
                alg: build_algebra(Family::Sp, n).map_err(lie_size)?,
                theta: j.clone(),
                sigma: quaternion_unit_diag(n, 2),
                xi: j * 0.5,
            }
        }
        "sphere" | "quadric_real" => {
            let (p, q) = if d.id == "sphere" { (ps[0], 0) } else { (ps[0], ps[1]) };
            let size = p + q + 2;
            let mut t = vec![-1.0, -1.0];
            t.extend(std::iter::repeat_n(1.0, p + q));
            let mut s = vec![1.0, -1.0];
            s.extend(pm(p, q));
            Model {
                alg: build_algebra(Family::So, size).map_err(lie_size)?,
                theta: diag(&t),
                sigma: diag(&s),
                xi: so_rotation(size),
            }
        }
        id if id.ends_with("_hermitian") => {
            let (family, n, theta_n, z) = hermitian_factor(d)?;
            let alg = build_sum_algebra(family, n, 2).map_err(lie_size)?;
            let b = theta_n.nrows();
            let block = |x: &DMatrix<f64>, y: &DMatrix<f64>| {
                let mut m = DMatrix::zeros(2 * b, 2 * b);
                m.view_mut((0, 0), (b, b)).copy_from(x);
                m.view_mut((b, b), (b, b)).copy_from(y);
                m
            };
            let mut swap = DMatrix::zeros(2 * b, 2 * b);
            for i in 0..b {
                swap[(i, b + i)] = 1.0;
                swap[(b + i, i)] = 1.0;
            }
            Model {
                theta: block(&theta_n, &theta_n),
                sigma: swap,
                xi: block(&z, &(-&z)),
                alg,
            }
        }
        "exceptional" => return Err(AtlasError::UnsupportedRow(d.name.clone())),
        other => return Err(AtlasError::UnsupportedRow(other.to_string())),
    };
    Ok(model)
}

/// Build the ambient algebra, both involutions and the base element for a descriptor.
pub fn instantiate(d: &RSpaceDescriptor) -> Result<SpaceInstance, AtlasError> {
    if !d.instantiable {
        return Err(AtlasError::UnsupportedRow(d.name.clone()));
    }
    let Model { alg, theta, sigma, xi } = build_model(d)?;
    let theta = Involution::from_conjugation(&alg, &theta)?;
    let sigma = Involution::from_conjugation(&alg, &sigma)?;
    let xi_coords = alg.coords_of(&xi);
    let k_basis = sigma.plus_space.clone();
    let p_basis = sigma.minus_space.clone();
    let k_vee_basis = theta.plus_space.clone();
    let p_vee_basis = theta.minus_space.clone();
    let h_basis = intersect(&k_basis, &k_vee_basis);
    let l_basis = intersect(&k_basis, &p_vee_basis);
    let l_derived_basis = intersect(&l_basis, &derived_subalgebra(&alg, &k_basis));
    Ok(SpaceInstance {
        descriptor: d.clone(),
        xi: alg.element(xi),
        xi_coords,
        theta,
        sigma,
        k_basis,
        p_basis,
        k_vee_basis,
        p_vee_basis,
        h_basis,
        l_basis,
        l_derived_basis,
        g_vee: alg,
    })
}

/// Residuals of the structural conditions on an instance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InstanceResiduals {
    pub involutions_commute: f64,
    pub xi_complex_structure: f64,
    pub xi_central_in_k_vee: f64,
    pub xi_in_p: f64,
    pub xi_in_g: f64,
    pub l_h_span_k: f64,
    pub theta_inclusions: f64,
    pub sigma_inclusions: f64,
}

impl InstanceResiduals {
    pub fn max(&self) -> f64 {
        [
            self.involutions_commute,
            self.xi_complex_structure,
            self.xi_central_in_k_vee,
            self.xi_in_p,
            self.xi_in_g,
            self.l_h_span_k,
            self.theta_inclusions,
            self.sigma_inclusions,
        ]
        .iter()
        .cloned()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self) -> bool {
        self.max() <= TOL_ALG
    }
}

impl SpaceInstance {
    pub fn label(&self) -> String {
        self.descriptor.label()
    }

    pub fn dim(&self) -> usize {
        self.g_vee.dim()
    }

    /// Real dimension of the complexified orbit.
    pub fn orbit_dim(&self) -> usize {
        self.p_vee_basis.ncols()
    }

    pub fn residuals(&self) -> InstanceResiduals {
        let alg = &self.g_vee;
        let (t, s) = (&self.theta.operator_matrix, &self.sigma.operator_matrix);
        let ad = alg.ad_of_coords(&self.xi_coords);
        let l_h = self.l_basis.ncols() + self.h_basis.ncols();
        let span = {
            let mut m = DMatrix::zeros(alg.dim(), l_h);
            m.view_mut((0, 0), (alg.dim(), self.l_basis.ncols()))
                .copy_from(&self.l_basis);
            m.view_mut((0, self.l_basis.ncols()), (alg.dim(), self.h_basis.ncols()))
                .copy_from(&self.h_basis);
            m
        };
        let proj = &span * span.transpose();
        let k_res = linalg::max_abs(&(&proj * &self.k_basis - &self.k_basis))
            + (self.k_basis.ncols() as f64 - l_h as f64).abs();
        let dec = |inv: &Involution| {
            crate::lie_core::CartanDecomposition {
                involution: inv.clone(),
                k_basis: inv.plus_space.clone(),
                p_basis: inv.minus_space.clone(),
            }
            .inclusion_residuals(alg)
            .max()
        };
        InstanceResiduals {
            involutions_commute: linalg::max_abs(&(t * s - s * t)),
            xi_complex_structure: linalg::max_abs(&(&ad * &ad * &self.p_vee_basis + &self.p_vee_basis)),
            xi_central_in_k_vee: linalg::max_abs(&(&ad * &self.k_vee_basis)),
            xi_in_p: (s * &self.xi_coords + &self.xi_coords).amax(),
            xi_in_g: alg.membership_residual(&self.xi.entries),
            l_h_span_k: k_res,
            theta_inclusions: dec(&self.theta),
            sigma_inclusions: dec(&self.sigma),
        }
    }
}

/// Ranks of a space and its complexification.
#[derive(Debug, Clone, Serialize)]
pub struct RankData {
    pub rk_n: usize,
    pub rk_nc: usize,
    /// Rank over `l ∩ [k,k]`.
    pub rk_n_derived: usize,
    pub ratio: u8,
    /// Which reading of `l` produced `rk_n`: "full" or "derived".
    pub convention: String,
}

/// Maximal abelian subspace of `l` (the flat of the real form).
pub fn flat_of(s: &SpaceInstance, seed: u64) -> Result<AbelianSubspace, AtlasError> {
    Ok(root_system::find_maximal_abelian(&s.g_vee, &s.l_basis, seed)?)
}

/// Maximal abelian subspace of `p_vee` extending `a`.
pub fn extended_flat(s: &SpaceInstance, a: &AbelianSubspace, seed: u64) -> Result<AbelianSubspace, AtlasError> {
    Ok(root_system::extend_to_maximal_abelian(
        &s.g_vee,
        &s.p_vee_basis,
        &a.basis,
        seed,
    )?)
}

pub fn rank_data(s: &SpaceInstance, seed: u64) -> Result<RankData, AtlasError> {
    let rk_n = flat_of(s, seed)?.dim();
    let rk_nc = root_system::find_maximal_abelian(&s.g_vee, &s.p_vee_basis, seed)?.dim();
    let rk_n_derived = if s.l_derived_basis.ncols() == 0 {
        0
    } else {
        root_system::find_maximal_abelian(&s.g_vee, &s.l_derived_basis, seed)?.dim()
    };
    let integral = |n: usize| n > 0 && (rk_nc == n || rk_nc == 2 * n);
    let (used, convention) = if integral(rk_n) || !integral(rk_n_derived) {
        (rk_n, "full")
    } else {
        (rk_n_derived, "derived")
    };
    if !integral(used) {
        return Err(AtlasError::RatioNotIntegral { rk_n: used, rk_nc });
    }
    Ok(RankData {
        rk_n: used,
        rk_nc,
        rk_n_derived,
        ratio: (rk_nc / used) as u8,
        convention: convention.to_string(),
    })
}

/// `rk(N_C) / rk(N)`.
pub fn rank_ratio(s: &SpaceInstance, seed: u64) -> Result<u8, AtlasError> {
    Ok(rank_data(s, seed)?.ratio)
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub label: String,
    pub name: String,
    pub table_row: String,
    pub table_pi1: Pi1,
    pub table_ratio: u8,
    pub computed_ratio: Option<u8>,
    pub rk_n: Option<usize>,
    pub rk_nc: Option<usize>,
    pub convention: Option<String>,
    pub residual: Option<f64>,
    pub instantiable: bool,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableReport {
    pub rows: Vec<TableRow>,
}

impl TableReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Check one descriptor against its table entries.
pub fn verify_row(d: &RSpaceDescriptor, seed: u64) -> TableRow {
    let mut row = TableRow {
        label: d.label(),
        name: d.name.clone(),
        table_row: d.table_row.clone(),
        table_pi1: d.table_pi1,
        table_ratio: d.table_ratio,
        computed_ratio: None,
        rk_n: None,
        rk_nc: None,
        convention: None,
        residual: None,
        instantiable: d.instantiable,
        pass: false,
        note: String::new(),
    };
    let consistent = (d.table_pi1 == Pi1::Trivial) == (d.table_ratio == 2);
    if !d.instantiable {
        row.pass = consistent;
        row.note = "no matrix model; table data only".to_string();
        return row;
    }
    match instantiate(d).and_then(|s| Ok((rank_data(&s, seed)?, s.residuals().max()))) {
        Ok((rd, res)) => {
            row.computed_ratio = Some(rd.ratio);
            row.rk_n = Some(rd.rk_n);
            row.rk_nc = Some(rd.rk_nc);
            row.convention = Some(rd.convention.clone());
            row.residual = Some(res);
            let simply = d.table_pi1 == Pi1::Trivial;
            row.pass = rd.ratio == d.table_ratio && simply == (rd.ratio == 2) && res <= TOL_ALG;
        }
        Err(e) => row.note = e.to_string(),
    }
    row
}

/// Verify every catalogue row: computed ratio against the table and the
/// biconditional between ratio 2 and trivial fundamental group.
pub fn verify_table(seed: u64) -> TableReport {
    use rayon::prelude::*;
    let rows = list_entries().par_iter().map(|d| verify_row(d, seed)).collect();
    TableReport { rows }
}

/// Matrices `(S, C, D)` of the projective model of `S^n` with `C^T S C = D`.
///
/// The middle block of `C` is the identity, so the outer `1/sqrt 2` scaling
/// only touches the light-cone coordinates.
pub fn sphere_model_matrices(n: usize) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let size = n + 2;
    let mut s = DMatrix::zeros(size, size);
    s[(0, size - 1)] = 1.0;
    s[(size - 1, 0)] = 1.0;
    let mut c = DMatrix::zeros(size, size);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    c[(0, 0)] = h;
    c[(0, size - 1)] = -h;
    c[(size - 1, 0)] = h;
    c[(size - 1, size - 1)] = h;
    let mut d = DMatrix::zeros(size, size);
    d[(0, 0)] = 1.0;
    d[(size - 1, size - 1)] = -1.0;
    for i in 1..=n {
        s[(i, i)] = 1.0;
        c[(i, i)] = 1.0;
        d[(i, i)] = 1.0;
    }
    (s, c, d)
}

/// The same `C` with the overall `1/sqrt 2` applied to every block.
pub fn sphere_model_uniform_c(n: usize) -> DMatrix<f64> {
    let (_, mut c, _) = sphere_model_matrices(n);
    for i in 1..=n {
        c[(i, i)] = std::f64::consts::FRAC_1_SQRT_2;
    }
    c
}

/// Projective image `(z - 1, sqrt 2 y, z + 1)` of a point `(z, y)` of `S^n`.
pub fn sphere_to_quadric(z: f64, y: &[f64]) -> DVector<f64> {
    let mut v = vec![z - 1.0];
    v.extend(y.iter().map(|t| std::f64::consts::SQRT_2 * t));
    v.push(z + 1.0);
    DVector::from_vec(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_rejects_unknown_and_bad_params() {
        assert!(matches!(
            RSpaceDescriptor::lookup("octonionic", &[]),
            Err(AtlasError::UnsupportedRow(_))
        ));
        assert!(matches!(
            RSpaceDescriptor::lookup("sphere", &[1]),
            Err(AtlasError::InvalidParams { .. })
        ));
    }

    #[test]
    fn exceptional_rows_are_not_instantiated() {
        let e = list_entries().into_iter().find(|d| !d.instantiable).unwrap();
        assert!(matches!(instantiate(&e), Err(AtlasError::UnsupportedRow(_))));
    }

    #[test]
    fn sphere_two_dimensions() {
        let s = instantiate(&RSpaceDescriptor::lookup("sphere", &[2]).unwrap()).unwrap();
        assert_eq!(s.g_vee.dim(), 6);
        assert_eq!(s.k_vee_basis.ncols(), 2);
        assert_eq!(s.k_basis.ncols(), 3);
        assert!(s.residuals().passes(), "{:?}", s.residuals());
    }

    #[test]
    fn oversized_rows_fail_fast() {
        let d = RSpaceDescriptor::lookup("sphere", &[30]).unwrap();
        assert!(matches!(instantiate(&d), Err(AtlasError::SizeOutOfRange(_))));
    }
}
