//! Compact classical Lie algebras as real matrix algebras.
//!
//! Complex entries are embedded as 2x2 blocks `[[a,-b],[b,a]]` and quaternion
//! entries as the 4x4 matrix of left multiplication, so every algebra lives
//! inside `so(m)` for some real size `m`. Bases are orthonormal for the
//! Frobenius inner product `tr(X^T Y) = -tr(XY)`, which makes every `ad`
//! matrix skew-symmetric in coordinates.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;

/// Tolerance for exact algebraic identities.
pub const TOL_ALG: f64 = 1e-10;

/// Largest supported real matrix size.
pub const MAX_MATRIX_SIZE: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("unsupported family `{0}`")]
    UnsupportedFamily(String),
    #[error("size {n} out of range for {family} (real matrix size {size}, limit {limit})")]
    SizeOutOfRange {
        family: String,
        n: usize,
        size: usize,
        limit: usize,
    },
    #[error("algebra mismatch: `{left}` vs `{right}`")]
    AlgebraMismatch { left: String, right: String },
    #[error("operator is not an involution (residual {0:e})")]
    NotAnInvolution(f64),
    #[error("operator is not a Lie algebra automorphism (residual {0:e})")]
    NotAnAutomorphism(f64),
}

/// The four matrix families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    So,
    Su,
    U,
    Sp,
}

impl Family {
    /// Real dimension of one scalar of the underlying field.
    pub fn field_dim(self) -> usize {
        match self {
            Family::So => 1,
            Family::Su | Family::U => 2,
            Family::Sp => 4,
        }
    }

    /// Real trace of the embedding divided by the trace of the defining
    /// complex representation (`sp(n)` acts on `C^2n`).
    pub fn trace_divisor(self) -> usize {
        match self {
            Family::So => 1,
            Family::Su | Family::U | Family::Sp => 2,
        }
    }

    pub fn parse(s: &str) -> Result<Family, LieError> {
        match s {
            "so" => Ok(Family::So),
            "su" => Ok(Family::Su),
            "u" => Ok(Family::U),
            "sp" => Ok(Family::Sp),
            other => Err(LieError::UnsupportedFamily(other.to_string())),
        }
    }

    /// Factor relating the Killing form to the field trace form on the simple families.
    pub fn killing_trace_factor(self, n: usize) -> Option<f64> {
        match self {
            Family::So => Some(n as f64 - 2.0),
            Family::Su => Some(2.0 * n as f64),
            Family::Sp => Some(2.0 * n as f64 + 2.0),
            Family::U => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::So => "so",
            Family::Su => "su",
            Family::U => "u",
            Family::Sp => "sp",
        };
        f.write_str(s)
    }
}

/// An element of a named matrix Lie algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub algebra_id: Arc<str>,
    pub entries: DMatrix<f64>,
}

impl AlgebraElement {
    pub fn new(algebra_id: Arc<str>, entries: DMatrix<f64>) -> Self {
        AlgebraElement { algebra_id, entries }
    }
}

/// A compact matrix Lie algebra with an orthonormal basis, structure
/// constants and Killing form.
#[derive(Debug, Clone)]
pub struct LieAlgebraBasis {
    pub id: Arc<str>,
    pub family: Family,
    pub n: usize,
    /// Number of block-diagonal copies (2 for the doubled Hermitian ambients).
    pub copies: usize,
    pub matrix_size: usize,
    basis: Vec<DMatrix<f64>>,
    /// Row `i` is the flattened basis matrix `E_i`; coordinates are `flat * vec(X)`.
    flat: DMatrix<f64>,
    /// `c[(i*d + j)*d + k] = <[E_i, E_j], E_k>`.
    structure_constants: Vec<f64>,
    ad: Vec<DMatrix<f64>>,
    pub killing_matrix: DMatrix<f64>,
}

/// Left-multiplication matrix of the quaternion `a + b i + c j + d k`.
pub fn quaternion_block(a: f64, b: f64, c: f64, d: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(4, 4, &[a, -b, -c, -d, b, a, -d, c, c, d, a, -b, d, -c, b, a])
}

/// Real embedding of a complex `n x n` matrix given by real and imaginary parts.
pub fn embed_complex(re: &DMatrix<f64>, im: &DMatrix<f64>) -> DMatrix<f64> {
    let n = re.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let (a, b) = (re[(r, c)], im[(r, c)]);
            m[(2 * r, 2 * c)] = a;
            m[(2 * r, 2 * c + 1)] = -b;
            m[(2 * r + 1, 2 * c)] = b;
            m[(2 * r + 1, 2 * c + 1)] = a;
        }
    }
    m
}

/// Real embedding of a quaternionic `n x n` matrix given by its four real components.
pub fn embed_quaternion(parts: [&DMatrix<f64>; 4]) -> DMatrix<f64> {
    let n = parts[0].nrows();
    let mut m = DMatrix::zeros(4 * n, 4 * n);
    for r in 0..n {
        for c in 0..n {
            let q = quaternion_block(parts[0][(r, c)], parts[1][(r, c)], parts[2][(r, c)], parts[3][(r, c)]);
            m.view_mut((4 * r, 4 * c), (4, 4)).copy_from(&q);
        }
    }
    m
}

fn unit(n: usize, r: usize, c: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    m[(r, c)] = 1.0;
    m
}

fn spanning_matrices(family: Family, n: usize) -> Vec<DMatrix<f64>> {
    let zero = DMatrix::<f64>::zeros(n, n);
    let mut out = Vec::new();
    match family {
        Family::So => {
            for r in 0..n {
                for c in (r + 1)..n {
                    out.push(unit(n, r, c) - unit(n, c, r));
                }
            }
        }
        Family::Su | Family::U => {
            for r in 0..n {
                for c in (r + 1)..n {
                    out.push(embed_complex(&(unit(n, r, c) - unit(n, c, r)), &zero));
                    out.push(embed_complex(&zero, &(unit(n, r, c) + unit(n, c, r))));
                }
            }
            for j in 0..n.saturating_sub(1) {
                out.push(embed_complex(&zero, &(unit(n, j, j) - unit(n, j + 1, j + 1))));
            }
            if family == Family::U {
                out.push(embed_complex(&zero, &DMatrix::identity(n, n)));
            }
        }
        Family::Sp => {
            for r in 0..n {
                for c in (r + 1)..n {
                    for e in 0..4 {
                        let mut parts = [zero.clone(), zero.clone(), zero.clone(), zero.clone()];
                        parts[e][(r, c)] = 1.0;
                        // X_cr = -conj(X_rc): real part flips sign, imaginary parts keep it.
                        parts[e][(c, r)] = if e == 0 { -1.0 } else { 1.0 };
                        out.push(embed_quaternion([&parts[0], &parts[1], &parts[2], &parts[3]]));
                    }
                }
            }
            for r in 0..n {
                for e in 1..4 {
                    let mut parts = [zero.clone(), zero.clone(), zero.clone(), zero.clone()];
                    parts[e][(r, r)] = 1.0;
                    out.push(embed_quaternion([&parts[0], &parts[1], &parts[2], &parts[3]]));
                }
            }
        }
    }
    out
}

fn check_size(family: Family, n: usize, copies: usize) -> Result<usize, LieError> {
    let min = match family {
        Family::So | Family::Su => 2,
        Family::U | Family::Sp => 1,
    };
    let size = n * family.field_dim() * copies;
    if n < min || size > MAX_MATRIX_SIZE {
        return Err(LieError::SizeOutOfRange {
            family: family.to_string(),
            n,
            size,
            limit: MAX_MATRIX_SIZE,
        });
    }
    Ok(size)
}

/// Build `so(n)`, `su(n)`, `u(n)` or `sp(n)`.
pub fn build_algebra(family: Family, n: usize) -> Result<LieAlgebraBasis, LieError> {
    let size = check_size(family, n, 1)?;
    let id: Arc<str> = Arc::from(format!("{family}({n})"));
    Ok(LieAlgebraBasis::from_spanning_set(
        id,
        family,
        n,
        1,
        size,
        spanning_matrices(family, n),
    ))
}

/// Block-diagonal sum of `copies` copies of the given family.
pub fn build_sum_algebra(family: Family, n: usize, copies: usize) -> Result<LieAlgebraBasis, LieError> {
    let size = check_size(family, n, copies)?;
    let block = n * family.field_dim();
    let mut mats = Vec::new();
    for copy in 0..copies {
        for m in spanning_matrices(family, n) {
            let mut big = DMatrix::zeros(size, size);
            big.view_mut((copy * block, copy * block), (block, block)).copy_from(&m);
            mats.push(big);
        }
    }
    let name = vec![format!("{family}({n})"); copies].join("+");
    Ok(LieAlgebraBasis::from_spanning_set(
        Arc::from(name),
        family,
        n,
        copies,
        size,
        mats,
    ))
}

fn flatten(m: &DMatrix<f64>) -> Vec<f64> {
    m.iter().cloned().collect()
}

impl LieAlgebraBasis {
    fn from_spanning_set(
        id: Arc<str>,
        family: Family,
        n: usize,
        copies: usize,
        matrix_size: usize,
        spanning: Vec<DMatrix<f64>>,
    ) -> Self {
        let m2 = matrix_size * matrix_size;
        let vecs: Vec<DVector<f64>> = spanning.iter().map(|m| DVector::from_vec(flatten(m))).collect();
        let q = linalg::orthonormalize(m2, &vecs, 1e-12);
        let d = q.ncols();
        let basis: Vec<DMatrix<f64>> = (0..d)
            .map(|i| DMatrix::from_column_slice(matrix_size, matrix_size, q.column(i).as_slice()))
            .collect();
        let flat = q.transpose();
        let mut c = vec![0.0; d * d * d];
        for i in 0..d {
            for j in (i + 1)..d {
                let b = linalg::commutator(&basis[i], &basis[j]);
                let coords = &flat * DVector::from_vec(flatten(&b));
                for k in 0..d {
                    c[(i * d + j) * d + k] = coords[k];
                    c[(j * d + i) * d + k] = -coords[k];
                }
            }
        }
        let ad: Vec<DMatrix<f64>> = (0..d)
            .map(|i| DMatrix::from_fn(d, d, |k, j| c[(i * d + j) * d + k]))
            .collect();
        let killing_matrix = DMatrix::from_fn(d, d, |i, j| ad[i].dot(&ad[j].transpose()));
        LieAlgebraBasis {
            id,
            family,
            n,
            copies,
            matrix_size,
            basis,
            flat,
            structure_constants: c,
            ad,
            killing_matrix,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_matrix(&self, i: usize) -> &DMatrix<f64> {
        &self.basis[i]
    }

    pub fn basis_element(&self, i: usize) -> AlgebraElement {
        AlgebraElement::new(self.id.clone(), self.basis[i].clone())
    }

    /// `c[i][j][k]`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.structure_constants[(i * d + j) * d + k]
    }

    /// Matrix of `ad_{E_i}` in basis coordinates.
    pub fn ad_basis(&self, i: usize) -> &DMatrix<f64> {
        &self.ad[i]
    }

    pub fn element(&self, entries: DMatrix<f64>) -> AlgebraElement {
        AlgebraElement::new(self.id.clone(), entries)
    }

    /// Coordinates of a matrix in the orthonormal basis.
    pub fn coords_of(&self, m: &DMatrix<f64>) -> DVector<f64> {
        &self.flat * DVector::from_column_slice(m.as_slice())
    }

    pub fn coords(&self, x: &AlgebraElement) -> DVector<f64> {
        self.coords_of(&x.entries)
    }

    /// Matrix with the given coordinates.
    pub fn matrix_of(&self, coords: &DVector<f64>) -> DMatrix<f64> {
        let v = self.flat.transpose() * coords;
        DMatrix::from_column_slice(self.matrix_size, self.matrix_size, v.as_slice())
    }

    pub fn from_coords(&self, coords: &DVector<f64>) -> AlgebraElement {
        self.element(self.matrix_of(coords))
    }

    /// Frobenius distance from a matrix to the span of the basis.
    pub fn membership_residual(&self, m: &DMatrix<f64>) -> f64 {
        (m - self.matrix_of(&self.coords_of(m))).norm()
    }

    fn check_same(&self, x: &AlgebraElement) -> Result<(), LieError> {
        if x.algebra_id != self.id {
            return Err(LieError::AlgebraMismatch {
                left: self.id.to_string(),
                right: x.algebra_id.to_string(),
            });
        }
        Ok(())
    }

    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement, LieError> {
        self.check_same(x)?;
        self.check_same(y)?;
        Ok(self.element(linalg::commutator(&x.entries, &y.entries)))
    }

    /// Bracket in coordinates, computed through the matrix commutator.
    pub fn bracket_coords(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let (mx, my) = (self.matrix_of(x), self.matrix_of(y));
        self.coords_of(&linalg::commutator(&mx, &my))
    }

    pub fn killing(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<f64, LieError> {
        self.check_same(x)?;
        self.check_same(y)?;
        Ok(self.killing_coords(&self.coords(x), &self.coords(y)))
    }

    pub fn killing_coords(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.killing_matrix * y)[(0, 0)]
    }

    /// Trace form of the defining representation: `Re tr(XY)` over `R^n`, `C^n` or `C^2n`.
    pub fn trace_form(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<f64, LieError> {
        self.check_same(x)?;
        self.check_same(y)?;
        Ok((&x.entries * &y.entries).trace() / self.family.trace_divisor() as f64)
    }

    /// Field trace form evaluated on coordinates.
    pub fn trace_form_coords(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        // Coordinates are Frobenius-orthonormal and Frobenius equals -tr_R(XY).
        -x.dot(y) / self.family.trace_divisor() as f64
    }

    pub fn ad_operator(&self, x: &AlgebraElement) -> Result<DMatrix<f64>, LieError> {
        self.check_same(x)?;
        Ok(self.ad_of_coords(&self.coords(x)))
    }

    pub fn ad_of_coords(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (i, xi) in x.iter().enumerate() {
            if *xi != 0.0 {
                m += &self.ad[i] * *xi;
            }
        }
        m
    }

    /// Largest `|c_ijk + c_jik|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let d = self.dim();
        let mut r = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    r = r.max((self.structure_constant(i, j, k) + self.structure_constant(j, i, k)).abs());
                }
            }
        }
        r
    }

    /// Largest Jacobi defect over all basis triples, from the structure constants.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim();
        let sparse: Vec<Vec<(usize, f64)>> = (0..d * d)
            .map(|ij| {
                (0..d)
                    .filter_map(|k| {
                        let v = self.structure_constants[ij * d + k];
                        (v.abs() > 1e-15).then_some((k, v))
                    })
                    .collect()
            })
            .collect();
        let nested = |i: usize, j: usize, k: usize, acc: &mut [f64]| {
            for &(m, cm) in &sparse[i * d + j] {
                for &(l, cl) in &sparse[m * d + k] {
                    acc[l] += cm * cl;
                }
            }
        };
        let mut worst = 0.0_f64;
        let mut acc = vec![0.0; d];
        for i in 0..d {
            for j in (i + 1)..d {
                for k in (j + 1)..d {
                    acc.iter_mut().for_each(|a| *a = 0.0);
                    nested(i, j, k, &mut acc);
                    nested(j, k, i, &mut acc);
                    nested(k, i, j, &mut acc);
                    worst = acc.iter().fold(worst, |w, a| w.max(a.abs()));
                }
            }
        }
        worst
    }

    /// Largest entry of `B - tr(ad_i ad_j)` recomputed directly from the constants.
    pub fn killing_consistency_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                let mut t = 0.0;
                for k in 0..d {
                    for l in 0..d {
                        t += self.structure_constant(i, l, k) * self.structure_constant(j, k, l);
                    }
                }
                worst = worst.max((t - self.killing_matrix[(i, j)]).abs());
            }
        }
        worst
    }

    /// Largest deviation of `ad_X` from skew-symmetry in coordinates.
    pub fn ad_skew_residual(&self, x: &DVector<f64>) -> f64 {
        let a = self.ad_of_coords(x);
        linalg::max_abs(&(&a + a.transpose()))
    }
}

/// Involutive automorphism given by its matrix in basis coordinates.
#[derive(Debug, Clone)]
pub struct Involution {
    pub algebra_id: Arc<str>,
    pub operator_matrix: DMatrix<f64>,
    /// Orthonormal basis (columns) of the +1 eigenspace.
    pub plus_space: DMatrix<f64>,
    /// Orthonormal basis (columns) of the -1 eigenspace.
    pub minus_space: DMatrix<f64>,
}

impl Involution {
    /// The automorphism `X -> M X M^{-1}` for an orthogonal `M`.
    pub fn from_conjugation(alg: &LieAlgebraBasis, m: &DMatrix<f64>) -> Result<Involution, LieError> {
        let d = alg.dim();
        let m_t = m.transpose();
        let mut op = DMatrix::zeros(d, d);
        for j in 0..d {
            let img = m * alg.basis_matrix(j) * &m_t;
            op.set_column(j, &alg.coords_of(&img));
        }
        Involution::from_operator(alg, op)
    }

    pub fn identity(alg: &LieAlgebraBasis) -> Involution {
        Involution::from_operator(alg, DMatrix::identity(alg.dim(), alg.dim()))
            .expect("identity is an involutive automorphism")
    }

    pub fn from_operator(alg: &LieAlgebraBasis, op: DMatrix<f64>) -> Result<Involution, LieError> {
        let d = alg.dim();
        let sq = &op * &op - DMatrix::<f64>::identity(d, d);
        let r = linalg::max_abs(&sq);
        if r > TOL_ALG {
            return Err(LieError::NotAnInvolution(r));
        }
        let mut auto = 0.0_f64;
        let op_t = op.transpose();
        for i in 0..d {
            let lhs = &op * alg.ad_basis(i) * &op_t;
            let rhs = alg.ad_of_coords(&op.column(i).into_owned());
            auto = auto.max(linalg::max_abs(&(lhs - rhs)));
        }
        if auto > TOL_ALG {
            return Err(LieError::NotAnAutomorphism(auto));
        }
        let sym = (&op + &op_t) * 0.5;
        let plus_space = linalg::eigenspace(&sym, 1.0, 1e-6);
        let minus_space = linalg::eigenspace(&sym, -1.0, 1e-6);
        Ok(Involution {
            algebra_id: alg.id.clone(),
            operator_matrix: op,
            plus_space,
            minus_space,
        })
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.operator_matrix * x
    }

    /// Residual of `op^2 = id`.
    pub fn square_residual(&self) -> f64 {
        let d = self.operator_matrix.nrows();
        linalg::max_abs(&(&self.operator_matrix * &self.operator_matrix - DMatrix::<f64>::identity(d, d)))
    }
}

/// The splitting `g = k + p` into the +1 and -1 eigenspaces of an involution.
#[derive(Debug, Clone)]
pub struct CartanDecomposition {
    pub involution: Involution,
    pub k_basis: DMatrix<f64>,
    pub p_basis: DMatrix<f64>,
}

/// Residuals of `[k,k] in k`, `[k,p] in p`, `[p,p] in k`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InclusionResiduals {
    pub kk: f64,
    pub kp: f64,
    pub pp: f64,
}

impl InclusionResiduals {
    pub fn max(&self) -> f64 {
        self.kk.max(self.kp).max(self.pp)
    }
}

pub fn cartan_decompose(alg: &LieAlgebraBasis, inv: &Involution) -> Result<CartanDecomposition, LieError> {
    if inv.algebra_id != alg.id {
        return Err(LieError::AlgebraMismatch {
            left: alg.id.to_string(),
            right: inv.algebra_id.to_string(),
        });
    }
    let checked = Involution::from_operator(alg, inv.operator_matrix.clone())?;
    let dec = CartanDecomposition {
        k_basis: checked.plus_space.clone(),
        p_basis: checked.minus_space.clone(),
        involution: checked,
    };
    let r = dec.inclusion_residuals(alg);
    if r.max() > TOL_ALG {
        return Err(LieError::NotAnAutomorphism(r.max()));
    }
    Ok(dec)
}

impl CartanDecomposition {
    pub fn inclusion_residuals(&self, alg: &LieAlgebraBasis) -> InclusionResiduals {
        let leak = |left: &DMatrix<f64>, right: &DMatrix<f64>, wrong: &DMatrix<f64>| -> f64 {
            let mut worst = 0.0_f64;
            if wrong.ncols() == 0 || right.ncols() == 0 {
                return 0.0;
            }
            for i in 0..left.ncols() {
                let ad = alg.ad_of_coords(&left.column(i).into_owned());
                let br = ad * right;
                worst = worst.max(linalg::max_abs(&(wrong.transpose() * br)));
            }
            worst
        };
        InclusionResiduals {
            kk: leak(&self.k_basis, &self.k_basis, &self.p_basis),
            kp: leak(&self.k_basis, &self.p_basis, &self.k_basis),
            pp: leak(&self.p_basis, &self.p_basis, &self.p_basis),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(build_algebra(Family::So, 4).unwrap().dim(), 6);
        assert_eq!(build_algebra(Family::Su, 3).unwrap().dim(), 8);
        assert_eq!(build_algebra(Family::U, 2).unwrap().dim(), 4);
        assert_eq!(build_algebra(Family::Sp, 2).unwrap().dim(), 10);
    }

    #[test]
    fn size_limits() {
        assert!(matches!(
            build_algebra(Family::So, 1),
            Err(LieError::SizeOutOfRange { .. })
        ));
        assert!(matches!(
            build_algebra(Family::Sp, 7),
            Err(LieError::SizeOutOfRange { .. })
        ));
        assert!(matches!(Family::parse("e6"), Err(LieError::UnsupportedFamily(_))));
    }

    #[test]
    fn mismatched_algebras_are_rejected() {
        let a = build_algebra(Family::So, 3).unwrap();
        let b = build_algebra(Family::So, 4).unwrap();
        let err = a.bracket(&a.basis_element(0), &b.basis_element(0)).unwrap_err();
        assert!(matches!(err, LieError::AlgebraMismatch { .. }));
    }

    #[test]
    fn quaternion_blocks_multiply() {
        let i = quaternion_block(0.0, 1.0, 0.0, 0.0);
        let j = quaternion_block(0.0, 0.0, 1.0, 0.0);
        let k = quaternion_block(0.0, 0.0, 0.0, 1.0);
        assert!((&i * &j - &k).norm() < 1e-15);
        assert!((&i * &i + DMatrix::<f64>::identity(4, 4)).norm() < 1e-15);
    }

    #[test]
    fn non_involution_rejected() {
        let alg = build_algebra(Family::So, 3).unwrap();
        let op = DMatrix::identity(3, 3) * 2.0;
        assert!(matches!(
            Involution::from_operator(&alg, op),
            Err(LieError::NotAnInvolution(_))
        ));
    }
}
