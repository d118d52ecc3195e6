//! Dense linear-algebra helpers shared by the numerical modules.
//!
//! Subspaces are always carried as matrices whose columns form an
//! orthonormal basis in algebra coordinates.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Deterministic generator for a (seed, stream) pair.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Vector of independent standard normal entries.
pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Uniformly distributed point on the unit sphere of R^n.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    loop {
        let v = gaussian_vector(rng, n);
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Orthonormal basis (as columns) of the kernel of `m`.
///
/// Singular values below `rel_tol * max(1, sigma_max)` count as zero.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let tol = rel_tol * smax.max(1.0);
    let kernel: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    columns_to_matrix(cols, &kernel)
}

/// Orthonormal basis (as columns) of the eigenspace of a symmetric matrix
/// for eigenvalues within `tol` of `target`.
pub fn eigenspace(sym: &DMatrix<f64>, target: f64, tol: f64) -> DMatrix<f64> {
    let n = sym.nrows();
    let eig = SymmetricEigen::new(sym.clone());
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| (eig.eigenvalues[i] - target).abs() <= tol)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    orthonormalize(n, &cols, 1e-9)
}

/// Gram-Schmidt with one re-orthogonalization pass; near-dependent vectors are dropped.
pub fn orthonormalize(dim: usize, vectors: &[DVector<f64>], drop_tol: f64) -> DMatrix<f64> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&w);
                w -= q * c;
            }
        }
        let norm = w.norm();
        if norm > drop_tol * v.norm().max(1.0) {
            out.push(w / norm);
        }
    }
    columns_to_matrix(dim, &out)
}

/// Stack column vectors into a `dim x k` matrix.
pub fn columns_to_matrix(dim: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Orthogonal projection of `v` onto the column span of an orthonormal `basis`.
pub fn project(basis: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    if basis.ncols() == 0 {
        return DVector::zeros(v.len());
    }
    basis * (basis.transpose() * v)
}

/// Nonnegative frequencies of a real skew matrix: the moduli of the imaginary
/// parts of its eigenvalues, sorted ascending (each conjugate pair appears twice).
pub fn skew_frequencies(skew: &DMatrix<f64>) -> Vec<f64> {
    let sym = -(skew * skew);
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut f: Vec<f64> = eig.eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect();
    f.sort_by(|a, b| a.partial_cmp(b).unwrap());
    f
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Matrix commutator `ab - ba`.
pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// Row-major plain-text dump used for debugging output.
pub fn dump_matrix(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.6}", m[(i, j)])).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_rank_one_map() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let k = null_space(&m, 1e-12);
        assert_eq!(k.ncols(), 2);
        assert!((m * k).norm() < 1e-12);
    }

    #[test]
    fn frequencies_of_plane_rotation() {
        let r = DMatrix::from_row_slice(2, 2, &[0.0, -3.0, 3.0, 0.0]);
        let f = skew_frequencies(&r);
        assert!((f[0] - 3.0).abs() < 1e-12 && (f[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn seeded_streams_are_reproducible() {
        let a = gaussian_vector(&mut seeded_rng(7, 1), 4);
        let b = gaussian_vector(&mut seeded_rng(7, 1), 4);
        let c = gaussian_vector(&mut seeded_rng(7, 2), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
