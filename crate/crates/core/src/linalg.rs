//! Dense symmetric linear algebra: the `SymMat` carrier, sorted
//! eigendecompositions, inertia counts and null-space bases.
//!
//! All zero/rank decisions use a relative threshold `tol * max(1, ‖M‖_F)`
//! so that results do not change when a problem is rescaled.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Default relative zero threshold for eigenvalue and rank decisions.
pub const DEFAULT_TOL: f64 = 1e-8;

/// A dense, finite, exactly symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat(Matrix);

impl SymMat {
    /// Builds a symmetric matrix from a square one, replacing it by `(M + Mᵀ)/2`.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidInput(
                "matrix dimension must be at least 1".into(),
            ));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(SymMat(sym))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Self::new(Matrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Self::new(Matrix::from_row_slice(n, n, data))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_diagonal(&Vector::from_column_slice(d)))
    }

    pub fn identity(n: usize) -> Self {
        SymMat(Matrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        SymMat(Matrix::zeros(n, n))
    }

    /// Largest absolute deviation from symmetry of a raw square matrix.
    pub fn asymmetry(m: &Matrix) -> f64 {
        (m - m.transpose()).amax()
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_inner(self) -> Matrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.0.row(i).iter().copied().collect())
            .collect()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Maximum absolute row sum, an upper bound on every |eigenvalue|.
    pub fn gershgorin_radius(&self) -> f64 {
        self.0
            .row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `xᵀ M x`
    pub fn quad(&self, x: &Vector) -> f64 {
        x.dot(&(&self.0 * x))
    }

    /// `uᵀ M v`
    pub fn bilinear(&self, u: &Vector, v: &Vector) -> f64 {
        u.dot(&(&self.0 * v))
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.0 * x
    }

    /// `Σ cᵢ Mᵢ` over matrices of equal dimension.
    pub fn lincomb(terms: &[(f64, &SymMat)]) -> SymMat {
        let n = terms[0].1.dim();
        let mut acc = Matrix::zeros(n, n);
        for (c, m) in terms {
            debug_assert_eq!(m.dim(), n);
            if *c != 0.0 {
                acc += &m.0 * *c;
            }
        }
        SymMat(symmetrized(acc))
    }

    pub fn scale(&self, c: f64) -> SymMat {
        SymMat(&self.0 * c)
    }

    pub fn add(&self, other: &SymMat) -> SymMat {
        SymMat(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &SymMat) -> SymMat {
        SymMat(&self.0 - &other.0)
    }

    /// `Pᵀ M P` for a rectangular or square `P`.
    pub fn congruence(&self, p: &Matrix) -> SymMat {
        SymMat(symmetrized(p.transpose() * &self.0 * p))
    }

    /// Smallest eigenvalue with a unit eigenvector.
    pub fn lambda_min(&self) -> (f64, Vector) {
        let e = eig_unchecked(&self.0);
        (e.values[0], e.vectors.column(0).into_owned())
    }

    pub fn lambda_max(&self) -> f64 {
        let e = eig_unchecked(&self.0);
        *e.values.last().unwrap()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

fn symmetrized(m: Matrix) -> Matrix {
    (&m + m.transpose()) * 0.5
}

/// Eigen-decomposition with eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct EigDecomp {
    pub values: Vec<f64>,
    /// Column `k` pairs with `values[k]`.
    pub vectors: Matrix,
}

impl EigDecomp {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn vector(&self, k: usize) -> Vector {
        self.vectors.column(k).into_owned()
    }

    /// `V Λ Vᵀ`
    pub fn reconstruct(&self) -> Matrix {
        let lambda = Matrix::from_diagonal(&Vector::from_column_slice(&self.values));
        &self.vectors * lambda * self.vectors.transpose()
    }
}

fn eig_unchecked(m: &Matrix) -> EigDecomp {
    let se = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = Matrix::from_columns(
        &order
            .iter()
            .map(|&k| se.eigenvectors.column(k).into_owned())
            .collect::<Vec<_>>(),
    );
    EigDecomp { values, vectors }
}

/// Symmetric eigendecomposition, ascending.
pub fn sym_eig(m: &SymMat) -> Result<EigDecomp> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(eig_unchecked(&m.0))
}

/// Counts of negative, zero and positive eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub n_neg: usize,
    pub n_zero: usize,
    pub n_pos: usize,
}

/// Zero threshold actually applied for a matrix: `tol * max(1, ‖M‖_F)`.
pub fn zero_threshold(m: &SymMat, tol: f64) -> f64 {
    tol * m.norm().max(1.0)
}

pub fn inertia_of_values(values: &[f64], threshold: f64) -> Inertia {
    let mut out = Inertia {
        n_neg: 0,
        n_zero: 0,
        n_pos: 0,
    };
    for &v in values {
        if v.abs() <= threshold {
            out.n_zero += 1;
        } else if v < 0.0 {
            out.n_neg += 1;
        } else {
            out.n_pos += 1;
        }
    }
    out
}

pub fn inertia(m: &SymMat, tol: f64) -> Result<Inertia> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let e = sym_eig(m)?;
    Ok(inertia_of_values(&e.values, zero_threshold(m, tol)))
}

/// Orthonormal basis (n×d) of the eigenspace with |λ| ≤ tol·max(1,‖M‖).
pub fn nullspace_basis(m: &SymMat, tol: f64) -> Result<Matrix> {
    let e = sym_eig(m)?;
    let thr = zero_threshold(m, tol);
    let cols: Vec<Vector> = e
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() <= thr)
        .map(|(k, _)| e.vector(k))
        .collect();
    Ok(columns_or_empty(m.dim(), &cols))
}

pub(crate) fn columns_or_empty(n: usize, cols: &[Vector]) -> Matrix {
    if cols.is_empty() {
        Matrix::zeros(n, 0)
    } else {
        Matrix::from_columns(cols)
    }
}

/// Orthonormal basis of the orthogonal complement of `span(vs)`; the
/// returned matrix has `n - rank` columns where the rank is decided with a
/// relative tolerance.
pub fn orthogonal_complement(n: usize, vs: &[Vector], tol: f64) -> Matrix {
    let mut gram = Matrix::zeros(n, n);
    for v in vs {
        gram += v * v.transpose();
    }
    let e = eig_unchecked(&gram);
    let thr = tol * e.max().abs().max(f64::MIN_POSITIVE);
    let cols: Vec<Vector> = e
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() <= thr)
        .map(|(k, _)| e.vector(k))
        .collect();
    columns_or_empty(n, &cols)
}

/// Orthonormal basis of the complement of `span(vs)` with exactly
/// `n - vs.len()` columns (the smallest-eigenvalue directions of Σ v vᵀ).
pub fn complement_fixed(n: usize, vs: &[Vector]) -> Matrix {
    let mut gram = Matrix::zeros(n, n);
    for v in vs {
        gram += v * v.transpose();
    }
    let e = eig_unchecked(&gram);
    let k = n.saturating_sub(vs.len());
    let cols: Vec<Vector> = (0..k).map(|j| e.vector(j)).collect();
    columns_or_empty(n, &cols)
}

/// Inverse square root of a positive definite matrix via its eigendecomposition.
pub fn inv_sqrt(m: &SymMat) -> Result<Matrix> {
    let e = sym_eig(m)?;
    if e.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let d = Vector::from_iterator(e.values.len(), e.values.iter().map(|v| 1.0 / v.sqrt()));
    Ok(&e.vectors * Matrix::from_diagonal(&d) * e.vectors.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMat {
        SymMat::new(Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))).unwrap()
    }

    #[test]
    fn identity_eigenvalues() {
        let e = sym_eig(&SymMat::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_is_sorted() {
        let e = sym_eig(&SymMat::from_diagonal(&[3.0, 1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        assert!((e.vector(0)[1].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_sym(6, &mut rng);
            let e = sym_eig(&m).unwrap();
            let scale = m.norm();
            assert!((e.reconstruct() - m.as_matrix()).norm() <= 1e-10 * scale);
            let lambda = Matrix::from_diagonal(&Vector::from_column_slice(&e.values));
            assert!((m.as_matrix() * &e.vectors - &e.vectors * lambda).norm() <= 1e-10 * scale);
            let vtv = e.vectors.transpose() * &e.vectors;
            assert!((vtv - Matrix::identity(6, 6)).amax() <= 1e-12);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn construction_symmetrizes_and_rejects_nan() {
        let m = SymMat::new(Matrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(1, 0), 1.0);
        assert_eq!(
            SymMat::new(Matrix::from_row_slice(1, 1, &[f64::NAN])),
            Err(Error::NonFinite)
        );
        assert!(SymMat::new(Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn inertia_examples() {
        let m = SymMat::from_diagonal(&[-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(
            inertia(&m, 1e-8).unwrap(),
            Inertia {
                n_neg: 1,
                n_zero: 1,
                n_pos: 1
            }
        );
        assert_eq!(
            inertia(&SymMat::identity(4), 1e-8).unwrap(),
            Inertia {
                n_neg: 0,
                n_zero: 0,
                n_pos: 4
            }
        );
        let tiny = SymMat::from_diagonal(&[-1e-12, 1.0]).unwrap();
        assert_eq!(
            inertia(&tiny, 1e-8).unwrap(),
            Inertia {
                n_neg: 0,
                n_zero: 1,
                n_pos: 1
            }
        );
        assert!(inertia(&tiny, 0.0).is_err());
    }

    #[test]
    fn nullspace_examples() {
        let n1 = nullspace_basis(&SymMat::from_diagonal(&[0.0, 1.0, 2.0]).unwrap(), 1e-8).unwrap();
        assert_eq!(n1.ncols(), 1);
        assert!((n1[(0, 0)].abs() - 1.0).abs() < 1e-15);
        let n0 = nullspace_basis(&SymMat::identity(3), 1e-8).unwrap();
        assert_eq!(n0.ncols(), 0);
        let n2 = nullspace_basis(&SymMat::from_diagonal(&[0.0, 0.0, 5.0]).unwrap(), 1e-8).unwrap();
        assert_eq!(n2.ncols(), 2);
        assert!((n2.transpose() * &n2 - Matrix::identity(2, 2)).amax() < 1e-12);
        assert!(n2.row(2).amax() < 1e-15);
    }

    #[test]
    fn sylvester_inertia_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let d: Vec<f64> = (0..5)
                .map(|k| match k % 3 {
                    0 => rng.random_range(0.5..2.0),
                    1 => -rng.random_range(0.5..2.0),
                    _ => 0.0,
                })
                .collect();
            let m = SymMat::from_diagonal(&d).unwrap();
            // P = I + small random perturbation keeps cond(P) modest.
            let p =
                Matrix::identity(5, 5) + Matrix::from_fn(5, 5, |_, _| rng.random_range(-0.3..0.3));
            let sv = p.clone().svd(false, false).singular_values;
            let cond = sv.max() / sv.min();
            if cond > 1e3 {
                continue;
            }
            let c = m.congruence(&p);
            assert_eq!(inertia(&m, 1e-8).unwrap(), inertia(&c, 1e-8).unwrap());
        }
    }

    #[test]
    fn complement_is_orthogonal() {
        let v1 = Vector::from_vec(vec![1.0, 1.0, 0.0, 0.0]);
        let v2 = Vector::from_vec(vec![0.0, 1.0, 1.0, 0.0]);
        let w = complement_fixed(4, &[v1.clone(), v2.clone()]);
        assert_eq!(w.ncols(), 2);
        assert!((w.transpose() * &v1).amax() < 1e-12);
        assert!((w.transpose() * &v2).amax() < 1e-12);
        assert!((w.transpose() * &w - Matrix::identity(2, 2)).amax() < 1e-12);
    }
}
