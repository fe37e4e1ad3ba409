//! Symmetric positive definite matrices.
//!
//! Construction symmetrizes and then validates positivity through a symmetric
//! eigendecomposition; determinants, inverses and square roots reuse the same
//! decomposition so they stay consistent under round-off.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct SpdMatrix {
    mat: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpdMatrix {
    /// Symmetrize and validate. All eigenvalues must be strictly positive.
    pub fn new(raw: DMatrix<f64>) -> Result<Self> {
        if raw.nrows() != raw.ncols() || raw.nrows() == 0 {
            return Err(Error::NotSpd(format!(
                "shape {}x{} is not square",
                raw.nrows(),
                raw.ncols()
            )));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotSpd("non-finite entry".into()));
        }
        let mat = (&raw + raw.transpose()) * 0.5;
        let eig = mat.clone().symmetric_eigen();
        let max_abs = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
        let min = eig.eigenvalues.min();
        if min <= 1e-14 * max_abs.max(1.0) {
            return Err(Error::NotSpd(format!(
                "smallest eigenvalue {min:.6e} is not positive"
            )));
        }
        Ok(SpdMatrix {
            mat,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn identity(dim: usize) -> Self {
        SpdMatrix::new(DMatrix::identity(dim, dim)).expect("identity is SPD")
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        SpdMatrix::new(DMatrix::from_diagonal(&DVector::from_row_slice(diag)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSpd("ragged row lengths".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        SpdMatrix::new(DMatrix::from_row_slice(n, n, &flat))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.mat[(i, j)]).collect())
            .collect()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.mat[(i, j)]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.max()
    }

    pub fn det(&self) -> f64 {
        self.eigenvalues.iter().product()
    }

    fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> SpdMatrix {
        let d = DMatrix::from_diagonal(&self.eigenvalues.map(f));
        let m = &self.eigenvectors * d * self.eigenvectors.transpose();
        SpdMatrix::new(m).expect("spectral map with positive values stays SPD")
    }

    pub fn inverse(&self) -> SpdMatrix {
        self.map_eigenvalues(|l| 1.0 / l)
    }

    /// Symmetric square root.
    pub fn sqrt(&self) -> SpdMatrix {
        self.map_eigenvalues(|l| l.sqrt())
    }

    /// Q / det(Q)^{1/n}: determinant one within round-off.
    pub fn normalize_det(&self) -> SpdMatrix {
        let n = self.dim() as f64;
        let log_det: f64 = self.eigenvalues.iter().map(|l| l.ln()).sum();
        let scale = (-log_det / n).exp();
        self.scaled(scale).expect("positive scaling stays SPD")
    }

    pub fn scaled(&self, c: f64) -> Result<SpdMatrix> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale {c} must be a positive real"
            )));
        }
        SpdMatrix::new(&self.mat * c)
    }

    /// Congruence T^t Q T (the quadratic form pulled back along T).
    pub fn congruence(&self, t: &DMatrix<f64>) -> Result<SpdMatrix> {
        SpdMatrix::new(t.transpose() * &self.mat * t)
    }

    /// x^t Q x over the leading `dim` coordinates of `x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.mat[(i, j)] * x[j];
            }
            acc += x[i] * row;
        }
        acc
    }

    /// Q x over the leading `dim` coordinates, zero-padded to length 3.
    pub fn apply(&self, x: &[f64]) -> [f64; 3] {
        let n = self.dim();
        let mut out = [0.0; 3];
        for i in 0..n {
            for j in 0..n {
                out[i] += self.mat[(i, j)] * x[j];
            }
        }
        out
    }

    /// Operator (spectral) norm of the difference from `other`.
    pub fn operator_distance(&self, other: &SpdMatrix) -> f64 {
        let diff = &self.mat - &other.mat;
        diff.symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, &l| m.max(l.abs()))
    }
}

/// Condition number (2-norm) of a general square matrix.
pub fn condition_number(t: &DMatrix<f64>) -> f64 {
    let svd = t.clone().svd(false, false);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn normalize_det_diag() {
        let q = SpdMatrix::from_diag(&[4.0, 1.0]).unwrap();
        let n = q.normalize_det();
        assert_abs_diff_eq!(n.entry(0, 0), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(n.entry(1, 1), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn normalize_det_identity_fixed() {
        let q = SpdMatrix::identity(3);
        let n = q.normalize_det();
        assert_abs_diff_eq!(n.operator_distance(&q), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn normalize_det_random_spd() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let a = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
        let q = SpdMatrix::new(&a * a.transpose() + DMatrix::identity(3, 3) * 0.5).unwrap();
        let scaled = q.scaled(10.0f64.powf(1.0 / 3.0) / q.det().powf(1.0 / 3.0)).unwrap();
        assert_abs_diff_eq!(scaled.det(), 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(scaled.normalize_det().det(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn normalize_idempotent_and_orthogonal_equivariant() {
        let q = SpdMatrix::from_rows(&[vec![3.0, 0.4], vec![0.4, 1.2]]).unwrap();
        let n1 = q.normalize_det();
        let n2 = n1.normalize_det();
        assert!(n1.operator_distance(&n2) < 1e-12);

        let theta: f64 = 0.73;
        let o = DMatrix::from_row_slice(
            2,
            2,
            &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()],
        );
        let lhs = q.congruence(&o).unwrap().normalize_det();
        let rhs = q.normalize_det().congruence(&o).unwrap();
        assert!(lhs.operator_distance(&rhs) < 1e-10);
    }

    #[test]
    fn rejects_indefinite() {
        assert!(SpdMatrix::from_diag(&[1.0, -0.5]).is_err());
        assert!(SpdMatrix::from_diag(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn sqrt_squares_back() {
        let q = SpdMatrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let r = q.sqrt();
        let sq = SpdMatrix::new(r.matrix() * r.matrix()).unwrap();
        assert!(sq.operator_distance(&q) < 1e-12);
    }
}
