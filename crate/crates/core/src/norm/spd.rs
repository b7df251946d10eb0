use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, spd_inverse, symmetrize};

/// Symmetric positive-definite matrix with its inverse, determinant and
/// spectrum computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    det: f64,
    /// Ascending.
    eigenvalues: DVector<f64>,
}

impl SpdMatrix {
    /// Validates exact symmetry and positive definiteness.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: matrix.ncols(),
            });
        }
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        for i in 0..n {
            for j in 0..n {
                if !matrix[(i, j)].is_finite() {
                    return Err(Error::NonFiniteEntry { row: i, col: j });
                }
                if matrix[(i, j)] != matrix[(j, i)] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        let eigenvalues = sorted_eigenvalues(&matrix);
        let l = cholesky_lower(&matrix).map_err(|minor| Error::NotPositiveDefinite {
            minor,
            min_eigenvalue: eigenvalues[0],
        })?;
        if eigenvalues[0].is_nan() || eigenvalues[0] <= 0.0 {
            // Cholesky can succeed on matrices that are singular to rounding.
            return Err(Error::NotPositiveDefinite {
                minor: n,
                min_eigenvalue: eigenvalues[0],
            });
        }
        let det = l.diagonal().iter().map(|d| d * d).product();
        let inverse = spd_inverse(&l);
        Ok(Self {
            matrix,
            inverse,
            det,
            eigenvalues,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim))
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    /// `Q diag(λ) Qᵀ` with a Haar-like orthogonal `Q` and eigenvalues drawn
    /// uniformly from `[0.5, 2.5]`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
        let q = g.qr().q();
        let lambdas = DVector::<f64>::from_fn(dim, |_, _| rng.random_range(0.5..2.5));
        let m = &q * DMatrix::from_diagonal(&lambdas) * q.transpose();
        Self::new(symmetrize(&m))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == DMatrix::identity(self.dim(), self.dim())
    }

    /// The SPD matrix `M⁻¹`, whose stored inverse is exactly `M`.
    pub fn inverted(&self) -> Self {
        let n = self.eigenvalues.len();
        Self {
            matrix: self.inverse.clone(),
            inverse: self.matrix.clone(),
            det: 1.0 / self.det,
            eigenvalues: DVector::from_fn(n, |i, _| 1.0 / self.eigenvalues[n - 1 - i]),
        }
    }

    /// `⟨Mx, x⟩`.
    pub fn quadratic_form(&self, x: &DVector<f64>) -> f64 {
        (&self.matrix * x).dot(x)
    }

    /// `⟨M⁻¹x, x⟩`.
    pub fn inverse_quadratic_form(&self, x: &DVector<f64>) -> f64 {
        (&self.inverse * x).dot(x)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

fn sorted_eigenvalues(m: &DMatrix<f64>) -> DVector<f64> {
    let mut ev: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    DVector::from_vec(ev)
}
