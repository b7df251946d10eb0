use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Value, gradient and Hessian of a scalar field at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl Jet2 {
    pub fn new(value: f64, gradient: DVector<f64>, hessian: DMatrix<f64>) -> Self {
        debug_assert_eq!(gradient.len(), hessian.nrows());
        debug_assert_eq!(hessian.nrows(), hessian.ncols());
        Self {
            value,
            gradient,
            hessian,
        }
    }

    pub fn constant(value: f64, dim: usize) -> Self {
        Self::new(value, DVector::zeros(dim), DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    /// Largest entry of `H − Hᵀ` in absolute value.
    pub fn asymmetry(&self) -> f64 {
        (&self.hessian - self.hessian.transpose()).amax()
    }

    /// Largest absolute difference across value, gradient and Hessian.
    pub fn max_abs_diff(&self, other: &Jet2) -> f64 {
        let dv = (self.value - other.value).abs();
        let dg = (&self.gradient - &other.gradient).amax();
        let dh = (&self.hessian - &other.hessian).amax();
        dv.max(dg).max(dh)
    }
}
