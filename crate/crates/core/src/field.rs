//! Scalar fields on `ℝᴺ∖{0}` with optional analytic second-order jets.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::norm::NormSpec;

/// Evaluation contract for a function `ℝᴺ∖{0} → ℝ`.
pub trait ScalarField: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn name(&self) -> String;

    fn smoothness(&self) -> &'static str {
        "smooth away from the origin"
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64>;

    /// Analytic jet, when the field provides one.
    fn jet(&self, _x: &DVector<f64>) -> Option<Result<Jet2>> {
        None
    }

    fn has_jet(&self) -> bool;
}

pub type FieldRef = Arc<dyn ScalarField>;

pub(crate) fn check_point(dim: usize, x: &DVector<f64>) -> Result<()> {
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    Ok(())
}

fn fmt_vec(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", parts.join(","))
}

/// `u(x) = c`.
#[derive(Debug, Clone)]
pub struct Constant {
    pub dim: usize,
    pub c: f64,
}

impl ScalarField for Constant {
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> String {
        format!("constant({})", self.c)
    }
    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_point(self.dim, x)?;
        Ok(self.c)
    }
    fn jet(&self, x: &DVector<f64>) -> Option<Result<Jet2>> {
        Some(check_point(self.dim, x).map(|_| Jet2::constant(self.c, self.dim)))
    }
    fn has_jet(&self) -> bool {
        true
    }
}

/// `u(x) = ⟨Ax, x⟩ + ⟨b, x⟩ + c` with `A` symmetric. Affine when `A = 0`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
}

impl Quadratic {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: f64) -> Result<Self> {
        let n = b.len();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.nrows(),
            });
        }
        Ok(Self {
            a: crate::linalg::symmetrize(&a),
            b,
            c,
        })
    }

    pub fn affine(b: DVector<f64>, c: f64) -> Self {
        let n = b.len();
        Self {
            a: DMatrix::zeros(n, n),
            b,
            c,
        }
    }

    /// `⟨x, x⟩`.
    pub fn squared_length(dim: usize) -> Self {
        Self {
            a: DMatrix::identity(dim, dim),
            b: DVector::zeros(dim),
            c: 0.0,
        }
    }
}

impl ScalarField for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn name(&self) -> String {
        format!("quadratic(b={},c={})", fmt_vec(&self.b), self.c)
    }
    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_point(self.dim(), x)?;
        Ok((&self.a * x).dot(x) + self.b.dot(x) + self.c)
    }
    fn jet(&self, x: &DVector<f64>) -> Option<Result<Jet2>> {
        Some(check_point(self.dim(), x).map(|_| {
            let ax = &self.a * x;
            Jet2::new(
                ax.dot(x) + self.b.dot(x) + self.c,
                &ax * 2.0 + &self.b,
                &self.a * 2.0,
            )
        }))
    }
    fn has_jet(&self) -> bool {
        true
    }
}

/// `u(x) = amplitude · exp(−|x − centre|²/width²)`.
#[derive(Debug, Clone)]
pub struct GaussianBump {
    pub centre: DVector<f64>,
    pub width: f64,
    pub amplitude: f64,
}

impl ScalarField for GaussianBump {
    fn dim(&self) -> usize {
        self.centre.len()
    }
    fn name(&self) -> String {
        format!(
            "gaussian-bump(centre={},width={},amplitude={})",
            fmt_vec(&self.centre),
            self.width,
            self.amplitude
        )
    }
    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_point(self.dim(), x)?;
        let d = x - &self.centre;
        Ok(self.amplitude * (-d.norm_squared() / (self.width * self.width)).exp())
    }
    fn jet(&self, x: &DVector<f64>) -> Option<Result<Jet2>> {
        Some(check_point(self.dim(), x).map(|_| {
            let n = self.dim();
            let s = 1.0 / (self.width * self.width);
            let d = x - &self.centre;
            let v = self.amplitude * (-d.norm_squared() * s).exp();
            let gradient = &d * (-2.0 * s * v);
            let hessian =
                (&d * d.transpose()) * (4.0 * s * s * v) - DMatrix::identity(n, n) * (2.0 * s * v);
            Jet2::new(v, gradient, hessian)
        }))
    }
    fn has_jet(&self) -> bool {
        true
    }
}

/// `u(x) = ⟨a,x⟩⟨b,x⟩⟨c,x⟩ + q(x)` with `q` quadratic.
#[derive(Debug, Clone)]
pub struct Cubic {
    pub a: DVector<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub quadratic: Quadratic,
}

impl ScalarField for Cubic {
    fn dim(&self) -> usize {
        self.a.len()
    }
    fn name(&self) -> String {
        format!(
            "poly3(a={},b={},c={})",
            fmt_vec(&self.a),
            fmt_vec(&self.b),
            fmt_vec(&self.c)
        )
    }
    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_point(self.dim(), x)?;
        Ok(self.a.dot(x) * self.b.dot(x) * self.c.dot(x) + self.quadratic.value(x)?)
    }
    fn jet(&self, x: &DVector<f64>) -> Option<Result<Jet2>> {
        let q = match self.quadratic.jet(x)? {
            Ok(q) => q,
            Err(e) => return Some(Err(e)),
        };
        let (la, lb, lc) = (self.a.dot(x), self.b.dot(x), self.c.dot(x));
        let gradient = &self.a * (lb * lc) + &self.b * (la * lc) + &self.c * (la * lb);
        let sym = |u: &DVector<f64>, v: &DVector<f64>| u * v.transpose() + v * u.transpose();
        let hessian =
            sym(&self.a, &self.b) * lc + sym(&self.a, &self.c) * lb + sym(&self.b, &self.c) * la;
        Some(Ok(Jet2::new(
            la * lb * lc + q.value,
            gradient + q.gradient,
            hessian + q.hessian,
        )))
    }
    fn has_jet(&self) -> bool {
        true
    }
}

/// `u(x) = H(x)^p` for a norm `H`.
#[derive(Debug, Clone)]
pub struct NormPower {
    pub norm: NormSpec,
    pub exponent: f64,
}

impl ScalarField for NormPower {
    fn dim(&self) -> usize {
        self.norm.dim()
    }
    fn name(&self) -> String {
        format!("({})^{}", self.norm, self.exponent)
    }
    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        let h = self.norm.eval(x)?;
        if h == 0.0 {
            return Err(Error::AtOrigin);
        }
        Ok(h.powf(self.exponent))
    }
    /// `∇(H^p) = pH^{p−1}∇H`,
    /// `D²(H^p) = p(p−1)H^{p−2}∇H⊗∇H + pH^{p−1}D²H`.
    fn jet(&self, x: &DVector<f64>) -> Option<Result<Jet2>> {
        Some(self.norm.jet(x).map(|j| {
            let p = self.exponent;
            let hp1 = j.value.powf(p - 1.0);
            let hp2 = j.value.powf(p - 2.0);
            let hessian = (&j.gradient * j.gradient.transpose()) * (p * (p - 1.0) * hp2)
                + &j.hessian * (p * hp1);
            Jet2::new(j.value.powf(p), &j.gradient * (p * hp1), hessian)
        }))
    }
    fn has_jet(&self) -> bool {
        true
    }
}

/// Value-only field backed by a closure.
pub struct FnField<F> {
    dim: usize,
    name: String,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&DVector<f64>) -> f64 + Send + Sync,
{
    pub fn new(dim: usize, name: impl Into<String>, f: F) -> Self {
        Self {
            dim,
            name: name.into(),
            f,
        }
    }
}

impl<F> fmt::Debug for FnField<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField").field("name", &self.name).finish()
    }
}

impl<F> ScalarField for FnField<F>
where
    F: Fn(&DVector<f64>) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> String {
        self.name.clone()
    }
    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_point(self.dim, x)?;
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                field: self.name.clone(),
            })
        }
    }
    fn has_jet(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::SpdMatrix;
    use crate::operators::{numeric_jet, JetRequest};

    fn check_against_fd(field: &dyn ScalarField, x: &DVector<f64>) {
        let analytic = field.jet(x).unwrap().unwrap();
        let numeric = numeric_jet(&JetRequest::new(field, x)).unwrap();
        let diff = analytic.max_abs_diff(&numeric.jet);
        assert!(diff < 1e-6, "{}: {diff}", field.name());
    }

    #[test]
    fn analytic_jets_match_differences() {
        let x = DVector::from_vec(vec![0.7, -0.4, 1.1]);
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, -0.3, 0.2, 0.5, 0.1, -0.3, 0.1, 2.0]);
        let quad = Quadratic::new(a, DVector::from_vec(vec![0.3, -1.0, 0.2]), 0.5).unwrap();
        check_against_fd(&quad, &x);
        check_against_fd(
            &GaussianBump {
                centre: DVector::from_vec(vec![0.2, 0.1, 0.9]),
                width: 0.8,
                amplitude: 1.5,
            },
            &x,
        );
        check_against_fd(
            &Cubic {
                a: DVector::from_vec(vec![1.0, 0.5, -0.2]),
                b: DVector::from_vec(vec![0.0, 1.0, 0.3]),
                c: DVector::from_vec(vec![-0.4, 0.2, 1.0]),
                quadratic: quad.clone(),
            },
            &x,
        );
        let m = SpdMatrix::from_rows(&[
            vec![2.0, 0.3, 0.0],
            vec![0.3, 1.0, 0.1],
            vec![0.0, 0.1, 1.5],
        ])
        .unwrap();
        check_against_fd(
            &NormPower {
                norm: NormSpec::riemannian(m),
                exponent: -1.0,
            },
            &x,
        );
    }

    #[test]
    fn fn_field_rejects_non_finite() {
        let f = FnField::new(2, "bad", |_x: &DVector<f64>| f64::NAN);
        assert!(matches!(
            f.value(&DVector::from_vec(vec![1.0, 0.0])),
            Err(Error::NonFinite { .. })
        ));
        assert!(f.value(&DVector::from_vec(vec![1.0])).is_err());
    }
}
