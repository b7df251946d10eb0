//! The anisotropic Kelvin map `T_H(ξ) = ∇H(ξ)/H(ξ)`, its inverse
//! `T_{H°}`, its Jacobian, and the pullbacks `û = H^{2−N}·(u∘T_H)` and
//! `u* = u∘T_H`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::field::{FieldRef, ScalarField};
use crate::jet::Jet2;
use crate::linalg::determinant;
use crate::norm::NormSpec;
use crate::sampling;

/// Directions used by the construction-time duality self-check.
const SELF_CHECK_POINTS: usize = 16;

/// A norm together with its dual; every transform in this module needs both.
#[derive(Debug, Clone, PartialEq)]
pub struct KelvinContext {
    spec: NormSpec,
    dual: NormSpec,
}

impl KelvinContext {
    /// Builds the context and checks `H°(∇H(x)) = 1 = H(∇H°(x))` on a fixed
    /// sample.
    pub fn new(spec: NormSpec) -> Result<Self> {
        let dual = spec.dual();
        let tol = if spec.has_numeric_dual() { 1e-6 } else { 1e-10 };
        for x in sampling::sphere_directions(spec.dim(), SELF_CHECK_POINTS, 0) {
            let a = dual.eval(&spec.gradient(&x)?)?;
            let b = spec.eval(&dual.gradient(&x)?)?;
            if (a - 1.0).abs() > tol || (b - 1.0).abs() > tol {
                return Err(Error::InconsistentDual(format!(
                    "H°(∇H(x)) = {a}, H(∇H°(x)) = {b} at x = {:?}",
                    x.as_slice()
                )));
            }
        }
        Ok(Self { spec, dual })
    }

    pub fn spec(&self) -> &NormSpec {
        &self.spec
    }

    pub fn dual(&self) -> &NormSpec {
        &self.dual
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// The context of the dual norm, whose Kelvin map is this one's inverse.
    pub fn dual_context(&self) -> KelvinContext {
        KelvinContext {
            spec: self.dual.clone(),
            dual: self.spec.clone(),
        }
    }

    /// `T_H(x) = ∇H(x)/H(x)`; `Mx/⟨Mx,x⟩` in the Riemannian case.
    pub fn map(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if let Some(m) = self.spec.matrix() {
            check_nonzero(&self.spec, x)?;
            let mx = m.matrix() * x;
            let q = mx.dot(x);
            return Ok(mx / q);
        }
        let g = self.spec.gradient(x)?;
        Ok(g / self.spec.eval(x)?)
    }

    /// `T_{H°}(y)`.
    pub fn inverse(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.dual_context().map(y)
    }

    /// `DT_H(x) = (H·D²H − ∇H⊗∇H)/H²`; Riemannian:
    /// `(M − 2Mx⊗Mx/H²)/H²`.
    pub fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        if let Some(m) = self.spec.matrix() {
            check_nonzero(&self.spec, x)?;
            let mx = m.matrix() * x;
            let q = mx.dot(x);
            return Ok((m.matrix() - (&mx * mx.transpose()) * (2.0 / q)) / q);
        }
        let j = self.spec.jet(x)?;
        let h2 = j.value * j.value;
        Ok((&j.hessian * j.value - &j.gradient * j.gradient.transpose()) / h2)
    }

    /// Signed `det DT_H(x)`.
    pub fn jacobian_signed_det(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(determinant(&self.jacobian(x)?))
    }

    /// `J(x) = |det DT_H(x)|`.
    pub fn jacobian_det(&self, x: &DVector<f64>) -> Result<f64> {
        self.jacobian_signed_det(x).map(f64::abs)
    }

    /// `H(x)^{2N}·J(x)`: equal to `det M` for Riemannian norms.
    pub fn det_invariant(&self, x: &DVector<f64>) -> Result<f64> {
        let h = self.spec.eval(x)?;
        let n = self.dim() as i32;
        Ok(h.powi(2 * n) * self.jacobian_det(x)?)
    }

    /// `Σᵢ pᵢ D²(T_H)ᵢ(y)`, the curvature term of the chain rule for `u∘T_H`.
    /// Available for Riemannian norms only. With `a = My`, `q = ⟨a,y⟩`,
    /// `b = Mp`, `c = ⟨p,a⟩`:
    /// `−2(b⊗a + a⊗b)/q² − 2cM/q² + 8c·a⊗a/q³`.
    pub fn map_curvature(&self, y: &DVector<f64>, p: &DVector<f64>) -> Result<DMatrix<f64>> {
        let m = self.riemannian_matrix("second derivative of the Kelvin map")?;
        check_nonzero(&self.spec, y)?;
        let a = m * y;
        let q = a.dot(y);
        let b = m * p;
        let c = p.dot(&a);
        let q2 = q * q;
        let ba = &b * a.transpose();
        Ok(-(&ba + ba.transpose()) * (2.0 / q2) - m * (2.0 * c / q2)
            + (&a * a.transpose()) * (8.0 * c / (q2 * q)))
    }

    fn riemannian_matrix(&self, what: &'static str) -> Result<&DMatrix<f64>> {
        self.spec
            .matrix()
            .map(|m| m.matrix())
            .ok_or_else(|| Error::NotRiemannian {
                what,
                norm: self.spec.to_string(),
            })
    }

    /// Jet of `u∘T_H` at `y` from the jet of `u` at `T_H(y)`:
    /// gradient `DT·∇u`, Hessian `DT·D²u·DT + Σ ∂ᵢu D²(T_H)ᵢ`.
    pub fn pullback_jet(&self, y: &DVector<f64>, u_jet: &Jet2) -> Result<Jet2> {
        let dt = self.jacobian(y)?;
        let gradient = &dt * &u_jet.gradient;
        let curvature = self.map_curvature(y, &u_jet.gradient)?;
        let hessian = &dt * &u_jet.hessian * &dt + curvature;
        Ok(Jet2::new(
            u_jet.value,
            gradient,
            crate::linalg::symmetrize(&hessian),
        ))
    }

    /// `û = H^{2−N}·(u∘T_H)`.
    pub fn hat(&self, u: FieldRef) -> Result<FieldRef> {
        self.check_field(&*u)?;
        Ok(Arc::new(HatField {
            ctx: self.clone(),
            inner: u,
        }))
    }

    /// `u* = u∘T_H`.
    pub fn star(&self, u: FieldRef) -> Result<FieldRef> {
        self.check_field(&*u)?;
        Ok(Arc::new(StarField {
            ctx: self.clone(),
            inner: u,
        }))
    }

    fn check_field(&self, u: &dyn ScalarField) -> Result<()> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.dim(),
            });
        }
        Ok(())
    }
}

fn check_nonzero(spec: &NormSpec, x: &DVector<f64>) -> Result<()> {
    if x.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: x.len(),
        });
    }
    if x.iter().all(|c| *c == 0.0) {
        return Err(Error::AtOrigin);
    }
    Ok(())
}

/// `det(I − 2y⊗y/|y|²)`; the reflection has determinant `−1` and its
/// absolute value is the constant 1 behind the Riemannian determinant law.
pub fn reflection_det(y: &DVector<f64>) -> f64 {
    let n = y.len();
    let r = DMatrix::identity(n, n) - (y * y.transpose()) * (2.0 / y.norm_squared());
    determinant(&r)
}

#[derive(Debug)]
struct StarField {
    ctx: KelvinContext,
    inner: FieldRef,
}

impl ScalarField for StarField {
    fn dim(&self) -> usize {
        self.ctx.dim()
    }

    fn name(&self) -> String {
        format!("star[{}]({})", self.ctx.spec, self.inner.name())
    }

    fn value(&self, y: &DVector<f64>) -> Result<f64> {
        self.inner.value(&self.ctx.map(y)?)
    }

    fn jet(&self, y: &DVector<f64>) -> Option<Result<Jet2>> {
        if !self.has_jet() {
            return None;
        }
        Some((|| {
            let x = self.ctx.map(y)?;
            let uj = self.inner.jet(&x).expect("inner field has a jet")?;
            self.ctx.pullback_jet(y, &uj)
        })())
    }

    fn has_jet(&self) -> bool {
        self.ctx.spec.is_riemannian() && self.inner.has_jet()
    }
}

#[derive(Debug)]
struct HatField {
    ctx: KelvinContext,
    inner: FieldRef,
}

impl ScalarField for HatField {
    fn dim(&self) -> usize {
        self.ctx.dim()
    }

    fn name(&self) -> String {
        format!("hat[{}]({})", self.ctx.spec, self.inner.name())
    }

    fn value(&self, y: &DVector<f64>) -> Result<f64> {
        let h = self.ctx.spec.eval(y)?;
        if h == 0.0 {
            return Err(Error::AtOrigin);
        }
        let n = self.dim() as i32;
        Ok(self.inner.value(&self.ctx.map(y)?)? * h.powi(2 - n))
    }

    /// Product rule on `w·u*` with `w = q^{(2−N)/2}`, `q = ⟨My,y⟩`:
    /// `∇w = (2−N)q^{e−1}My`, `D²w = (2−N)[2(e−1)q^{e−2}My⊗My + q^{e−1}M]`.
    fn jet(&self, y: &DVector<f64>) -> Option<Result<Jet2>> {
        if !self.has_jet() {
            return None;
        }
        Some((|| {
            let m = self
                .ctx
                .riemannian_matrix("analytic jet of the Kelvin transform")?;
            let x = self.ctx.map(y)?;
            let uj = self.inner.jet(&x).expect("inner field has a jet")?;
            let star = self.ctx.pullback_jet(y, &uj)?;
            let n = self.dim() as f64;
            let a = m * y;
            let q = a.dot(y);
            let e = (2.0 - n) / 2.0;
            let w = q.powf(e);
            let dw = &a * ((2.0 - n) * q.powf(e - 1.0));
            let d2w = ((&a * a.transpose()) * (2.0 * (e - 1.0) * q.powf(e - 2.0))
                + m * q.powf(e - 1.0))
                * (2.0 - n);
            let cross = &dw * star.gradient.transpose();
            let hessian = d2w * star.value + &cross + cross.transpose() + &star.hessian * w;
            let gradient = &dw * star.value + &star.gradient * w;
            Ok(Jet2::new(
                w * star.value,
                gradient,
                crate::linalg::symmetrize(&hessian),
            ))
        })())
    }

    fn has_jet(&self) -> bool {
        self.ctx.spec.is_riemannian() && self.inner.has_jet()
    }
}
