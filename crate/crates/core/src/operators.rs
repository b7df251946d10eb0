//! Pointwise anisotropic operators on second-order jets, and the numeric jet
//! builder used for composed fields.
//!
//! Both operators are in divergence form `div(a(∇u))`; expanding the
//! divergence gives `trace(Da(∇u)·D²u)`, which is what is evaluated here.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::jet::Jet2;
use crate::linalg::trace_product;
use crate::norm::NormSpec;

fn is_zero(v: &DVector<f64>) -> bool {
    v.iter().all(|c| *c == 0.0)
}

fn check_jet(spec: &NormSpec, jet: &Jet2) -> Result<()> {
    if jet.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: jet.dim(),
        });
    }
    Ok(())
}

/// `H(ξ)∇H(ξ)`, the flux of the anisotropic Laplacian (`Mξ` when Riemannian).
pub fn flux(spec: &NormSpec, xi: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(m) = spec.matrix() {
        return Ok(m.matrix() * xi);
    }
    if is_zero(xi) {
        return Ok(DVector::zeros(xi.len()));
    }
    let j = spec.jet(xi)?;
    Ok(j.gradient * j.value)
}

/// `H(ξ)^{N−1}∇H(ξ)`, the flux of the Finsler N-Laplacian.
pub fn n_flux(spec: &NormSpec, xi: &DVector<f64>) -> Result<DVector<f64>> {
    if is_zero(xi) {
        return Ok(DVector::zeros(xi.len()));
    }
    let n = spec.dim() as i32;
    let j = spec.jet(xi)?;
    Ok(j.gradient * j.value.powi(n - 1))
}

/// `Δ^H u = trace(A(∇u)·D²u)` with `A = H·D²H + ∇H⊗∇H = ½D²(H²)`.
/// For Riemannian norms `A ≡ M`, also at critical points.
pub fn anisotropic_laplacian(spec: &NormSpec, jet: &Jet2) -> Result<f64> {
    check_jet(spec, jet)?;
    if let Some(m) = spec.matrix() {
        return Ok(trace_product(m.matrix(), &jet.hessian));
    }
    if is_zero(&jet.gradient) {
        return Err(Error::ZeroGradient);
    }
    let h = spec.jet(&jet.gradient)?;
    let a = &h.hessian * h.value + &h.gradient * h.gradient.transpose();
    Ok(trace_product(&a, &jet.hessian))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NLaplacian {
    pub value: f64,
    /// Set when `∇u = 0` and the value is the continuous extension `0`.
    pub degenerate: bool,
}

/// `Δ^H_N u = trace(B(∇u)·D²u)` with
/// `B = H^{N−1}D²H + (N−1)H^{N−2}∇H⊗∇H`; Riemannian:
/// `B = q^{(N−2)/2}M + (N−2)q^{(N−4)/2}Mξ⊗Mξ`, `q = ⟨Mξ,ξ⟩`.
pub fn finsler_n_laplacian(spec: &NormSpec, jet: &Jet2, order: usize) -> Result<NLaplacian> {
    check_jet(spec, jet)?;
    let dim = spec.dim();
    if order != dim {
        return Err(Error::OperatorOrder { order, dim });
    }
    let xi = &jet.gradient;
    if is_zero(xi) {
        if dim > 2 {
            return Ok(NLaplacian {
                value: 0.0,
                degenerate: true,
            });
        }
        return anisotropic_laplacian(spec, jet).map(|value| NLaplacian {
            value,
            degenerate: false,
        });
    }
    let b = if let Some(m) = spec.matrix() {
        let mxi = m.matrix() * xi;
        let q = mxi.dot(xi);
        let e = (dim as f64 - 2.0) / 2.0;
        m.matrix() * q.powf(e) + (&mxi * mxi.transpose()) * ((dim as f64 - 2.0) * q.powf(e - 1.0))
    } else {
        let h = spec.jet(xi)?;
        let n = dim as i32;
        &h.hessian * h.value.powi(n - 1)
            + (&h.gradient * h.gradient.transpose()) * ((dim as f64 - 1.0) * h.value.powi(n - 2))
    };
    Ok(NLaplacian {
        value: trace_product(&b, &jet.hessian),
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// `ε^{1/8} · |x|`: balances the `O(h⁶)` truncation left after three
    /// Richardson levels against the `ε/h²` rounding of the Hessian stencil,
    /// scaled with the distance to the origin where transformed fields
    /// vary on that length scale.
    Auto,
    Fixed(f64),
}

/// Default number of Richardson levels.
pub const DEFAULT_REFINEMENT: usize = 3;

/// Base step of [`Step::Auto`] before scaling by `|x|`.
pub fn auto_step_base() -> f64 {
    f64::EPSILON.powf(0.125)
}

#[derive(Clone, Copy)]
pub struct JetRequest<'a> {
    pub field: &'a dyn ScalarField,
    pub point: &'a DVector<f64>,
    pub step: Step,
    /// Number of Richardson levels, at least 1 (1 = plain central differences).
    pub refinement: usize,
}

impl<'a> JetRequest<'a> {
    pub fn new(field: &'a dyn ScalarField, point: &'a DVector<f64>) -> Self {
        Self {
            field,
            point,
            step: Step::Auto,
            refinement: DEFAULT_REFINEMENT,
        }
    }

    pub fn step(mut self, step: Step) -> Self {
        self.step = step;
        self
    }

    pub fn refinement(mut self, levels: usize) -> Self {
        self.refinement = levels;
        self
    }

    pub fn resolved_step(&self) -> f64 {
        match self.step {
            Step::Auto => auto_step_base() * self.point.norm(),
            Step::Fixed(h) => h,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericJet {
    pub jet: Jet2,
    /// Largest entry of the difference between the last two extrapolation
    /// levels; `None` with a single level.
    pub error_estimate: Option<f64>,
    pub step: f64,
}

/// Central-difference gradient and Hessian at one step size.
fn central_jet(
    field: &dyn ScalarField,
    x: &DVector<f64>,
    f0: f64,
    h: f64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = x.len();
    let eval = |dx: &[(usize, f64)]| -> Result<f64> {
        let mut p = x.clone();
        for &(i, d) in dx {
            p[i] += d;
        }
        let v = field.value(&p)?;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                field: field.name(),
            });
        }
        Ok(v)
    };
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    for i in 0..n {
        plus[i] = eval(&[(i, h)])?;
        minus[i] = eval(&[(i, -h)])?;
    }
    let gradient = DVector::from_fn(n, |i, _| (plus[i] - minus[i]) / (2.0 * h));
    let mut hessian = DMatrix::zeros(n, n);
    for i in 0..n {
        hessian[(i, i)] = ((plus[i] - f0) + (minus[i] - f0)) / (h * h);
        for j in (i + 1)..n {
            let pp = eval(&[(i, h), (j, h)])?;
            let pm = eval(&[(i, h), (j, -h)])?;
            let mp = eval(&[(i, -h), (j, h)])?;
            let mm = eval(&[(i, -h), (j, -h)])?;
            let v = ((pp - pm) - (mp - mm)) / (4.0 * h * h);
            hessian[(i, j)] = v;
            hessian[(j, i)] = v;
        }
    }
    Ok((gradient, hessian))
}

/// Central differences on steps `h, h/2, …` combined by Richardson
/// extrapolation in `h²`.
pub fn numeric_jet(req: &JetRequest<'_>) -> Result<NumericJet> {
    let x = req.point;
    crate::field::check_point(req.field.dim(), x)?;
    if req.refinement == 0 {
        return Err(Error::InvalidArgument(
            "refinement must be at least 1".into(),
        ));
    }
    let h = req.resolved_step();
    if h.is_nan() || h <= 0.0 || h.is_infinite() {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {h}"
        )));
    }
    let distance = x.norm();
    // Widest stencil point is at distance √2·h from x.
    if distance <= 2.0 * h {
        return Err(Error::StencilCrossesOrigin { step: h, distance });
    }
    let f0 = req.field.value(x)?;
    if !f0.is_finite() {
        return Err(Error::NonFinite {
            field: req.field.name(),
        });
    }

    let levels = req.refinement;
    let mut table: Vec<Vec<(DVector<f64>, DMatrix<f64>)>> = Vec::with_capacity(levels);
    for level in 0..levels {
        let step = h / f64::powi(2.0, level as i32);
        let mut row = vec![central_jet(req.field, x, f0, step)?];
        for k in 1..=level {
            let factor = 1.0 / (f64::powi(4.0, k as i32) - 1.0);
            let (g_fine, h_fine) = &row[k - 1];
            let (g_coarse, h_coarse) = &table[level - 1][k - 1];
            let g = g_fine + (g_fine - g_coarse) * factor;
            let hm = h_fine + (h_fine - h_coarse) * factor;
            row.push((g, hm));
        }
        table.push(row);
    }
    let (gradient, hessian) = table[levels - 1][levels - 1].clone();
    let error_estimate = (levels > 1).then(|| {
        let (g_prev, h_prev) = &table[levels - 2][levels - 2];
        (&gradient - g_prev).amax().max((&hessian - h_prev).amax())
    });
    Ok(NumericJet {
        jet: Jet2::new(f0, gradient, crate::linalg::symmetrize(&hessian)),
        error_estimate,
        step: h,
    })
}

/// Analytic jet when the field has one, otherwise a numeric jet with the
/// default request.
pub fn best_jet(field: &dyn ScalarField, x: &DVector<f64>) -> Result<Jet2> {
    match field.jet(x) {
        Some(j) => j,
        None => numeric_jet(&JetRequest::new(field, x)).map(|n| n.jet),
    }
}
