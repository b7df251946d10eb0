//! Finsler norms: the Riemannian family `H(ξ) = √⟨Mξ,ξ⟩`, the Euclidean
//! norm, and the planar quartic norm, with first and second derivatives
//! and dual norms.
//!
//! The gradient of a norm is 0-homogeneous in the signed sense:
//! `∇H(tξ) = sign(t)∇H(ξ)`.

mod quartic;
mod spd;
mod text;

use nalgebra::DVector;

pub use spd::SpdMatrix;

use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::linalg::orthogonal_complement;
use crate::sampling;

/// Iteration cap of the numeric dual solver.
pub const DUAL_MAX_ITERATIONS: usize = quartic::DUAL_MAX_ITERATIONS;
/// KKT residual at which the numeric dual solver stops.
pub const DUAL_KKT_TOLERANCE: f64 = quartic::DUAL_KKT_TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    Riemannian,
    Euclidean,
    /// `(x₁⁴ + 3x₁²x₂² + x₂⁴)^{1/4}` on `ℝ²`.
    Quartic,
    /// Dual of the quartic norm, evaluated by numeric maximization.
    QuarticDual,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Riemannian(SpdMatrix),
    /// Carries the identity so that it shares every Riemannian code path.
    Euclidean(SpdMatrix),
    Quartic,
    QuarticDual,
}

/// An immutable Finsler norm descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSpec {
    repr: Repr,
}

impl NormSpec {
    pub fn riemannian(m: SpdMatrix) -> Self {
        Self {
            repr: Repr::Riemannian(m),
        }
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Ok(Self {
            repr: Repr::Euclidean(SpdMatrix::identity(dim)?),
        })
    }

    pub fn quartic() -> Self {
        Self {
            repr: Repr::Quartic,
        }
    }

    pub fn kind(&self) -> NormKind {
        match self.repr {
            Repr::Riemannian(_) => NormKind::Riemannian,
            Repr::Euclidean(_) => NormKind::Euclidean,
            Repr::Quartic => NormKind::Quartic,
            Repr::QuarticDual => NormKind::QuarticDual,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Riemannian(m) | Repr::Euclidean(m) => m.dim(),
            Repr::Quartic | Repr::QuarticDual => 2,
        }
    }

    /// The matrix `M` for Riemannian and Euclidean norms.
    pub fn matrix(&self) -> Option<&SpdMatrix> {
        match &self.repr {
            Repr::Riemannian(m) | Repr::Euclidean(m) => Some(m),
            _ => None,
        }
    }

    /// True when `H(ξ) = √⟨Mξ,ξ⟩` for some SPD `M` (Euclidean included).
    pub fn is_riemannian(&self) -> bool {
        self.matrix().is_some()
    }

    /// True for norms whose dual requires the numeric maximization.
    pub fn has_numeric_dual(&self) -> bool {
        matches!(self.repr, Repr::Quartic | Repr::QuarticDual)
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `H(x)`; zero at the origin.
    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        Ok(match &self.repr {
            Repr::Riemannian(m) | Repr::Euclidean(m) => m.quadratic_form(x).sqrt(),
            Repr::Quartic => quartic::value(x),
            Repr::QuarticDual => {
                if x.iter().all(|c| *c == 0.0) {
                    0.0
                } else {
                    quartic::dual(x)?.value
                }
            }
        })
    }

    /// Value, gradient and Hessian of `H` at `x ≠ 0`.
    ///
    /// Riemannian: `∇H = Mx/H`, `D²H = M/H − Mx⊗Mx/H³`.
    pub fn jet(&self, x: &DVector<f64>) -> Result<Jet2> {
        self.check_dim(x)?;
        if x.iter().all(|c| *c == 0.0) {
            return Err(Error::AtOrigin);
        }
        match &self.repr {
            Repr::Riemannian(m) | Repr::Euclidean(m) => {
                let mx = m.matrix() * x;
                let q = mx.dot(x);
                let h = q.sqrt();
                let hessian = m.matrix() / h - &mx * mx.transpose() / (q * h);
                Ok(Jet2::new(h, mx / h, hessian))
            }
            Repr::Quartic => Ok(quartic::jet(x)),
            Repr::QuarticDual => quartic::dual_jet(x),
        }
    }

    /// `∇H(x)`, the cheaper half of [`NormSpec::jet`].
    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x)?;
        if x.iter().all(|c| *c == 0.0) {
            return Err(Error::AtOrigin);
        }
        match &self.repr {
            Repr::Riemannian(m) | Repr::Euclidean(m) => {
                let mx = m.matrix() * x;
                let h = mx.dot(x).sqrt();
                Ok(mx / h)
            }
            Repr::Quartic => Ok(quartic::jet(x).gradient),
            Repr::QuarticDual => Ok(quartic::dual(x)?.maximizer),
        }
    }

    /// `H°(x) = sup{⟨ξ,x⟩ : H(ξ) ≤ 1}`; zero at the origin.
    pub fn dual_norm(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        match &self.repr {
            Repr::Riemannian(m) | Repr::Euclidean(m) => Ok(m.inverse_quadratic_form(x).sqrt()),
            Repr::Quartic => {
                if x.iter().all(|c| *c == 0.0) {
                    Ok(0.0)
                } else {
                    Ok(quartic::dual(x)?.value)
                }
            }
            Repr::QuarticDual => Ok(quartic::value(x)),
        }
    }

    /// `∇H°(x)`; for numeric duals this is the maximizer itself.
    pub fn dual_gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.dual().gradient(x)
    }

    /// The dual norm as a norm of its own: `M ↦ M⁻¹`, Euclidean is
    /// self-dual, the quartic maps to its numeric dual and back.
    pub fn dual(&self) -> NormSpec {
        let repr = match &self.repr {
            Repr::Riemannian(m) => Repr::Riemannian(m.inverted()),
            Repr::Euclidean(m) => Repr::Euclidean(m.clone()),
            Repr::Quartic => Repr::QuarticDual,
            Repr::QuarticDual => Repr::Quartic,
        };
        NormSpec { repr }
    }

    /// Constants with `c1|ξ| ≤ H(ξ) ≤ c2|ξ|`.
    pub fn equivalence_constants(&self) -> Result<(f64, f64)> {
        match &self.repr {
            Repr::Riemannian(m) | Repr::Euclidean(m) => {
                Ok((m.min_eigenvalue().sqrt(), m.max_eigenvalue().sqrt()))
            }
            Repr::Quartic | Repr::QuarticDual => {
                let ratio = |t: f64| {
                    let d = DVector::from_vec(vec![t.cos(), t.sin()]);
                    self.eval(&d)
                };
                circle_extrema(ratio)
            }
        }
    }

    /// Smallest tangential curvature `⟨D²H(ξ)v, v⟩` over sampled `ξ` on the
    /// unit sphere of `H` and unit `v ⊥ ∇H(ξ)`.
    pub fn ellipticity(&self, samples: usize) -> Result<f64> {
        if samples == 0 {
            return Err(Error::InvalidArgument(
                "ellipticity needs at least one sample".into(),
            ));
        }
        let dim = self.dim();
        let dirs = if dim == 2 {
            sampling::circle_directions(samples)
        } else {
            let mut d: Vec<DVector<f64>> = (0..dim)
                .map(|i| DVector::from_fn(dim, |k, _| if k == i { 1.0 } else { 0.0 }))
                .collect();
            d.extend(sampling::sphere_directions(dim, samples, 0));
            d
        };
        let mut lambda = f64::INFINITY;
        for d in dirs {
            let xi = &d / self.eval(&d)?;
            let jet = self.jet(&xi)?;
            let basis = orthogonal_complement(&jet.gradient);
            let tangential = basis.transpose() * &jet.hessian * &basis;
            let min_ev = crate::linalg::symmetrize(&tangential)
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            lambda = lambda.min(min_ev);
        }
        Ok(lambda)
    }
}

/// Min and max of a positive function of the angle: dense sampling followed
/// by golden-section refinement around the best nodes.
fn circle_extrema<F>(f: F) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    const NODES: usize = 4096;
    let step = std::f64::consts::TAU / NODES as f64;
    let mut vals = Vec::with_capacity(NODES);
    for k in 0..NODES {
        vals.push(f(k as f64 * step)?);
    }
    let (imin, _) =
        vals.iter().enumerate().fold(
            (0, f64::INFINITY),
            |a, (i, &v)| if v < a.1 { (i, v) } else { a },
        );
    let (imax, _) =
        vals.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |a, (i, &v)| if v > a.1 { (i, v) } else { a },
        );
    let lo = golden(&f, imin as f64 * step, step, false)?.min(vals[imin]);
    let hi = golden(&f, imax as f64 * step, step, true)?.max(vals[imax]);
    Ok((lo, hi))
}

fn golden<F>(f: &F, centre: f64, half_width: f64, maximize: bool) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let sign = if maximize { -1.0 } else { 1.0 };
    let g = |t: f64| f(t).map(|v| sign * v);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (centre - half_width, centre + half_width);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (g(c)?, g(d)?);
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = g(d)?;
        }
    }
    Ok(sign * fc.min(fd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn v(c: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(c)
    }

    fn diag41() -> NormSpec {
        NormSpec::riemannian(SpdMatrix::diagonal(&[4.0, 1.0]).unwrap())
    }

    #[test]
    fn eval_examples() {
        assert_eq!(diag41().eval(&v(&[1.0, 0.0])).unwrap(), 2.0);
        assert_eq!(
            NormSpec::euclidean(2)
                .unwrap()
                .eval(&v(&[3.0, 4.0]))
                .unwrap(),
            5.0
        );
        let q = NormSpec::quartic().eval(&v(&[1.0, 1.0])).unwrap();
        assert!((q - 1.495_35).abs() < 1e-5);
        assert_eq!(diag41().eval(&v(&[0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn eval_rejects_wrong_dimension() {
        assert_eq!(
            diag41().eval(&v(&[1.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 3
            })
        );
    }

    #[test]
    fn jet_examples() {
        let j = diag41().jet(&v(&[1.0, 0.0])).unwrap();
        assert_eq!(j.gradient, v(&[2.0, 0.0]));
        let e = NormSpec::euclidean(2)
            .unwrap()
            .jet(&v(&[0.0, 1.0]))
            .unwrap();
        assert_eq!(e.gradient, v(&[0.0, 1.0]));
        assert_eq!(
            e.hessian,
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])
        );
        let q = NormSpec::quartic().jet(&v(&[1.0, 0.0])).unwrap();
        assert_eq!(q.value, 1.0);
        assert_eq!(q.gradient, v(&[1.0, 0.0]));
        assert_eq!(diag41().jet(&v(&[0.0, 0.0])), Err(Error::AtOrigin));
    }

    #[test]
    fn dual_examples() {
        assert_eq!(diag41().dual_norm(&v(&[2.0, 0.0])).unwrap(), 1.0);
        assert_eq!(
            NormSpec::euclidean(2)
                .unwrap()
                .dual_norm(&v(&[3.0, 4.0]))
                .unwrap(),
            5.0
        );
        let d = NormSpec::quartic().dual_norm(&v(&[1.0, 0.0])).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        assert_eq!(diag41().dual_norm(&v(&[0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(NormSpec::quartic().dual_norm(&v(&[0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn dual_spec_examples() {
        let d = diag41().dual();
        assert_eq!(
            d.matrix().unwrap().matrix(),
            &DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 1.0])
        );
        assert_eq!(d.dual(), diag41());
        let e = NormSpec::euclidean(2).unwrap();
        assert_eq!(e.dual(), e);
        assert_eq!(NormSpec::quartic().dual().kind(), NormKind::QuarticDual);
        assert_eq!(NormSpec::quartic().dual().dual(), NormSpec::quartic());
    }

    #[test]
    fn equivalence_examples() {
        assert_eq!(diag41().equivalence_constants().unwrap(), (1.0, 2.0));
        assert_eq!(
            NormSpec::euclidean(3)
                .unwrap()
                .equivalence_constants()
                .unwrap(),
            (1.0, 1.0)
        );
        let (c1, c2) = NormSpec::quartic().equivalence_constants().unwrap();
        assert!((c1 - 1.0).abs() < 1e-12);
        // Attained on the diagonal: (5/4)^{1/4}.
        assert!((c2 - 1.25f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn ellipticity_examples() {
        let e = NormSpec::euclidean(2).unwrap().ellipticity(37).unwrap();
        assert!((e - 1.0).abs() < 1e-10);
        // λ_min(M), attained at the λ_max eigendirection (angle 0 is sampled).
        let r = diag41().ellipticity(64).unwrap();
        assert!((r - 1.0).abs() < 1e-10, "{r}");
        assert!(NormSpec::quartic().ellipticity(256).unwrap() > 0.0);
        assert!(NormSpec::quartic().dual().ellipticity(64).unwrap() > 0.0);
        assert!(diag41().ellipticity(0).is_err());
    }
}
