//! Manufactured solutions: pick a smooth `u`, define the source by applying
//! the operator to its analytic jet.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::field::{Cubic, FieldRef, GaussianBump, Quadratic, ScalarField};
use crate::norm::NormSpec;
use crate::operators::{anisotropic_laplacian, finsler_n_laplacian};
use crate::sampling::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Quadratic,
    GaussianBump,
    Poly3,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 3] = [
        FamilyKind::Quadratic,
        FamilyKind::GaussianBump,
        FamilyKind::Poly3,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            FamilyKind::Quadratic => "quadratic",
            FamilyKind::GaussianBump => "gaussian-bump",
            FamilyKind::Poly3 => "poly3",
        }
    }
}

/// A manufactured solution together with its parameters.
#[derive(Debug, Clone)]
pub enum Family {
    Quadratic(Quadratic),
    GaussianBump(GaussianBump),
    Poly3(Cubic),
}

fn normal_vec<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

fn normal_sym<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        scale * rng.sample::<f64, _>(StandardNormal)
    });
    (&g + g.transpose()) * 0.5
}

impl Family {
    /// Parameters drawn from `seed`; each kind uses its own stream.
    pub fn seeded(kind: FamilyKind, dim: usize, seed: u64) -> Family {
        match kind {
            FamilyKind::Quadratic => {
                let mut rng = seeded_rng(seed, 0x51);
                let a = normal_sym(&mut rng, dim, 0.5) + DMatrix::identity(dim, dim);
                let b = normal_vec(&mut rng, dim, 0.5);
                let c = rng.random_range(-1.0..1.0);
                Family::Quadratic(Quadratic::new(a, b, c).expect("consistent dimensions"))
            }
            FamilyKind::GaussianBump => {
                let mut rng = seeded_rng(seed, 0x52);
                let centre = normal_vec(&mut rng, dim, 0.5);
                let width = rng.random_range(0.8..1.5);
                Family::GaussianBump(GaussianBump {
                    centre,
                    width,
                    amplitude: 1.0,
                })
            }
            FamilyKind::Poly3 => {
                let mut rng = seeded_rng(seed, 0x53);
                let a = normal_vec(&mut rng, dim, 0.7);
                let b = normal_vec(&mut rng, dim, 0.7);
                let c = normal_vec(&mut rng, dim, 0.7);
                let q = normal_sym(&mut rng, dim, 0.5);
                let lin = normal_vec(&mut rng, dim, 0.5);
                Family::Poly3(Cubic {
                    a,
                    b,
                    c,
                    quadratic: Quadratic::new(q, lin, 0.0).expect("consistent dimensions"),
                })
            }
        }
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::Quadratic(_) => FamilyKind::Quadratic,
            Family::GaussianBump(_) => FamilyKind::GaussianBump,
            Family::Poly3(_) => FamilyKind::Poly3,
        }
    }

    pub fn field(&self) -> FieldRef {
        match self {
            Family::Quadratic(q) => Arc::new(q.clone()),
            Family::GaussianBump(g) => Arc::new(g.clone()),
            Family::Poly3(c) => Arc::new(c.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    /// `−Δ^H u = f`.
    Semilinear,
    /// `−Δ^H_N u = g`.
    NLaplace,
}

/// `u` together with its exact source for the chosen operator.
#[derive(Debug, Clone)]
pub struct ManufacturedProblem {
    pub u: FieldRef,
    pub source: FieldRef,
    pub spec: NormSpec,
    pub family: String,
    pub operator: Operator,
}

struct Source {
    spec: NormSpec,
    u: FieldRef,
    operator: Operator,
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Source")
            .field("spec", &self.spec.to_string())
            .field("u", &self.u.name())
            .field("operator", &self.operator)
            .finish()
    }
}

impl ScalarField for Source {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn name(&self) -> String {
        let op = match self.operator {
            Operator::Semilinear => "-lap",
            Operator::NLaplace => "-nlap",
        };
        format!("{op}[{}]({})", self.spec, self.u.name())
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        let jet = self.u.jet(x).ok_or(Error::InvalidArgument(format!(
            "manufactured solution `{}` has no analytic jet",
            self.u.name()
        )))??;
        match self.operator {
            Operator::Semilinear => anisotropic_laplacian(&self.spec, &jet).map(|v| -v),
            Operator::NLaplace => {
                finsler_n_laplacian(&self.spec, &jet, self.spec.dim()).map(|v| -v.value)
            }
        }
    }

    fn has_jet(&self) -> bool {
        false
    }
}

fn manufacture(
    spec: &NormSpec,
    u: FieldRef,
    family: &str,
    operator: Operator,
) -> Result<ManufacturedProblem> {
    if u.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: u.dim(),
        });
    }
    if !u.has_jet() {
        return Err(Error::InvalidArgument(format!(
            "manufactured solution `{}` needs an analytic jet",
            u.name()
        )));
    }
    let source: FieldRef = Arc::new(Source {
        spec: spec.clone(),
        u: u.clone(),
        operator,
    });
    Ok(ManufacturedProblem {
        u,
        source,
        spec: spec.clone(),
        family: family.to_string(),
        operator,
    })
}

/// `f = −Δ^H u`.
pub fn manufacture_semilinear(spec: &NormSpec, family: &Family) -> Result<ManufacturedProblem> {
    manufacture(
        spec,
        family.field(),
        family.kind().tag(),
        Operator::Semilinear,
    )
}

/// `g = −Δ^H_N u`.
pub fn manufacture_nlaplace(spec: &NormSpec, family: &Family) -> Result<ManufacturedProblem> {
    manufacture(
        spec,
        family.field(),
        family.kind().tag(),
        Operator::NLaplace,
    )
}

/// Semilinear problem for an arbitrary field with an analytic jet.
pub fn manufacture_semilinear_from(
    spec: &NormSpec,
    u: FieldRef,
    tag: &str,
) -> Result<ManufacturedProblem> {
    manufacture(spec, u, tag, Operator::Semilinear)
}

/// N-Laplace problem for an arbitrary field with an analytic jet.
pub fn manufacture_nlaplace_from(
    spec: &NormSpec,
    u: FieldRef,
    tag: &str,
) -> Result<ManufacturedProblem> {
    manufacture(spec, u, tag, Operator::NLaplace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::SpdMatrix;
    use crate::operators::flux;

    fn v(c: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(c)
    }

    #[test]
    fn quadratic_source_is_constant() {
        let spec = NormSpec::riemannian(SpdMatrix::diagonal(&[2.0, 1.0]).unwrap());
        let p = manufacture_semilinear(&spec, &Family::Quadratic(Quadratic::squared_length(2)))
            .unwrap();
        for x in [v(&[0.1, 0.2]), v(&[-3.0, 1.0])] {
            assert_eq!(p.source.value(&x).unwrap(), -6.0);
        }
        let affine = Family::Quadratic(Quadratic::affine(v(&[1.0, -1.0]), 2.0));
        let p = manufacture_semilinear(&spec, &affine).unwrap();
        assert_eq!(p.source.value(&v(&[0.4, 0.4])).unwrap(), 0.0);
    }

    /// `f = −div(H(∇u)∇H(∇u))` with the divergence taken by central
    /// differences of the flux, independently of the trace formula.
    #[test]
    fn gaussian_source_matches_divergence_oracle() {
        let m = SpdMatrix::from_rows(&[vec![1.5, 0.3], vec![0.3, 0.8]]).unwrap();
        let spec = NormSpec::riemannian(m);
        let bump = GaussianBump {
            centre: v(&[0.3, -0.2]),
            width: 1.0,
            amplitude: 1.0,
        };
        let family = Family::GaussianBump(bump.clone());
        let p = manufacture_semilinear(&spec, &family).unwrap();
        let h = 1e-5;
        for k in 0..20 {
            let t = k as f64 * 0.31;
            let x = v(&[1.2 * t.cos(), 0.9 * t.sin()]);
            let mut div = 0.0;
            for i in 0..2 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fp = flux(&spec, &bump.jet(&xp).unwrap().unwrap().gradient).unwrap();
                let fm = flux(&spec, &bump.jet(&xm).unwrap().unwrap().gradient).unwrap();
                div += (fp[i] - fm[i]) / (2.0 * h);
            }
            assert!((p.source.value(&x).unwrap() + div).abs() < 1e-6);
        }
    }

    #[test]
    fn seeded_families_are_reproducible() {
        for kind in FamilyKind::ALL {
            let a = Family::seeded(kind, 3, 11).field();
            let b = Family::seeded(kind, 3, 11).field();
            let x = v(&[0.2, 0.5, -0.7]);
            assert_eq!(a.value(&x).unwrap(), b.value(&x).unwrap());
            assert_eq!(a.name(), b.name());
        }
    }
}
