//! Residual harness for the Kelvin identities and both transformation
//! theorems, on deterministic sample plans.

mod manufactured;
mod quadrature;
mod report;
mod suites;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

pub use manufactured::{
    manufacture_nlaplace, manufacture_nlaplace_from, manufacture_semilinear,
    manufacture_semilinear_from, Family, FamilyKind, ManufacturedProblem, Operator,
};
pub use quadrature::{weak_form_crosscheck, WeakFormComparison};
pub use report::{
    BoundCheck, CheckSummary, Comparison, ConvergenceFit, ResidualReport, Row, RowFlag,
};
pub use suites::{
    check_fundamental_solution, check_theorem_nlaplace, check_theorem_semilinear,
    run_counterexample_scan, run_identity_suite, run_kelvin_suite, run_nlaplace_suite,
    run_semilinear_suite, JetMode, DEGENERATE_GRADIENT, QUARTIC_SPREAD_THRESHOLD,
    RIEMANNIAN_SPREAD_CEILING,
};

use crate::error::{Error, Result};
use crate::norm::NormSpec;

/// Where and how many points a check visits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplePlan {
    /// Annulus `h_min ≤ H(x) ≤ h_max` in units of the norm under test.
    pub h_min: f64,
    pub h_max: f64,
    pub count: usize,
    pub seed: u64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            h_min: 0.5,
            h_max: 2.0,
            count: 100,
            seed: 0,
        }
    }
}

impl SamplePlan {
    pub fn new(h_min: f64, h_max: f64, count: usize, seed: u64) -> Result<Self> {
        let plan = Self {
            h_min,
            h_max,
            count,
            seed,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// The standard Kelvin test domain `0.1 ≤ H ≤ 10`.
    pub fn wide(count: usize, seed: u64) -> Self {
        Self {
            h_min: 0.1,
            h_max: 10.0,
            count,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_min > 0.0 && self.h_max >= self.h_min && self.h_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "annulus must satisfy 0 < h_min <= h_max, got ({}, {})",
                self.h_min, self.h_max
            )));
        }
        if self.count == 0 {
            return Err(Error::InvalidArgument(
                "sample count must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Canonical, bit-reproducible point list for `spec`.
    pub fn points(&self, spec: &NormSpec) -> Result<Vec<DVector<f64>>> {
        self.validate()?;
        let err = std::cell::RefCell::new(None);
        let pts = crate::sampling::annulus_points(
            spec.dim(),
            self.count,
            self.seed,
            self.h_min,
            self.h_max,
            |d| {
                spec.eval(d).unwrap_or_else(|e| {
                    err.borrow_mut().get_or_insert(e);
                    1.0
                })
            },
        );
        match err.into_inner() {
            Some(e) => Err(e),
            None => Ok(pts),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }
}

/// Evaluates `f` on every point in parallel and concatenates the rows in
/// plan order; the first error in plan order wins.
pub(crate) fn par_rows<F>(points: &[DVector<f64>], f: F) -> Result<Vec<Row>>
where
    F: Fn(&DVector<f64>) -> Result<Vec<Row>> + Sync,
{
    let per_point: Vec<Result<Vec<Row>>> = points.par_iter().map(&f).collect();
    let mut rows = Vec::new();
    for r in per_point {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Parallel map preserving plan order.
pub(crate) fn par_map<T, F>(points: &[DVector<f64>], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&DVector<f64>) -> Result<T> + Sync,
{
    let out: Vec<Result<T>> = points.par_iter().map(&f).collect();
    out.into_iter().collect()
}
