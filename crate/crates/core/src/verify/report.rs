use serde::Serialize;

use nalgebra::DVector;

/// Row status. Degenerate rows are reported but excluded from aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowFlag {
    Ok,
    Degenerate,
}

impl RowFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowFlag::Ok => "ok",
            RowFlag::Degenerate => "degenerate",
        }
    }
}

/// One evaluated identity at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub check: String,
    pub point: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub flag: RowFlag,
}

impl Row {
    /// `rel_residual = |lhs − rhs| / scale`.
    pub fn scalar(check: &str, point: &DVector<f64>, lhs: f64, rhs: f64, scale: f64) -> Self {
        let abs = (lhs - rhs).abs();
        Self {
            check: check.to_string(),
            point: point.iter().copied().collect(),
            lhs,
            rhs,
            abs_residual: abs,
            rel_residual: abs / scale,
            flag: RowFlag::Ok,
        }
    }

    /// Scalar comparison relative to `max(|rhs|, 1)`.
    pub fn floored(check: &str, point: &DVector<f64>, lhs: f64, rhs: f64) -> Self {
        Self::scalar(check, point, lhs, rhs, rhs.abs().max(1.0))
    }

    /// Scalar comparison relative to `|rhs|`.
    pub fn relative(check: &str, point: &DVector<f64>, lhs: f64, rhs: f64) -> Self {
        Self::scalar(check, point, lhs, rhs, rhs.abs())
    }

    /// Vector comparison: `lhs`/`rhs` hold the Euclidean lengths, the
    /// residual is the largest componentwise difference over `scale`.
    pub fn vector(
        check: &str,
        point: &DVector<f64>,
        lhs: &DVector<f64>,
        rhs: &DVector<f64>,
        scale: f64,
    ) -> Self {
        let abs = (lhs - rhs).amax();
        Self {
            check: check.to_string(),
            point: point.iter().copied().collect(),
            lhs: lhs.norm(),
            rhs: rhs.norm(),
            abs_residual: abs,
            rel_residual: abs / scale,
            flag: RowFlag::Ok,
        }
    }

    pub fn degenerate(mut self) -> Self {
        self.flag = RowFlag::Degenerate;
        self
    }
}

/// Aggregates of the rows belonging to one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    /// `None` for informational checks that always pass.
    pub tolerance: Option<f64>,
    pub count: usize,
    pub excluded: usize,
    pub max_rel_residual: f64,
    pub mean_rel_residual: f64,
    pub max_abs_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">")]
    Above,
}

/// A scalar criterion that is not a per-point residual (spreads, fitted
/// orders, ellipticity constants, quadrature agreement).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub passed: bool,
}

impl BoundCheck {
    pub fn new(name: &str, value: f64, comparison: Comparison, threshold: f64) -> Self {
        let passed = match comparison {
            Comparison::AtLeast => value >= threshold,
            Comparison::AtMost => value <= threshold,
            Comparison::Above => value > threshold,
        };
        Self {
            name: name.to_string(),
            value,
            comparison,
            threshold,
            passed,
        }
    }
}

/// Residual against finite-difference step with a least-squares order fit
/// in log-log scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceFit {
    pub check: String,
    pub steps: Vec<f64>,
    pub max_abs_residuals: Vec<f64>,
    pub order: f64,
}

impl ConvergenceFit {
    pub fn fit(check: &str, steps: Vec<f64>, residuals: Vec<f64>) -> Self {
        let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
        let ys: Vec<f64> = residuals
            .iter()
            .map(|r| r.max(f64::MIN_POSITIVE).ln())
            .collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        Self {
            check: check.to_string(),
            steps,
            max_abs_residuals: residuals,
            order: sxy / sxx,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub suite: String,
    pub norm: String,
    pub dim: usize,
    pub rows: Vec<Row>,
    pub checks: Vec<CheckSummary>,
    pub bounds: Vec<BoundCheck>,
    pub convergence: Vec<ConvergenceFit>,
    pub notes: Vec<String>,
    pub passed: bool,
}

/// Neumaier-compensated sum in iteration order.
fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

impl ResidualReport {
    pub fn new(suite: &str, norm: String, dim: usize) -> Self {
        Self {
            suite: suite.to_string(),
            norm,
            dim,
            rows: Vec::new(),
            checks: Vec::new(),
            bounds: Vec::new(),
            convergence: Vec::new(),
            notes: Vec::new(),
            passed: true,
        }
    }

    /// Appends rows for `check` and records their aggregates.
    pub fn add_check(&mut self, check: &str, tolerance: Option<f64>, rows: Vec<Row>) {
        debug_assert!(rows.iter().all(|r| r.check == check));
        self.checks.push(summarize(check, tolerance, &rows));
        self.rows.extend(rows);
        self.refresh();
    }

    pub fn add_bound(&mut self, bound: BoundCheck) {
        self.bounds.push(bound);
        self.refresh();
    }

    pub fn add_convergence(&mut self, fit: ConvergenceFit, min_order: f64) {
        let name = format!("{}/convergence-order", fit.check);
        self.bounds.push(BoundCheck::new(
            &name,
            fit.order,
            Comparison::AtLeast,
            min_order,
        ));
        self.convergence.push(fit);
        self.refresh();
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Moves every check, bound and note of `other` into `self`.
    pub fn absorb(&mut self, other: ResidualReport) {
        self.rows.extend(other.rows);
        self.checks.extend(other.checks);
        self.bounds.extend(other.bounds);
        self.convergence.extend(other.convergence);
        self.notes.extend(other.notes);
        self.refresh();
    }

    fn refresh(&mut self) {
        self.passed = self.checks.iter().all(|c| c.passed) && self.bounds.iter().all(|b| b.passed);
    }

    /// Recomputes every check summary from the stored rows.
    pub fn recomputed_checks(&self) -> Vec<CheckSummary> {
        self.checks
            .iter()
            .map(|c| {
                let rows: Vec<Row> = self
                    .rows
                    .iter()
                    .filter(|r| r.check == c.name)
                    .cloned()
                    .collect();
                summarize(&c.name, c.tolerance, &rows)
            })
            .collect()
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn bound(&self, name: &str) -> Option<&BoundCheck> {
        self.bounds.iter().find(|b| b.name == name)
    }

    /// Largest relative residual over every check that carries a tolerance.
    pub fn worst_rel_residual(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.tolerance.is_some())
            .map(|c| c.max_rel_residual)
            .fold(0.0, f64::max)
    }

    /// Names of failed checks and bounds.
    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.clone())
            .chain(
                self.bounds
                    .iter()
                    .filter(|b| !b.passed)
                    .map(|b| b.name.clone()),
            )
            .collect()
    }
}

fn summarize(check: &str, tolerance: Option<f64>, rows: &[Row]) -> CheckSummary {
    let included: Vec<&Row> = rows.iter().filter(|r| r.flag == RowFlag::Ok).collect();
    let count = included.len();
    // NaN residuals propagate through `max` as failures.
    let max_rel = included.iter().map(|r| r.rel_residual).fold(0.0, nan_max);
    let max_abs = included.iter().map(|r| r.abs_residual).fold(0.0, nan_max);
    let mean_rel = if count == 0 {
        0.0
    } else {
        compensated_sum(included.iter().map(|r| r.rel_residual)) / count as f64
    };
    let passed = match tolerance {
        Some(tol) => max_rel <= tol,
        None => true,
    };
    CheckSummary {
        name: check.to_string(),
        tolerance,
        count,
        excluded: rows.len() - count,
        max_rel_residual: max_rel,
        mean_rel_residual: mean_rel,
        max_abs_residual: max_abs,
        passed,
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> DVector<f64> {
        DVector::from_vec(vec![1.0, 2.0])
    }

    #[test]
    fn aggregates_exclude_degenerate_rows() {
        let rows = vec![
            Row::floored("t", &p(), 1.0, 1.0 + 1e-9),
            Row::floored("t", &p(), 0.0, 5.0).degenerate(),
        ];
        let mut r = ResidualReport::new("s", "euclidean:2".into(), 2);
        r.add_check("t", Some(1e-8), rows);
        let c = r.check("t").unwrap();
        assert_eq!(c.count, 1);
        assert_eq!(c.excluded, 1);
        assert!(c.passed && r.passed);
        assert_eq!(r.recomputed_checks(), r.checks);
    }

    #[test]
    fn nan_fails() {
        let mut r = ResidualReport::new("s", "quartic".into(), 2);
        r.add_check("t", Some(1.0), vec![Row::floored("t", &p(), f64::NAN, 0.0)]);
        assert!(!r.passed);
        assert_eq!(r.failures(), vec!["t".to_string()]);
    }

    #[test]
    fn order_fit_recovers_slope() {
        let steps = vec![0.04, 0.02, 0.01];
        let res: Vec<f64> = steps.iter().map(|h: &f64| 3.0 * h * h).collect();
        let fit = ConvergenceFit::fit("c", steps, res);
        assert!((fit.order - 2.0).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_is_accurate() {
        let v = vec![1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
