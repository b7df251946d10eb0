use aniso_kelvin::sampling::seeded_rng;
use aniso_kelvin::verify::{
    run_counterexample_scan, run_identity_suite, run_kelvin_suite, run_nlaplace_suite,
    run_semilinear_suite,
};
use aniso_kelvin::{Error, NormSpec, ResidualReport, SpdMatrix};
use serde::Serialize;

use crate::config::{ResolvedConfig, RunConfig, Suite};
use crate::CliError;

pub const SCHEMA: &str = "report-v1";

/// Stream for the control norm drawn when the configured norm is not Riemannian.
const CONTROL_STREAM: u64 = 0xc0de;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub status: Status,
    pub worst_rel_residual: Option<f64>,
    pub reason: Option<String>,
    pub report: Option<ResidualReport>,
}

impl SuiteOutcome {
    /// One-line summary printed after each run.
    pub fn summary_line(&self) -> String {
        let mut line = format!("{} {:<20}", self.status.label(), self.suite.as_str());
        if let Some(w) = self.worst_rel_residual {
            line.push_str(&format!(" worst rel residual {w:.3e}"));
        }
        if let Some(r) = &self.report {
            let failures = r.failures();
            if !failures.is_empty() {
                line.push_str(&format!("; failed: {}", failures.join(", ")));
            }
            if let Some(s) = r.bound("spread") {
                line.push_str(&format!("; spread {:.6}", s.value));
            }
        }
        if let Some(reason) = &self.reason {
            line.push_str(&format!("; {reason}"));
        }
        line
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Document {
    pub schema: &'static str,
    pub tool: String,
    pub config: ResolvedConfig,
    pub suites: Vec<SuiteOutcome>,
    pub passed: bool,
}

pub fn tool_version() -> String {
    format!("aniso-kelvin {}", env!("CARGO_PKG_VERSION"))
}

/// Errors that mean the norm or dimension does not satisfy a theorem's
/// hypothesis, as opposed to a numerical failure.
fn unmet_hypothesis(e: &Error) -> bool {
    matches!(
        e,
        Error::NotRiemannian { .. } | Error::DimensionUnsupported { .. }
    )
}

fn control_for(config: &RunConfig) -> Result<NormSpec, Error> {
    if config.norm.is_riemannian() {
        Ok(config.norm.clone())
    } else {
        let mut rng = seeded_rng(config.plan.seed, CONTROL_STREAM);
        Ok(NormSpec::riemannian(SpdMatrix::random(2, &mut rng)?))
    }
}

fn run_one(config: &RunConfig, suite: Suite, within_all: bool) -> Result<ResidualReport, Error> {
    let plan = &config.plan;
    match suite {
        Suite::Identities => run_identity_suite(&config.norm, plan),
        Suite::Kelvin => run_kelvin_suite(&config.norm, plan),
        Suite::Counterexample => {
            let scanned = if within_all {
                NormSpec::quartic()
            } else {
                config.norm.clone()
            };
            run_counterexample_scan(&scanned, &control_for(config)?)
        }
        Suite::TheoremSemilinear => run_semilinear_suite(&config.norm, plan),
        Suite::TheoremNlaplace => run_nlaplace_suite(&config.norm, plan),
        Suite::All => unreachable!("`all` is expanded by the caller"),
    }
}

/// Runs the configured suite(s). Inside `all`, a theorem whose hypothesis
/// the norm does not meet is skipped and the counterexample scan always
/// sweeps the quartic norm; asked for directly, an unmet hypothesis is a
/// usage error.
pub fn execute(config: &RunConfig) -> Result<Document, CliError> {
    let (suites, within_all) = match config.suite {
        Suite::All => (Suite::EACH.to_vec(), true),
        s => (vec![s], false),
    };
    let mut outcomes = Vec::with_capacity(suites.len());
    for suite in suites {
        let outcome = match run_one(config, suite, within_all) {
            Ok(report) => SuiteOutcome {
                suite,
                status: if report.passed {
                    Status::Pass
                } else {
                    Status::Fail
                },
                worst_rel_residual: Some(report.worst_rel_residual()),
                reason: report
                    .notes
                    .iter()
                    .find(|n| n.contains("below threshold"))
                    .cloned(),
                report: Some(report),
            },
            Err(e) if unmet_hypothesis(&e) && within_all => SuiteOutcome {
                suite,
                status: Status::Skip,
                worst_rel_residual: None,
                reason: Some(e.to_string()),
                report: None,
            },
            Err(e) if unmet_hypothesis(&e) => return Err(CliError::Core(e)),
            Err(e) => SuiteOutcome {
                suite,
                status: Status::Fail,
                worst_rel_residual: None,
                reason: Some(e.to_string()),
                report: None,
            },
        };
        outcomes.push(outcome);
    }
    let passed = outcomes.iter().all(|o| o.status != Status::Fail);
    Ok(Document {
        schema: SCHEMA,
        tool: tool_version(),
        config: ResolvedConfig::from(config),
        suites: outcomes,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn all_on_euclidean_passes() {
        let c = parse_config("norm=euclidean:3 count=12").unwrap();
        let d = execute(&c).unwrap();
        assert!(d.passed);
        assert_eq!(d.suites.len(), 5);
        assert!(
            d.suites.iter().all(|s| s.status == Status::Pass),
            "{:?}",
            d.suites
                .iter()
                .map(|s| s.summary_line())
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn all_on_quartic_skips_theorems() {
        let d = execute(&parse_config("norm=quartic count=12").unwrap()).unwrap();
        assert!(d.passed);
        let st: Vec<Status> = d.suites.iter().map(|s| s.status).collect();
        assert_eq!(
            st,
            vec![
                Status::Pass,
                Status::Pass,
                Status::Pass,
                Status::Skip,
                Status::Skip
            ]
        );
    }

    #[test]
    fn counterexample_on_riemannian_fails_with_message() {
        let d =
            execute(&parse_config("norm=riemannian:[[4,0],[0,1]] suite=counterexample").unwrap())
                .unwrap();
        assert!(!d.passed);
        assert_eq!(
            d.suites[0].reason.as_deref(),
            Some("spread below threshold: norm is Riemannian")
        );
        assert!(d.suites[0]
            .summary_line()
            .starts_with("FAIL counterexample"));
    }

    #[test]
    fn direct_theorem_on_quartic_is_usage_error() {
        let err = execute(&parse_config("norm=quartic suite=semilinear").unwrap()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
