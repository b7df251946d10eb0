//! Report output: JSON (`report-v1`), CSV (one row per point) and a
//! plain-text table of the per-check aggregates.

use std::fmt::Write as _;

use crate::run::Document;
use crate::CliError;

pub fn json(doc: &Document) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(doc).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Columns: `suite, check, x0 … x{D−1}, lhs, rhs, abs_residual,
/// rel_residual, flag`, where `D` is the largest point dimension in the
/// document; shorter points leave trailing coordinates empty.
pub fn csv(doc: &Document) -> Result<String, CliError> {
    let reports = || {
        doc.suites
            .iter()
            .filter_map(|s| s.report.as_ref().map(|r| (s.suite, r)))
    };
    let width = reports()
        .flat_map(|(_, r)| r.rows.iter().map(|row| row.point.len()))
        .max()
        .unwrap_or(doc.config.dim);
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut header = vec!["suite".to_string(), "check".to_string()];
    header.extend((0..width).map(|i| format!("x{i}")));
    header.extend(["lhs", "rhs", "abs_residual", "rel_residual", "flag"].map(String::from));
    w.write_record(&header).map_err(io)?;
    for (suite, report) in reports() {
        for row in &report.rows {
            let mut rec = vec![suite.as_str().to_string(), row.check.clone()];
            rec.extend(
                (0..width).map(|i| row.point.get(i).map(|x| x.to_string()).unwrap_or_default()),
            );
            rec.extend(
                [row.lhs, row.rhs, row.abs_residual, row.rel_residual].map(|v| v.to_string()),
            );
            rec.push(row.flag.as_str().to_string());
            w.write_record(&rec).map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn table(doc: &Document) -> String {
    let mut out = String::new();
    let c = &doc.config;
    let _ = writeln!(
        out,
        "{}  norm {}  dim {}  seed {}  count {}",
        doc.tool, c.norm, c.dim, c.seed, c.count
    );
    for s in &doc.suites {
        let _ = writeln!(out, "\n{}", s.summary_line());
        let Some(r) = &s.report else { continue };
        let name_width = r
            .checks
            .iter()
            .map(|c| c.name.len())
            .chain(r.bounds.iter().map(|b| b.name.len()))
            .max()
            .unwrap_or(5)
            .max(5);
        let _ = writeln!(
            out,
            "  {:<name_width$}  {:>9}  {:>5}  {:>4}  {:>10}  {:>10}  ok",
            "check", "tolerance", "n", "excl", "max rel", "mean rel"
        );
        for ch in &r.checks {
            let tol = ch
                .tolerance
                .map(|t| format!("{t:.0e}"))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "  {:<name_width$}  {:>9}  {:>5}  {:>4}  {:>10.3e}  {:>10.3e}  {}",
                ch.name,
                tol,
                ch.count,
                ch.excluded,
                ch.max_rel_residual,
                ch.mean_rel_residual,
                if ch.passed { "yes" } else { "NO" }
            );
        }
        for b in &r.bounds {
            let cmp = serde_json::to_value(b.comparison)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "  {:<name_width$}  {:>10.4e} {cmp} {:e}  {}",
                b.name,
                b.value,
                b.threshold,
                if b.passed { "yes" } else { "NO" }
            );
        }
        for n in &r.notes {
            let _ = writeln!(out, "  note: {n}");
        }
    }
    let _ = writeln!(out, "\n{}", if doc.passed { "PASS" } else { "FAIL" });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::run::execute;

    #[test]
    fn csv_has_one_row_per_point() {
        let doc =
            execute(&parse_config("norm=euclidean:2 suite=identities count=5").unwrap()).unwrap();
        let text = csv(&doc).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "suite,check,x0,x1,lhs,rhs,abs_residual,rel_residual,flag"
        );
        let rows = doc.suites[0].report.as_ref().unwrap().rows.len();
        assert_eq!(lines.count(), rows);
        assert_eq!(rows, 5 * 9);
    }

    #[test]
    fn json_carries_schema_and_config() {
        let doc = execute(&parse_config("norm=quartic suite=counterexample").unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json(&doc).unwrap()).unwrap();
        assert_eq!(v["schema"], "report-v1");
        assert_eq!(v["config"]["norm"], "quartic");
        assert_eq!(v["config"]["suite"], "counterexample");
        assert_eq!(v["suites"][0]["status"], "pass");
        assert!(table(&doc).contains("spread"));
    }
}
