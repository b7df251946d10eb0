//! Run configuration and its `key=value` text form.
//!
//! ```text
//! # comments run to the end of the line
//! norm = riemannian:[[4, 0], [0, 1]]
//! suite = identities
//! seed = 7  count = 200
//! annulus = 0.5,2
//! ```
//!
//! Statements are separated by whitespace outside brackets, so a matrix
//! literal may contain spaces. Keys: `norm`, `dim`, `suite`, `seed`,
//! `count`, `annulus`, `format`, `out`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use aniso_kelvin::sampling::seeded_rng;
use aniso_kelvin::{NormSpec, SamplePlan, SpdMatrix};
use serde::Serialize;

use crate::CliError;

/// Stream used to draw `riemannian:random` matrices from the seed.
const RANDOM_NORM_STREAM: u64 = 0x5eed;
const DEFAULT_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Identities,
    Kelvin,
    Counterexample,
    TheoremSemilinear,
    TheoremNlaplace,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [
        Suite::Identities,
        Suite::Kelvin,
        Suite::Counterexample,
        Suite::TheoremSemilinear,
        Suite::TheoremNlaplace,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Kelvin => "kelvin",
            Suite::Counterexample => "counterexample",
            Suite::TheoremSemilinear => "theorem-semilinear",
            Suite::TheoremNlaplace => "theorem-nlaplace",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "identities" => Suite::Identities,
            "kelvin" => Suite::Kelvin,
            "counterexample" => Suite::Counterexample,
            "theorem-semilinear" | "semilinear" => Suite::TheoremSemilinear,
            "theorem-nlaplace" | "nlaplace" => Suite::TheoremNlaplace,
            "all" => Suite::All,
            _ => return Err(CliError::Usage(format!("unknown suite `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Table => "table",
        }
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "table" | "pretty-table" => Ok(Format::Table),
            _ => Err(CliError::Usage(format!(
                "unknown format `{s}` (json, csv or table)"
            ))),
        }
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub norm: NormSpec,
    pub suite: Suite,
    pub plan: SamplePlan,
    pub format: Format,
    /// `None` writes the report to standard output.
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn dim(&self) -> usize {
        self.norm.dim()
    }
}

/// Serializes to the text form; `parse_config` reads it back exactly.
impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "norm={}", self.norm)?;
        writeln!(f, "dim={}", self.dim())?;
        writeln!(f, "suite={}", self.suite)?;
        writeln!(f, "seed={}", self.plan.seed)?;
        writeln!(f, "count={}", self.plan.count)?;
        writeln!(f, "annulus={},{}", self.plan.h_min, self.plan.h_max)?;
        writeln!(f, "format={}", self.format.as_str())?;
        if let Some(out) = &self.out {
            writeln!(f, "out={}", out.display())?;
        }
        Ok(())
    }
}

/// The part of the configuration that determines the numbers in a report.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub norm: String,
    pub dim: usize,
    pub suite: Suite,
    pub seed: u64,
    pub count: usize,
    pub annulus: [f64; 2],
}

impl From<&RunConfig> for ResolvedConfig {
    fn from(c: &RunConfig) -> Self {
        Self {
            norm: c.norm.to_string(),
            dim: c.dim(),
            suite: c.suite,
            seed: c.plan.seed,
            count: c.plan.count,
            annulus: [c.plan.h_min, c.plan.h_max],
        }
    }
}

const KEYS: [&str; 8] = [
    "norm", "dim", "suite", "seed", "count", "annulus", "format", "out",
];

/// Unresolved `key → value` settings; later layers override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for stmt in statements(text)? {
            let (key, value) = stmt
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("expected `key=value`, got `{stmt}`")))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(CliError::Usage(format!(
                    "unknown config key `{key}` (expected one of {})",
                    KEYS.join(", ")
                )));
            }
            if values
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(CliError::Usage(format!("config key `{key}` given twice")));
            }
        }
        Ok(Self { values })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(KEYS.contains(&key));
        self.values.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Copies every value of `other` over `self`.
    pub fn overlay(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let seed = parse_num::<u64>(self, "seed")?.unwrap_or(0);
        let count = parse_num::<usize>(self, "count")?.unwrap_or(SamplePlan::default().count);
        let (h_min, h_max) = match self.get("annulus") {
            Some(a) => parse_annulus(a)?,
            None => (SamplePlan::default().h_min, SamplePlan::default().h_max),
        };
        let plan = SamplePlan::new(h_min, h_max, count, seed)?;
        let dim = parse_num::<usize>(self, "dim")?;
        let norm = resolve_norm(self.get("norm"), dim, seed)?;
        if let Some(d) = dim {
            if d != norm.dim() {
                return Err(CliError::Usage(format!(
                    "dimension mismatch: dim={d} but norm `{norm}` has dimension {}",
                    norm.dim()
                )));
            }
        }
        let suite = self
            .get("suite")
            .map(str::parse)
            .transpose()?
            .unwrap_or(Suite::All);
        let format = self
            .get("format")
            .map(str::parse)
            .transpose()?
            .unwrap_or(Format::Json);
        let out = self
            .get("out")
            .filter(|o| !o.is_empty() && *o != "-")
            .map(PathBuf::from);
        Ok(RunConfig {
            norm,
            suite,
            plan,
            format,
            out,
        })
    }
}

/// Parses the text form into a validated configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    Settings::parse(text)?.resolve()
}

fn parse_num<T: FromStr>(s: &Settings, key: &str) -> Result<Option<T>, CliError> {
    s.get(key)
        .map(|v| {
            v.parse::<T>().map_err(|_| {
                CliError::Usage(format!("`{key}` expects a non-negative integer, got `{v}`"))
            })
        })
        .transpose()
}

pub fn parse_annulus(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("`annulus` expects `h_min,h_max`, got `{text}`"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

/// Accepts the canonical norm forms plus `euclidean` (dimension from
/// `dim`) and `riemannian:random` (drawn from the seed).
fn resolve_norm(text: Option<&str>, dim: Option<usize>, seed: u64) -> Result<NormSpec, CliError> {
    let text = text.map(str::trim).unwrap_or("euclidean");
    let dim_or_default = dim.unwrap_or(DEFAULT_DIM);
    match text {
        "euclidean" => Ok(NormSpec::euclidean(dim_or_default)?),
        "riemannian:random" => {
            let mut rng = seeded_rng(seed, RANDOM_NORM_STREAM);
            Ok(NormSpec::riemannian(SpdMatrix::random(
                dim_or_default,
                &mut rng,
            )?))
        }
        other => Ok(other.parse::<NormSpec>()?),
    }
}

/// Splits on whitespace outside `[...]`, keeping `key = value` together.
fn statements(text: &str) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        let mut tokens: Vec<String> = Vec::new();
        let mut cur = String::new();
        let mut depth: i32 = 0;
        for ch in line.chars() {
            match ch {
                '[' => depth += 1,
                ']' => depth -= 1,
                _ => {}
            }
            if depth < 0 {
                return Err(CliError::Usage(format!(
                    "unbalanced `]` in `{}`",
                    line.trim()
                )));
            }
            if ch.is_whitespace() && depth == 0 {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            } else {
                cur.push(ch);
            }
        }
        if depth != 0 {
            return Err(CliError::Usage(format!(
                "unbalanced `[` in `{}`",
                line.trim()
            )));
        }
        if !cur.is_empty() {
            tokens.push(cur);
        }
        // Re-join `key = value` and `key= value` / `key =value`.
        let mut i = 0;
        while i < tokens.len() {
            let mut stmt = tokens[i].clone();
            i += 1;
            while (stmt.ends_with('=') || tokens.get(i).is_some_and(|t| t.starts_with('=')))
                && i < tokens.len()
            {
                stmt.push_str(&tokens[i]);
                i += 1;
            }
            out.push(stmt);
        }
    }
    Ok(out)
}
