use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use aniso_kelvin_cli::{config::Settings, execute, render, CliError, Format, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "aniso-kelvin",
    version,
    about = "Verify the anisotropic Kelvin transform identities and theorems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Norm identities: Euler, homogeneity, duality, equivalence constants
    Identities(Opts),
    /// Kelvin map round trips, Jacobian and determinant law
    Kelvin(Opts),
    /// Non-constancy of H^{2N}J for a non-Riemannian norm
    Counterexample(Opts),
    /// Kelvin transform of the anisotropic Laplace equation
    Semilinear(Opts),
    /// Kelvin transform of the Finsler N-Laplace equation
    Nlaplace(Opts),
    /// Every suite
    All(Opts),
    /// The suite named in the configuration file
    Run(Opts),
}

#[derive(Args)]
struct Opts {
    /// Norm: `euclidean[:N]`, `riemannian:[[..],..]`, `riemannian:random`, `quartic`
    #[arg(long)]
    norm: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sample points
    #[arg(long)]
    count: Option<usize>,
    /// Sampling annulus in norm units, `h_min,h_max`
    #[arg(long, value_name = "H_MIN,H_MAX")]
    annulus: Option<String>,
    /// Report path; standard output when omitted or `-`
    #[arg(long, value_name = "PATH")]
    out: Option<String>,
    #[arg(long, value_name = "json|csv|table")]
    format: Option<String>,
    /// Worker threads (0 = one per core); never changes the report
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
    /// Configuration file in `key=value` form; flags override it
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

impl Opts {
    fn settings(&self, suite: Option<&str>) -> Result<Settings, CliError> {
        let mut s = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
                Settings::parse(&text)?
            }
            None => Settings::default(),
        };
        let mut flags = Settings::default();
        if let Some(suite) = suite {
            flags.set("suite", suite);
        }
        let pairs = [
            ("norm", self.norm.clone()),
            ("dim", self.dim.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("count", self.count.map(|v| v.to_string())),
            ("annulus", self.annulus.clone()),
            ("out", self.out.clone()),
            ("format", self.format.clone()),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                flags.set(k, v);
            }
        }
        s.overlay(&flags);
        Ok(s)
    }
}

fn write_report(config: &RunConfig, text: &str) -> Result<(), CliError> {
    match &config.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write report: {e}"))),
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (opts, suite) = match &cli.command {
        Command::Identities(o) => (o, Some("identities")),
        Command::Kelvin(o) => (o, Some("kelvin")),
        Command::Counterexample(o) => (o, Some("counterexample")),
        Command::Semilinear(o) => (o, Some("theorem-semilinear")),
        Command::Nlaplace(o) => (o, Some("theorem-nlaplace")),
        Command::All(o) => (o, Some("all")),
        Command::Run(o) => (o, None),
    };
    let config = opts.settings(suite)?.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| {
            CliError::Usage(format!(
                "cannot start {} threads: {e}",
                opts.threads.unwrap_or(0)
            ))
        })?;
    let doc = pool.install(|| execute(&config))?;
    let text = match config.format {
        Format::Json => render::json(&doc)?,
        Format::Csv => render::csv(&doc)?,
        Format::Table => render::table(&doc),
    };
    write_report(&config, &text)?;
    for s in &doc.suites {
        eprintln!("{}", s.summary_line());
    }
    Ok(doc.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
