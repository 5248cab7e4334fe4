//! `tensorconc`: injective norms, variance parameters, bounds and Monte Carlo
//! experiments for random tensors, driven by JSON configs.

mod commands;
mod config;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tensorconc::bounds::BoundName;
use tensorconc::Error;

use commands::{Experiment, Outcome};

#[derive(Parser, Debug)]
#[command(name = "tensorconc", version, about = "Concentration of random tensors under injective ℓ_p norms")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config file, or `-` for stdin.
    #[arg(long, short, global = true)]
    config: Option<String>,

    /// Override a config field, e.g. `--set solver.restarts=32`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<String>,

    /// Override the seed of the subcommand.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "TENSORCONC_THREADS")]
    threads: Option<usize>,

    /// Output format.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    /// Shorthand for `--format json`.
    #[arg(long, global = true, conflicts_with = "format")]
    json: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Injective norm of one tensor.
    Norm,
    /// Variance parameters σ_0..σ_r and the type-2 variance of a series.
    Variance,
    /// Evaluate one of the closed-form bounds.
    Bound {
        #[arg(long, value_parser = parse_bound_name)]
        name: Option<BoundName>,
    },
    /// Monte Carlo estimate of the expected norm.
    Mc,
    /// Measured norms against bounds over a dimension sweep.
    Sweep,
    /// Separation between null and planted norms in censored PCA.
    PcaDetect,
    /// Greedy packing of the ℓ_p ball under the natural distance.
    CoveringProbe,
    /// Probabilistic-geometry and exact-identity property checks.
    Checks,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

fn parse_bound_name(s: &str) -> Result<BoundName, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
        "expected one of master, sharpest, type2, trivial, indep_entry, hypergraph, lambda_threshold, matching, nck_holder"
            .to_string()
    })
}

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed configuration.
    Input(String),
    Lib(Error),
    Output(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Output(m) => write!(f, "writing output: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(Error::TooLarge { .. }) => 3,
            _ => 2,
        }
    }
}

fn default_format(cmd: &Command) -> Format {
    match cmd {
        Command::Norm | Command::Variance | Command::Bound { .. } => Format::Table,
        _ => Format::Csv,
    }
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let mut cfg = config::load(cli.config.as_deref())?;
    cfg.apply_overrides(&cli.overrides)?;
    if let Some(seed) = cli.seed {
        let sets: Vec<String> = commands::seed_keys(&cli.command)
            .iter()
            .map(|k| format!("{k}={seed}"))
            .collect();
        cfg.apply_overrides(&sets)?;
    }
    cfg.resolve_files()?;
    let format = if cli.json {
        Format::Json
    } else {
        cli.format.unwrap_or_else(|| default_format(&cli.command))
    };
    match &cli.command {
        Command::Norm => commands::norm(&cfg, format),
        Command::Variance => commands::variance(&cfg, format),
        Command::Bound { name } => commands::bound(&cfg, *name, format),
        Command::Mc => commands::experiment(&cfg, Experiment::Mc, format),
        Command::Sweep => commands::experiment(&cfg, Experiment::Sweep, format),
        Command::PcaDetect => commands::experiment(&cfg, Experiment::PcaDetect, format),
        Command::CoveringProbe => commands::experiment(&cfg, Experiment::CoveringProbe, format),
        Command::Checks => commands::checks(&cfg, format),
    }
}

/// Writes through a temporary file in the target directory, so the target
/// is either untouched or complete.
fn write_atomic(path: &str, text: &str) -> Result<(), CliError> {
    let target = Path::new(path);
    let dir = match target.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::Output(format!("{path}: {e}")))?;
    tmp.write_all(text.as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| CliError::Output(format!("{path}: {e}")))?;
    tmp.persist(target)
        .map_err(|e| CliError::Output(format!("{path}: {}", e.error)))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("tensorconc: cannot start worker threads: {e}");
            return ExitCode::from(2);
        }
    };
    let result = pool.install(|| execute(&cli)).and_then(|out| {
        match &cli.output {
            Some(path) => write_atomic(path, &out.text)?,
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(out.text.as_bytes())
                    .and_then(|_| stdout.flush())
                    .map_err(|e| CliError::Output(e.to_string()))?;
            }
        }
        Ok(out.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("tensorconc: one or more property checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("tensorconc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
