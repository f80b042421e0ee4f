//! Command-line frontend behind the `sagarch` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::hypothesis::{default_alpha_star, diagnostic_test, stationarity_test, symmetry_test};
use crate::io::{emit_report, experiment_table, ingest_csv, replications_csv, write_csv, Report};
use crate::mle::{self, FitConfig, FitMode};
use crate::model::{simulate, ParamVector};
use crate::montecarlo::{self, ExperimentSpec};

/// Environment variable read when `--seed` is absent.
pub const SEED_ENV: &str = "SAGARCH_SEED";
const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "sagarch", version, about = "Asymmetric GARCH(1,1) with symmetric stable innovations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Stationary,
    Free,
}

impl From<ModeArg> for FitMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Stationary => FitMode::Stationary,
            ModeArg::Free => FitMode::Free,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WhichTest {
    Stationarity,
    Symmetry,
    Diagnostic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WhichTable {
    Table1,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Design {
    /// (0.2, 0.1, 0.2, 0.5, 1.5)
    #[value(name = "alpha1.5")]
    Alpha15,
    /// (0.1, 0.1, 0.2, 0.3, 1.0)
    #[value(name = "alpha1.0")]
    Alpha10,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a path and write it as CSV.
    Simulate {
        /// omega,phi_plus,phi_minus,psi,alpha
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 500)]
        burn_in: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the model to a CSV return series.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "stationary")]
        mode: ModeArg,
        #[arg(long, default_value_t = 6)]
        multistart: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit, then run one test.
    Test {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        which: WhichTest,
        /// Null exponent of the diagnostic test; defaults to the fitted
        /// alpha rounded to two decimals.
        #[arg(long)]
        alpha_star: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        #[arg(long, value_enum, default_value = "stationary")]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment described by a JSON spec.
    Mc {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-replication estimates as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Include wall-clock time in the JSON output.
        #[arg(long)]
        timing: bool,
    },
    /// Reproduce a simulation table at a chosen number of replications.
    Tables {
        #[arg(long, value_enum)]
        which: WhichTable,
        /// Replications per sample size.
        #[arg(long, default_value_t = 200)]
        scale: usize,
        #[arg(long, value_enum, default_value = "alpha1.5")]
        design: Design,
        #[arg(long, value_delimiter = ',', default_value = "1000")]
        n: Vec<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn seed_or_env(seed: Option<u64>) -> Result<u64> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("{SEED_ENV} must be an unsigned integer, got \"{v}\""))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn check_output(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => {
            Err(Error::InvalidParameter(format!("output directory {} does not exist", p.display())))
        }
        _ => Ok(()),
    }
}

fn check_input(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(Error::Data(format!("input file {} not found", path.display())));
    }
    Ok(())
}

fn fit_config(mode: ModeArg, multistart: usize) -> FitConfig {
    FitConfig {
        mode: mode.into(),
        multistart,
        ..FitConfig::default()
    }
}

/// Execute a parsed command, writing human-readable output to `stdout`.
pub fn execute(cmd: Command, stdout: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Simulate {
            theta,
            n,
            seed,
            burn_in,
            out,
        } => {
            check_output(&out)?;
            if theta.len() != 5 {
                return Err(Error::InvalidParameter(format!("--theta needs 5 comma-separated values, got {}", theta.len())));
            }
            let th = ParamVector::from_array([theta[0], theta[1], theta[2], theta[3], theta[4]])?;
            let seed = seed_or_env(seed)?;
            let path = simulate(&th, n, seed, burn_in)?;
            write_csv(&out, &path.series)?;
            if path.truncated {
                writeln!(stdout, "path left the f64 range; wrote {} of {} values", path.series.n() + 1, n + 1)?;
            }
        }
        Command::Fit {
            input,
            mode,
            multistart,
            out,
        } => {
            check_input(&input)?;
            if let Some(o) = &out {
                check_output(o)?;
            }
            let y = ingest_csv(&input)?;
            let fit = mle::fit(&y, &fit_config(mode, multistart))?;
            let report = Report::from_fit(&fit, &y);
            if let Some(o) = &out {
                emit_report(&report, o)?;
            }
            write!(stdout, "{}", report.to_table())?;
        }
        Command::Test {
            input,
            which,
            alpha_star,
            level,
            mode,
            out,
        } => {
            check_input(&input)?;
            if let Some(o) = &out {
                check_output(o)?;
            }
            if !(level > 0.0 && level < 1.0) {
                return Err(Error::InvalidParameter(format!("--level must lie in (0, 1), got {level}")));
            }
            let y = ingest_csv(&input)?;
            let cfg = fit_config(mode, 6);
            let fit = mle::fit(&y, &cfg)?;
            let test = match which {
                WhichTest::Stationarity => stationarity_test(&fit, &y, level)?.stationarity,
                WhichTest::Symmetry => symmetry_test(&fit, &y, level)?,
                WhichTest::Diagnostic => {
                    let a = alpha_star.unwrap_or_else(|| default_alpha_star(&fit));
                    diagnostic_test(&y, a, level, &cfg)?.report
                }
            };
            let report = Report::from_fit(&fit, &y).with_test(&test);
            if let Some(o) = &out {
                emit_report(&report, o)?;
            }
            write!(stdout, "{}", report.to_table())?;
        }
        Command::Mc { spec, out, csv, timing } => {
            check_input(&spec)?;
            check_output(&out)?;
            let text = std::fs::read_to_string(&spec)?;
            let spec: ExperimentSpec = serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", spec.display())))?;
            let mut result = montecarlo::run(&spec)?;
            if let Some(c) = &csv {
                check_output(c)?;
                std::fs::write(c, replications_csv(&result))?;
            }
            write!(stdout, "{}", experiment_table(&result))?;
            if !timing {
                result = result.without_timing();
            }
            std::fs::write(&out, serde_json::to_string_pretty(&result)? + "\n")?;
        }
        Command::Tables {
            which: WhichTable::Table1,
            scale,
            design,
            n,
            seed,
            out,
        } => {
            if let Some(o) = &out {
                check_output(o)?;
            }
            let theta = match design {
                Design::Alpha15 => montecarlo::table1_design(),
                Design::Alpha10 => ParamVector::new(0.1, 0.1, 0.2, 0.3, 1.0)?,
            };
            let id = match design {
                Design::Alpha15 => "alpha1.5",
                Design::Alpha10 => "alpha1.0",
            };
            let spec = ExperimentSpec::mle(id, theta, n, scale, seed_or_env(seed)?);
            let result = montecarlo::run(&spec)?.without_timing();
            write!(stdout, "{}", experiment_table(&result))?;
            if let Some(o) = &out {
                std::fs::write(o, serde_json::to_string_pretty(&result)? + "\n")?;
            }
        }
    }
    Ok(())
}

/// Parse `args`, run, and return the process exit code. Errors go to
/// standard error as one line `error[<category>]: <message>`.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            return 1;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli.command, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.category());
            e.exit_code()
        }
    }
}
