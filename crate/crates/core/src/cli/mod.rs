//! Batch front-end. Every command writes one JSON document or one CSV table
//! and exits with 0 (success), 1 (evidence or numeric failure) or 2 (usage or
//! configuration error).

mod commands;
pub use commands::{read_characteristic_columns, ConstructionFile};
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::error::Error;
use config::ConfigFile;

pub const EXIT_OK: u8 = 0;
pub const EXIT_EVIDENCE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Evidence(String),
    #[error(transparent)]
    Library(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Evidence(_) | CliError::Io(_) => EXIT_EVIDENCE,
            CliError::Library(e) => match e {
                Error::QuadratureCapExceeded { .. } | Error::RadiusOnSingularity { .. } => {
                    EXIT_EVIDENCE
                }
                _ => EXIT_USAGE,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "nojulia",
    version,
    about = "Meromorphic function of logarithmic order without Julia directions"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Logarithmic order, strictly between 1 and 2
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Product truncation tolerance
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Quadrature tolerance for the proximity functions
    #[arg(long = "quad-tol", global = true)]
    pub quad_tol: Option<f64>,
    #[arg(long = "log-r-min", global = true, allow_hyphen_values = true)]
    pub log_r_min: Option<f64>,
    #[arg(long = "log-r-max", global = true, allow_hyphen_values = true)]
    pub log_r_max: Option<f64>,
    /// Radius grid size
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true)]
    pub directions: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 picks one per core
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// key = value run file; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Construction JSON written by `construct`
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute n0 and its disjointness certificate
    Construct {
        /// Fixed upper end of the disjointness scan (default: widen until found)
        #[arg(long = "scan-upper")]
        scan_upper: Option<u64>,
    },
    /// Level disks F_n for n0 < n <= n_max
    Geometry {
        #[arg(long = "n-max", default_value_t = 20)]
        n_max: u64,
    },
    /// Evaluate f at points given as LOG_MODULUS,ARG
    Eval {
        #[arg(
            long = "point",
            id = "point",
            required = true,
            allow_hyphen_values = true
        )]
        points: Vec<String>,
    },
    /// Proximity, counting and characteristic functions on a radius grid
    Characteristic,
    /// Fit the logarithmic order to a characteristic CSV
    Order { input: PathBuf },
    /// Sample sectors around evenly spaced directions
    Scan {
        /// Radii per direction
        #[arg(long)]
        radii: Option<usize>,
        /// Replace f by tan z, which omits nothing (the scan must fail)
        #[arg(long)]
        surrogate: bool,
    },
}

/// Flags merged over the config file over built-in defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lambda: Option<f64>,
    pub eps: f64,
    pub quad_tol: f64,
    pub log_r_min: Option<f64>,
    pub log_r_max: Option<f64>,
    pub points: usize,
    pub directions: usize,
    pub seed: u64,
    pub threads: usize,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub spec: Option<PathBuf>,
    pub radii: Option<usize>,
}

impl RunConfig {
    pub fn resolve(args: &GlobalArgs, radii: Option<usize>) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let format = match (args.format, file.get::<String>("format")?) {
            (Some(f), _) => Some(f),
            (None, Some(s)) => Some(
                Format::from_str(&s, true)
                    .map_err(|_| CliError::Usage(format!("unknown format {s:?}")))?,
            ),
            (None, None) => None,
        };
        let cfg = RunConfig {
            lambda: args.lambda.or(file.get("lambda")?),
            eps: args.eps.or(file.get("eps")?).unwrap_or(1e-10),
            quad_tol: args.quad_tol.or(file.get("quad_tol")?).unwrap_or(1e-6),
            log_r_min: args.log_r_min.or(file.get("log_r_min")?),
            log_r_max: args.log_r_max.or(file.get("log_r_max")?),
            points: args.points.or(file.get("points")?).unwrap_or(16),
            directions: args.directions.or(file.get("directions")?).unwrap_or(360),
            seed: args.seed.or(file.get("seed")?).unwrap_or(0),
            threads: args.threads.or(file.get("threads")?).unwrap_or(0),
            out: args.out.clone().or(file.get("out")?),
            format,
            spec: args.spec.clone().or(file.get("spec")?),
            radii: radii.or(file.get("radii")?),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [("eps", self.eps), ("quad-tol", self.quad_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
            }
        }
        if self.points < 8 {
            return Err(CliError::Usage(format!(
                "points must be at least 8, got {}",
                self.points
            )));
        }
        if let (Some(lo), Some(hi)) = (self.log_r_min, self.log_r_max) {
            if !(lo < hi) {
                return Err(CliError::Usage(format!(
                    "log-r-min must be below log-r-max, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let radii = match &cli.command {
        Command::Scan { radii, .. } => *radii,
        _ => None,
    };
    let cfg = RunConfig::resolve(&cli.global, radii)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} threads: {e}", cfg.threads)))?;
    let output = pool.install(|| commands::dispatch(&cli.command, &cfg))?;
    match &cfg.out {
        Some(path) => std::fs::write(path, output.text.as_bytes())?,
        None => std::io::stdout().write_all(output.text.as_bytes())?,
    }
    match output.failure {
        Some(msg) => Err(CliError::Evidence(msg)),
        None => Ok(()),
    }
}
