//! Command-line driver: parameter sweeps, loss scans and verification
//! reports, written as CSV or JSON.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fockbench::protocol::CombinerConvention;

pub use config::{Command, RawConfig, SweepConfig};
pub use error::CliError;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FOCKBENCH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fockbench", version, about = "Entanglement concentration sweeps in truncated Fock space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Negativity against success probability for simple subtraction.
    SweepSimple(Flags),
    /// The joint strategies against the simple-subtraction envelope.
    SweepJoint(Flags),
    /// Negativity of 1,0,0,1 against homodyne efficiency.
    LossScan(Flags),
    /// Closed forms against brute-force pipelines.
    Verify(VerifyFlags),
    /// Triple-sum identity and factorization of two squeezed vacua.
    VerifyAppendix(Flags),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long = "t2-min", allow_hyphen_values = true)]
    pub t2_min: Option<String>,
    #[arg(long = "t2-max", allow_hyphen_values = true)]
    pub t2_max: Option<String>,
    #[arg(long = "t2-steps")]
    pub t2_steps: Option<String>,
    /// `auto` or the largest photon number per mode.
    #[arg(long)]
    pub cutoff: Option<String>,
    /// Labels separated by `;` or spaces, e.g. `1/0;2/2` or `1,0,0,1;1,1,1,1`.
    #[arg(long)]
    pub strategies: Option<String>,
    /// Comma-separated efficiencies in (0, 1].
    #[arg(long = "eta-grid")]
    pub eta_grid: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<String>,
    /// `csv` or `json`.
    #[arg(long)]
    pub format: Option<String>,
    /// Largest `N` of the triple-sum check.
    #[arg(long = "n-max")]
    pub n_max: Option<String>,
    /// Flat `key=value` file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyFlags {
    #[command(flatten)]
    pub flags: Flags,
    /// Flip the reflection sign of the combining beam splitters.
    #[arg(long = "mirror-combiner", hide = true)]
    pub mirror_combiner: bool,
}

impl Flags {
    fn raw(&self) -> RawConfig {
        RawConfig {
            lambda: self.lambda.clone(),
            t2_min: self.t2_min.clone(),
            t2_max: self.t2_max.clone(),
            t2_steps: self.t2_steps.clone(),
            cutoff: self.cutoff.clone(),
            strategies: self.strategies.clone(),
            eta_grid: self.eta_grid.clone(),
            out: self.out.clone(),
            format: self.format.clone(),
            n_max: self.n_max.clone(),
        }
    }

    /// Defaults, then the config file, then the flags.
    pub fn resolve(&self, command: Command) -> Result<SweepConfig, CliError> {
        let base = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::default(),
        };
        SweepConfig::resolve(command, base.overlay(self.raw()))
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Config(format!("cannot start worker threads: {e}")))
}

fn emit(cfg: &SweepConfig, document: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => fs::write(path, document)?,
        None => std::io::stdout().write_all(document.as_bytes())?,
    }
    Ok(())
}

/// Runs one parsed invocation; verification summaries go to stderr.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    let pool = thread_pool()?;
    pool.install(|| {
        let (cfg, out) = match &cli.command {
            Sub::SweepSimple(f) => {
                let cfg = f.resolve(Command::SweepSimple)?;
                let out = commands::sweep_simple(&cfg)?;
                (cfg, out)
            }
            Sub::SweepJoint(f) => {
                let cfg = f.resolve(Command::SweepJoint)?;
                let out = commands::sweep_joint(&cfg)?;
                (cfg, out)
            }
            Sub::LossScan(f) => {
                let cfg = f.resolve(Command::LossScan)?;
                let out = commands::loss_scan(&cfg)?;
                (cfg, out)
            }
            Sub::Verify(v) => {
                let cfg = v.flags.resolve(Command::Verify)?;
                let convention =
                    if v.mirror_combiner { CombinerConvention::MirroredSign } else { CombinerConvention::Standard };
                let (out, checks) = commands::verify(&cfg, convention)?;
                eprint!("{}", commands::summary(&checks));
                (cfg, out)
            }
            Sub::VerifyAppendix(f) => {
                let cfg = f.resolve(Command::VerifyAppendix)?;
                let (out, checks) = commands::verify_appendix(&cfg)?;
                eprint!("{}", commands::summary(&checks));
                (cfg, out)
            }
        };
        emit(&cfg, &out.document)?;
        if out.failed.is_empty() {
            Ok(())
        } else {
            Err(CliError::Verification(out.failed))
        }
    })
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fockbench: {e}");
            e.exit_code()
        }
    }
}
