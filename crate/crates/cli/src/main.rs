//! `kgv`: batch runs for the interval certifier, the sharpness search, the
//! bilinear space-time engine and the weight comparison.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 verification failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(
    name = "kgv",
    version,
    about = "Certify and test bilinear Klein-Gordon weight inequalities"
)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// TOML file with run parameters; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for reports.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "KGV_WORKERS")]
    workers: Option<usize>,

    /// Identity tolerance for `bilinear`; smallest box width for `certify`.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify an inequality on the angle square and write the certificate.
    Certify(commands::CertifyArgs),
    /// Search for violations with exponents below 3/4 and trace sharp ratios.
    Sharpness(commands::SharpnessArgs),
    /// Compare the space-time norm with its frequency form and both bounds.
    Bilinear(commands::BilinearArgs),
    /// Re-check a certificate file.
    Replay(commands::ReplayArgs),
    /// Map where each weight is pointwise smaller and check 1/J below both.
    Weights(commands::WeightsArgs),
}

/// Settings shared by all subcommands after merging flags, file and defaults.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub file: RunConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub workers: usize,
    pub tolerance: Option<f64>,
}

fn resolve(common: &Common) -> anyhow::Result<Resolved> {
    let file = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let tolerance = common.tolerance.or(file.tolerance);
    if let Some(t) = tolerance {
        if !(t > 0.0 && t.is_finite()) {
            anyhow::bail!("--tolerance must be positive, got {t}");
        }
    }
    Ok(Resolved {
        out: common
            .out
            .clone()
            .or_else(|| file.out.clone())
            .unwrap_or_else(|| "out".into()),
        seed: common.seed.or(file.seed).unwrap_or(0),
        workers: common.workers.or(file.workers).unwrap_or(0),
        tolerance,
        file,
    })
}

/// Result of a subcommand that ran to completion.
pub enum Verdict {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    let run = || -> anyhow::Result<Verdict> {
        let r = resolve(&cli.common)?;
        if r.workers > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(r.workers)
                .build_global()?;
        }
        match &cli.command {
            Command::Certify(a) => commands::certify(a, &r),
            Command::Sharpness(a) => commands::sharpness(a, &r),
            Command::Bilinear(a) => commands::bilinear(a, &r),
            Command::Replay(a) => commands::replay(a, &r),
            Command::Weights(a) => commands::weights(a, &r),
        }
    };
    match run() {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
