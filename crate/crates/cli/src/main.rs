mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("tolerance miss: {0}")]
    Tolerance(String),
    #[error(transparent)]
    Numeric(#[from] magcross::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Tolerance(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numeric(e.into())
    }
}

#[derive(Debug, Parser)]
#[command(name = "magcross", version, about = "Band functions and crossing-line eigenvalues")]
struct Cli {
    /// JSON run configuration; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the CSV / JSON artifacts.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// No stdout; artifacts only.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Degree study of ρ₁(0,0) and ρ₁(α₀,0) on 10 elements over (-5,5).
    Table1(Table1Args),
    /// ρ₁ over an (α, ξ) grid and the refined minimum.
    BandScan(BandScanArgs),
    /// κ₁..κ_n for the ε ladder, rasters and decay profiles.
    KappaLadder(LadderArgs),
    /// Quasimode residuals of the localized operator.
    Quasimode(QuasimodeArgs),
    /// Merged scaled eigenvalues over crossing points.
    LambdaSet(LambdaSetArgs),
    /// Reciprocal-quasimode bound on the cutoff-oscillator instance.
    Ppstar(PpstarArgs),
}

#[derive(Debug, Args)]
pub struct Table1Args {
    /// Comma-separated degrees.
    #[arg(long, value_delimiter = ',')]
    pub degrees: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct BandScanArgs {
    #[arg(long)]
    pub step: Option<f64>,
    /// Refinement levels (step / 10 each).
    #[arg(long)]
    pub refine: Option<usize>,
    /// Scan the ξ = 0 axis only.
    #[arg(long)]
    pub axis_only: bool,
    /// Full 401×401 grid at step 0.01.
    #[arg(long)]
    pub paper_exact: bool,
}

#[derive(Debug, Args)]
pub struct LadderArgs {
    #[arg(long)]
    pub lmax: Option<usize>,
    /// A single level.
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub neigs: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    /// Fit the convergence slope over l = 6..10.
    #[arg(long)]
    pub slope: bool,
    /// Raster points per axis, 0 to skip.
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Args)]
pub struct QuasimodeArgs {
    /// Comma-separated ε values.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// Judge the ψ₀-only residual (slope ≈ 1/2).
    #[arg(long)]
    pub omit_psi1: bool,
}

#[derive(Debug, Args)]
pub struct LambdaSetArgs {
    #[arg(long)]
    pub n_per_point: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub h: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PpstarArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub half_width: Option<f64>,
}

pub struct Ctx {
    pub out_dir: PathBuf,
    pub quiet: bool,
}

impl Ctx {
    pub fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(n) = cli.threads.or(cfg.threads) {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let out_dir = cli.out_dir.clone().or(cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)?;
    let ctx = Ctx { out_dir, quiet: cli.quiet };
    match cli.command {
        Command::Table1(a) => commands::table1(&ctx, cfg.table1, a),
        Command::BandScan(a) => commands::band_scan(&ctx, cfg.band_scan, a),
        Command::KappaLadder(a) => commands::kappa_ladder(&ctx, cfg.kappa_ladder, a),
        Command::Quasimode(a) => commands::quasimode(&ctx, cfg.quasimode, a),
        Command::LambdaSet(a) => commands::lambda_set(&ctx, cfg.lambda_set, a),
        Command::Ppstar(a) => commands::ppstar(&ctx, cfg.ppstar, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("magcross: {e}");
            ExitCode::from(e.code())
        }
    }
}
