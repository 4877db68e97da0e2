//! `spintop`: command-line pipeline from chess archives to payoff matrices,
//! Nash-cluster profiles, cycle counts, fictitious-play traces and rating
//! fits. Exit codes: 0 success, 2 configuration error, 3 data error,
//! 4 solver error.

mod artifacts;
mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spintop_core::dynamics::AllocationMode;
use spintop_core::synth::LayerStructure;

use artifacts::RunMeta;
use config::{ConfigFile, PipelineConfig};
use error::Result;

#[derive(Parser)]
#[command(name = "spintop", version, about = "Non-transitivity analysis of rating-binned games")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every subcommand. Values given here override the
/// config file, which overrides the built-in defaults.
#[derive(Args)]
struct Overrides {
    /// TOML config file
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory artifacts are written to
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<String>,
    /// Rating-bin width
    #[arg(long, global = true, value_name = "WIDTH")]
    bin_width: Option<i32>,
    /// Rating range as LO,HI (half-open)
    #[arg(long, global = true, value_name = "LO,HI", value_parser = parse_range)]
    bin_range: Option<(i32, i32)>,
    /// Per-month sample quota
    #[arg(long, global = true, value_name = "N")]
    quota: Option<usize>,
    /// First-stage chunk length of the sampler
    #[arg(long, global = true, value_name = "N")]
    chunk_size: Option<usize>,
    /// RNG seed for sampling and synthetic generation
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,
    /// Fictitious-play population sizes, comma-separated
    #[arg(long, global = true, value_name = "K1,K2,...", value_delimiter = ',')]
    k_list: Option<Vec<usize>>,
    /// Fictitious-play step budget (default 4*m^2)
    #[arg(long, global = true, value_name = "N")]
    max_iters: Option<usize>,
    /// Population allocation when scoring fictitious-play populations
    #[arg(long, global = true, value_enum, value_name = "MODE")]
    allocation: Option<AllocationArg>,
    /// Equilibrium-solver iteration cap
    #[arg(long, global = true, value_name = "N")]
    solver_max_iters: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AllocationArg {
    Uniform,
    Nash,
}

impl From<AllocationArg> for AllocationMode {
    fn from(a: AllocationArg) -> Self {
        match a {
            AllocationArg::Uniform => AllocationMode::Uniform,
            AllocationArg::Nash => AllocationMode::NashEquilibrium,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StructureArg {
    Rps,
    Draws,
}

impl From<StructureArg> for LayerStructure {
    fn from(s: StructureArg) -> Self {
        match s {
            StructureArg::Rps => LayerStructure::RpsLike,
            StructureArg::Draws => LayerStructure::Draws,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse PGN archives into the record file (one month per archive)
    Ingest {
        /// PGN archive paths; the file stem is the month id
        archives: Vec<PathBuf>,
    },
    /// Parse PGN archives and keep a uniform per-month sample
    Sample {
        archives: Vec<PathBuf>,
    },
    /// Build the payoff matrix, clustering, cycles, histogram and fit
    Analyze {
        /// Record file produced by `ingest` or `sample`
        #[arg(long, value_name = "FILE")]
        records: PathBuf,
        /// Refuse records whose embedded config hash differs
        #[arg(long, value_name = "HASH")]
        expect_records_hash: Option<String>,
    },
    /// Count directed 3-cycles of an existing payoff matrix
    Cycles {
        #[arg(long, value_name = "FILE")]
        payoff: PathBuf,
    },
    /// Fixed-memory fictitious play over an existing payoff matrix
    Fplay {
        #[arg(long, value_name = "FILE")]
        payoff: PathBuf,
        /// Refuse a payoff file whose embedded config hash differs
        #[arg(long, value_name = "HASH")]
        expect_payoff_hash: Option<String>,
    },
    /// Fit affine maps between rating systems from a comparison table
    FitRatings {
        /// CSV with lichess/uscf/fide columns (blank cells allowed)
        #[arg(long, value_name = "FILE")]
        table: PathBuf,
    },
    /// Generate a layered synthetic game as a payoff matrix
    Synth {
        /// Layer sizes, strongest first, comma-separated
        #[arg(long, value_name = "S1,S2,...", value_delimiter = ',', required = true)]
        layers: Vec<usize>,
        #[arg(long, value_enum, default_value = "rps")]
        structure: StructureArg,
        /// Cross-layer (and intra-cycle) winning score, in (0, 1]
        #[arg(long, default_value_t = 0.5)]
        margin: f64,
        /// Emit strategies in strength order instead of a seeded shuffle
        #[arg(long)]
        ordered: bool,
    },
}

fn parse_range(s: &str) -> std::result::Result<(i32, i32), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected LO,HI (e.g. 600,2900), got {s:?}"))?;
    let lo = lo.trim().parse::<i32>().map_err(|e| format!("range start: {e}"))?;
    let hi = hi.trim().parse::<i32>().map_err(|e| format!("range end: {e}"))?;
    Ok((lo, hi))
}

fn effective_config(overrides: &Overrides) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &overrides.config {
        ConfigFile::load(path)?.apply(&mut cfg);
    }
    macro_rules! over {
        ($($field:ident),*) => {
            $(if let Some(v) = overrides.$field.clone() { cfg.$field = v; })*
        };
    }
    over!(out_dir, bin_width, bin_range, quota, chunk_size, seed, k_list);
    if overrides.max_iters.is_some() {
        cfg.max_iters = overrides.max_iters;
    }
    if let Some(mode) = overrides.allocation {
        cfg.allocation = mode.into();
    }
    if let Some(n) = overrides.solver_max_iters {
        cfg.solver_max_iters = n;
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> Result<()> {
    let config = effective_config(&cli.overrides)?;
    let meta = RunMeta::new(config);
    match &cli.command {
        Command::Ingest { archives } => commands::ingest::run(&meta, archives),
        Command::Sample { archives } => commands::sample::run(&meta, archives),
        Command::Analyze { records, expect_records_hash } => {
            commands::analyze::run(&meta, records, expect_records_hash.as_deref())
        }
        Command::Cycles { payoff } => commands::cycles::run(&meta, payoff),
        Command::Fplay { payoff, expect_payoff_hash } => {
            commands::fplay::run(&meta, payoff, expect_payoff_hash.as_deref())
        }
        Command::FitRatings { table } => commands::fit_ratings::run(&meta, table),
        Command::Synth { layers, structure, margin, ordered } => {
            commands::synth::run(&meta, layers, (*structure).into(), *margin, *ordered)
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(err) = dispatch(&cli) {
        eprintln!("spintop: error: {err}");
        std::process::exit(err.exit_code());
    }
}
