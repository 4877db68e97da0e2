//! Measures non-transitive structure in populations of game-playing strategies.
//!
//! The pipeline runs in three stages. First, archives of chess games are
//! streamed, sampled month by month, and reduced to rating-binned records
//! ([`ingest`]). Second, the records are folded into an antisymmetric payoff
//! matrix over rating bins ([`payoff`]), which is decomposed into ordered Nash
//! clusters with win-rate and cycle statistics ([`equilibrium`], [`cycles`]).
//! Third, the resulting profile is summarised by curve fits ([`fitting`]) and
//! probed with fixed-memory fictitious play ([`dynamics`]).
//!
//! Synthetic layered games with known cluster structure are available in
//! [`synth`] for calibration and testing.

pub mod cycles;
pub mod dynamics;
pub mod equilibrium;
pub mod fitting;
pub mod ingest;
pub mod payoff;
pub mod synth;

use thiserror::Error as ThisError;

/// Unified error type for the pipeline.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid bin scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid sample plan: {0}")]
    InvalidPlan(String),

    #[error("sample of {requested} exceeds universe of {available}")]
    SampleExceedsUniverse { requested: usize, available: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("malformed data: {0}")]
    Data(String),

    #[error(
        "equilibrium solver did not converge{context} (kkt residual {kkt_residual:.3e} after {iterations} iterations)"
    )]
    Solver {
        /// Extra context such as the residual strategy set, prefixed with a space when present.
        context: String,
        kkt_residual: f64,
        iterations: usize,
        /// Best iterate seen, by KKT residual.
        best: Vec<f64>,
    },

    #[error("cluster ordering violated: {0}")]
    ClusterOrdering(String),

    #[error("empty strategy index set")]
    EmptyIndexSet,

    #[error("cluster ordinal {ordinal} out of range 1..={count}")]
    OrdinalOutOfRange { ordinal: usize, count: usize },

    #[error("invalid population size {k} for {m} strategies")]
    InvalidPopulationSize { k: usize, m: usize },

    #[error("invalid synthetic spec: {0}")]
    InvalidSynthetic(String),

    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
