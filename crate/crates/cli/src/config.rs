//! Effective run configuration: defaults, optional TOML file, flag overrides.
//! The resolved config is embedded verbatim in every artifact together with a
//! short hash, so any output can be traced back to the exact settings that
//! produced it.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spintop_core::dynamics::{AllocationMode, FpOptions};
use spintop_core::equilibrium::SolveOptions;
use spintop_core::ingest::SamplePlan;
use spintop_core::payoff::BinScheme;

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Input paths (PGN archives or record files, depending on the command).
    pub inputs: Vec<String>,
    pub out_dir: String,
    /// Half-open rating range `[lo, hi)` covered by the bins.
    pub bin_range: (i32, i32),
    pub bin_width: i32,
    /// Records retained per month when sampling.
    pub quota: usize,
    /// First-stage chunk length of the two-stage sampler.
    pub chunk_size: usize,
    pub seed: u64,
    /// Equilibrium-solver feasibility tolerance (max residual payoff).
    pub feas_tol: f64,
    /// Equilibrium-solver duality-gap tolerance.
    pub gap_tol: f64,
    pub solver_max_iters: usize,
    /// Probability below which a strategy is treated as outside the support.
    pub support_threshold: f64,
    /// Population sizes for fictitious play.
    pub k_list: Vec<usize>,
    /// Fictitious-play step budget; `None` means 4 * m^2.
    pub max_iters: Option<usize>,
    pub allocation: AllocationMode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let solver = SolveOptions::default();
        PipelineConfig {
            inputs: Vec::new(),
            out_dir: "out".into(),
            bin_range: (600, 2900),
            bin_width: 10,
            quota: 120_000,
            chunk_size: 1_000_000,
            seed: 0,
            feas_tol: solver.feas_tol,
            gap_tol: solver.gap_tol,
            solver_max_iters: solver.max_iters,
            support_threshold: solver.support_threshold,
            k_list: vec![1, 2, 3, 5],
            max_iters: None,
            allocation: AllocationMode::Uniform,
        }
    }
}

/// The optional declarative file: every field may be omitted; present fields
/// replace the defaults and are in turn overridden by flags. Unknown keys are
/// rejected so typos fail loudly instead of silently using a default.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub inputs: Option<Vec<String>>,
    pub out_dir: Option<String>,
    pub bin_range: Option<(i32, i32)>,
    pub bin_width: Option<i32>,
    pub quota: Option<usize>,
    pub chunk_size: Option<usize>,
    pub seed: Option<u64>,
    pub feas_tol: Option<f64>,
    pub gap_tol: Option<f64>,
    pub solver_max_iters: Option<usize>,
    pub support_threshold: Option<f64>,
    pub k_list: Option<Vec<usize>>,
    pub max_iters: Option<usize>,
    pub allocation: Option<AllocationMode>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::config(anyhow::anyhow!("cannot read config file {}: {e}", path.display()))
        })?;
        toml::from_str(&text).map_err(|e| {
            CliError::config(anyhow::anyhow!("config file {}: {e}", path.display()))
        })
    }

    pub fn apply(self, base: &mut PipelineConfig) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { base.$field = v; })*
            };
        }
        take!(
            inputs, out_dir, bin_range, bin_width, quota, chunk_size, seed, feas_tol, gap_tol,
            solver_max_iters, support_threshold, k_list, allocation
        );
        if self.max_iters.is_some() {
            base.max_iters = self.max_iters;
        }
    }
}

impl PipelineConfig {
    /// Short content hash of the effective configuration, used to detect
    /// artifacts produced under different settings.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&json);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn scheme(&self) -> Result<BinScheme> {
        BinScheme::new(self.bin_range, self.bin_width).map_err(CliError::config)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            feas_tol: self.feas_tol,
            gap_tol: self.gap_tol,
            max_iters: self.solver_max_iters,
            support_threshold: self.support_threshold,
        }
    }

    pub fn sample_plan(&self) -> SamplePlan {
        SamplePlan { per_month_quota: self.quota, chunk_size: self.chunk_size, seed: self.seed }
    }

    pub fn fp_options(&self) -> FpOptions {
        FpOptions {
            max_iters: self.max_iters,
            allocation: self.allocation,
            solver: self.solve_options(),
        }
    }
}
