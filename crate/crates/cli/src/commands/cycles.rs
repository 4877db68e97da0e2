//! `spintop cycles`: count directed 3-cycles through each bin of an existing
//! payoff matrix.

use std::fs::File;
use std::path::Path;

use spintop_core::cycles::{rps_cycle_counts, to_adjacency, write_cycles_csv};
use spintop_core::payoff::read_payoff_csv;

use crate::artifacts::{write_csv_with_comment, RunMeta};
use crate::error::{CliError, Result};

pub fn run(meta: &RunMeta, payoff_path: &Path) -> Result<()> {
    let file = File::open(payoff_path)
        .map_err(|e| CliError::data(anyhow::anyhow!("cannot open {}: {e}", payoff_path.display())))?;
    let (matrix, midpoints) = read_payoff_csv(file)?;
    let counts = rps_cycle_counts(&to_adjacency(&matrix));

    let out = super::out_path(meta, "cycles.csv");
    write_csv_with_comment(&out, &meta.comment(), |w| {
        write_cycles_csv(&midpoints, &counts, w).map_err(CliError::from)
    })?;
    println!("{} cycles across {} bins -> {}", counts.total, matrix.m(), out.display());
    Ok(())
}
