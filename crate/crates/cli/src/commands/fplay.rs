//! `spintop fplay`: fixed-memory fictitious play on an existing payoff
//! matrix, one trace CSV per population size. Population sizes are isolated:
//! one bad k does not stop the others.

use std::fs::File;
use std::path::Path;

use spintop_core::dynamics::{run_fictitious_play, write_fp_trace_csv};
use spintop_core::payoff::read_payoff_csv;

use crate::artifacts::{check_compatibility, parse_artifact_meta, read_comment_lines, write_csv_with_comment, RunMeta};
use crate::error::{CliError, Result};

pub fn run(meta: &RunMeta, payoff_path: &Path, expect_payoff_hash: Option<&str>) -> Result<()> {
    let upstream = parse_artifact_meta(&read_comment_lines(payoff_path)?);
    check_compatibility("payoff file", &upstream, meta, expect_payoff_hash)?;

    let file = File::open(payoff_path)
        .map_err(|e| CliError::data(anyhow::anyhow!("cannot open {}: {e}", payoff_path.display())))?;
    let (matrix, midpoints) = read_payoff_csv(file)?;
    let m = matrix.m();
    let opts = meta.config.fp_options();

    let mut ks: Vec<usize> = Vec::new();
    for &k in &meta.config.k_list {
        if !ks.contains(&k) {
            ks.push(k);
        }
    }
    let mut failures: Vec<CliError> = Vec::new();
    for &k in &ks {
        if k == 0 || k > m {
            eprintln!("error: population size k={k} is outside 1..={m}; skipping");
            failures.push(CliError::config(anyhow::anyhow!(
                "population size k={k} is outside 1..={m}"
            )));
            continue;
        }
        let traces = match run_fictitious_play(&matrix, &[k], &opts) {
            Ok(traces) => traces,
            Err(e) => {
                eprintln!("error: fictitious play with k={k} failed: {e}");
                failures.push(e.into());
                continue;
            }
        };
        let trace = &traces[&k];
        let out = super::out_path(meta, &format!("fplay_k{k}.csv"));
        let comment = format!(
            "{}\nfplay k={k} converged={} iterations={} final_wr={}",
            meta.comment(),
            trace.converged,
            trace.final_point().iteration,
            trace.final_point().wr
        );
        write_csv_with_comment(&out, &comment, |w| {
            write_fp_trace_csv(trace, &midpoints, w).map_err(CliError::from)
        })?;
        println!(
            "k={k}: {} after {} steps (final WR {:.4}) -> {}",
            if trace.converged { "converged" } else { "did not converge" },
            trace.final_point().iteration,
            trace.final_point().wr,
            out.display()
        );
    }

    // Severest failure class decides the exit code; completed ks stay on disk.
    match failures
        .into_iter()
        .max_by_key(CliError::exit_code)
    {
        Some(worst) => Err(worst),
        None => Ok(()),
    }
}
