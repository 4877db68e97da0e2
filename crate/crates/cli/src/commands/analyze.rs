//! `spintop analyze`: records file in; payoff matrix, clustering, cycle
//! counts, rating histogram and skew-normal fit out.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::Serialize;
use spintop_core::equilibrium::{cluster_profile, clustering_document, nash_clustering, npp_matrix, write_npp_csv};
use spintop_core::fitting::{elo_histogram, fit_skew_normal, write_histogram_csv, SkewNormalFit};
use spintop_core::ingest::read_records;
use spintop_core::payoff::{build_payoff_matrix, write_payoff_csv, PayoffDocument};
use spintop_core::cycles::{rps_cycle_counts, to_adjacency, write_cycles_csv};

use crate::artifacts::{check_compatibility, parse_artifact_meta, write_csv_with_comment, write_json, RunMeta};
use crate::error::{CliError, Result};

#[derive(Serialize)]
struct FitArtifact {
    fit: Option<SkewNormalFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_error: Option<String>,
}

pub fn run(meta: &RunMeta, records_path: &Path, expect_records_hash: Option<&str>) -> Result<()> {
    let file = File::open(records_path)
        .map_err(|e| CliError::data(anyhow::anyhow!("cannot open {}: {e}", records_path.display())))?;
    let (records, comments) = read_records(BufReader::new(file))?;
    let upstream = parse_artifact_meta(&comments);
    check_compatibility("record file", &upstream, meta, expect_records_hash)?;

    let scheme = meta.config.scheme()?;
    let (matrix, stats) = build_payoff_matrix(&records, &scheme);
    if stats.games_used == 0 && stats.same_bin == 0 {
        return Err(CliError::data(anyhow::anyhow!(
            "no in-range records: none of the {} records fall into the rating range {:?}",
            records.len(),
            meta.config.bin_range
        )));
    }
    let midpoints = scheme.midpoints();
    let comment = meta.comment();

    write_csv_with_comment(&super::out_path(meta, "payoff.csv"), &comment, |w| {
        write_payoff_csv(&matrix, &midpoints, w).map_err(CliError::from)
    })?;
    let document = PayoffDocument::new(&matrix, Some(scheme.clone()), stats.skipped_out_of_range);
    write_json(&super::out_path(meta, "payoff.json"), meta, &document)?;

    // Solver trouble from here on still leaves the payoff artifacts behind.
    let clustering = nash_clustering(&matrix, &meta.config.solve_options())?;
    let profile = cluster_profile(&matrix, &clustering, &scheme)?;
    write_json(
        &super::out_path(meta, "clustering.json"),
        meta,
        clustering_document(&clustering, &profile),
    )?;
    let npp = npp_matrix(&matrix, &clustering);
    write_csv_with_comment(&super::out_path(meta, "npp.csv"), &comment, |w| {
        write_npp_csv(&npp, w).map_err(CliError::from)
    })?;

    let counts = rps_cycle_counts(&to_adjacency(&matrix));
    write_csv_with_comment(&super::out_path(meta, "cycles.csv"), &comment, |w| {
        write_cycles_csv(&midpoints, &counts, w).map_err(CliError::from)
    })?;

    let histogram = elo_histogram(&records, &scheme);
    write_csv_with_comment(&super::out_path(meta, "histogram.csv"), &comment, |w| {
        write_histogram_csv(&scheme, &histogram, w).map_err(CliError::from)
    })?;

    let points: Vec<(f64, f64)> =
        midpoints.iter().zip(&histogram.counts).map(|(&x, &c)| (x, c as f64)).collect();
    let fit_artifact = match fit_skew_normal(&points) {
        Ok(fit) => FitArtifact { fit: Some(fit), fit_error: None },
        Err(e) => {
            log::warn!("histogram fit unavailable: {e}");
            FitArtifact { fit: None, fit_error: Some(e.to_string()) }
        }
    };
    write_json(&super::out_path(meta, "fit.json"), meta, &fit_artifact)?;

    println!(
        "analyzed {} records: {} bins, {} clusters, {} cycles -> {}",
        records.len(),
        matrix.m(),
        clustering.len(),
        counts.total,
        meta.config.out_dir
    );
    if let Some(fit) = &fit_artifact.fit {
        println!("histogram peak at rating {:.0} (shape {:.2})", fit.peak_x, fit.shape);
    }
    Ok(())
}
