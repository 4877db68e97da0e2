//! `spintop sample`: parse PGN archives and keep a uniform per-month sample
//! under the configured quota, instead of every record.

use std::path::PathBuf;

use serde::Serialize;
use spintop_core::ingest::{sample_archive_by_month, write_records, MonthReport};

use crate::artifacts::{write_atomic, write_json, RunMeta};
use crate::error::{CliError, Result};

#[derive(Serialize)]
struct SampleReport {
    months: Vec<MonthReport>,
    total_sampled: u64,
}

pub fn run(meta: &RunMeta, archives: &[PathBuf]) -> Result<()> {
    let archives = super::resolve_archives(meta, archives)?;
    let plan = meta.config.sample_plan();
    plan.validate().map_err(CliError::config)?;

    let mut readers = Vec::with_capacity(archives.len());
    for path in &archives {
        readers.push((super::month_id(path), super::open_archive(path)?));
    }
    let (records, months) = sample_archive_by_month(readers, &plan)?;
    for report in &months {
        if report.quota_shortfall {
            eprintln!(
                "warning: month {} supplied only {} records for a quota of {}",
                report.month, report.universe, plan.per_month_quota
            );
        }
    }

    let records_path = super::out_path(meta, "records.csv");
    let comment = meta.comment();
    write_atomic(&records_path, |w| {
        write_records(w, &records, Some(&comment)).map_err(CliError::from)
    })?;
    let report = SampleReport { total_sampled: records.len() as u64, months };
    write_json(&super::out_path(meta, "sample_report.json"), meta, &report)?;

    println!(
        "sampled {} records from {} months -> {}",
        report.total_sampled,
        report.months.len(),
        records_path.display()
    );
    Ok(())
}
