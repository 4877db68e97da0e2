//! `spintop ingest`: parse PGN archives into the record file, keeping every
//! valid game, plus a JSON report of what was skipped and why.

use std::path::PathBuf;

use serde::Serialize;
use spintop_core::ingest::{write_records, GameRecord, ParseStats, PgnParser};

use crate::artifacts::{write_atomic, write_json, RunMeta};
use crate::error::{CliError, Result};

#[derive(Serialize)]
struct MonthIngest {
    month: String,
    #[serde(flatten)]
    parse: ParseStats,
}

#[derive(Serialize)]
struct IngestReport {
    months: Vec<MonthIngest>,
    total_games_seen: u64,
    total_records: u64,
    total_skipped: u64,
}

pub fn run(meta: &RunMeta, archives: &[PathBuf]) -> Result<()> {
    let archives = super::resolve_archives(meta, archives)?;

    let mut months: Vec<(String, Vec<GameRecord>, ParseStats)> = Vec::new();
    for path in &archives {
        let month = super::month_id(path);
        let reader = super::open_archive(path)?;
        let mut parser = PgnParser::new(reader, month.clone());
        let mut records = Vec::new();
        for record in parser.by_ref() {
            records.push(record.map_err(|e| {
                CliError::data(anyhow::anyhow!("reading {}: {e}", path.display()))
            })?);
        }
        let stats = parser.into_stats();
        if records.is_empty() {
            eprintln!("warning: {} contained no usable games", path.display());
        }
        months.push((month, records, stats));
    }
    months.sort_by(|a, b| a.0.cmp(&b.0));

    let mut all_records = Vec::new();
    let mut report = IngestReport {
        months: Vec::with_capacity(months.len()),
        total_games_seen: 0,
        total_records: 0,
        total_skipped: 0,
    };
    for (month, records, parse) in months {
        report.total_games_seen += parse.games_seen;
        report.total_records += parse.yielded;
        report.total_skipped += parse.skipped_total();
        report.months.push(MonthIngest { month, parse });
        all_records.extend(records);
    }

    let records_path = super::out_path(meta, "records.csv");
    let comment = meta.comment();
    write_atomic(&records_path, |w| {
        write_records(w, &all_records, Some(&comment)).map_err(CliError::from)
    })?;
    write_json(&super::out_path(meta, "ingest_report.json"), meta, &report)?;

    println!(
        "ingested {} records from {} archives ({} skipped) -> {}",
        report.total_records,
        report.months.len(),
        report.total_skipped,
        records_path.display()
    );
    Ok(())
}
