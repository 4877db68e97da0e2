//! Archive ingestion: PGN parsing, per-month sampling, and the line-delimited
//! record format shared by the pipeline stages.

mod pgn;
mod sample;

pub use pgn::{ParseStats, PgnParser};
pub use sample::{two_stage_sample, SamplePlan, TwoStageSampler};

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Game result from the white player's perspective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Outcome {
    WhiteWin,
    Draw,
    BlackWin,
}

impl Outcome {
    /// Score on the win=1, draw=0, loss=-1 scale, from white's perspective.
    pub fn white_score(self) -> f64 {
        match self {
            Outcome::WhiteWin => 1.0,
            Outcome::Draw => 0.0,
            Outcome::BlackWin => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Outcome::WhiteWin => 1,
            Outcome::Draw => 0,
            Outcome::BlackWin => -1,
        }
    }
}

impl From<Outcome> for i8 {
    fn from(o: Outcome) -> i8 {
        o.as_i8()
    }
}

impl TryFrom<i8> for Outcome {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Outcome::WhiteWin),
            0 => Ok(Outcome::Draw),
            -1 => Ok(Outcome::BlackWin),
            other => Err(Error::Data(format!("outcome must be 1, 0 or -1, got {other}"))),
        }
    }
}

/// One usable game: both ratings and the result, plus an opaque tag naming
/// the archive the game came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub white_rating: i32,
    pub black_rating: i32,
    pub outcome: Outcome,
    pub source_tag: String,
}

const RECORD_HEADER: [&str; 4] = ["white_elo", "black_elo", "outcome", "source_tag"];

/// Writes records as CSV with a `white_elo,black_elo,outcome,source_tag`
/// header row. `comment` lines, when given, are written first prefixed with
/// `#` so loaders and external tools can skip them.
pub fn write_records<W: Write>(
    mut writer: W,
    records: &[GameRecord],
    comment: Option<&str>,
) -> Result<()> {
    if let Some(comment) = comment {
        for line in comment.lines() {
            writeln!(writer, "# {line}")?;
        }
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.white_rating.to_string(),
            r.black_rating.to_string(),
            r.outcome.as_i8().to_string(),
            r.source_tag.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a record file written by [`write_records`], returning the records
/// and any leading `#` comment lines (stripped of the marker).
pub fn read_records<R: BufRead>(mut reader: R) -> Result<(Vec<GameRecord>, Vec<String>)> {
    let mut comments = Vec::new();
    loop {
        let buf = reader.fill_buf()?;
        if buf.first() != Some(&b'#') {
            break;
        }
        let mut line = String::new();
        reader.read_line(&mut line)?;
        comments.push(line.trim_start_matches('#').trim().to_string());
    }
    let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    {
        let headers = csv_reader.headers()?;
        let names: Vec<&str> = headers.iter().collect();
        if names != RECORD_HEADER {
            return Err(Error::Data(format!(
                "record file header must be {RECORD_HEADER:?}, got {names:?}"
            )));
        }
    }
    let mut records = Vec::new();
    for (i, row) in csv_reader.records().enumerate() {
        let row = row?;
        let field = |k: usize| row.get(k).unwrap_or_default().trim();
        let white_rating = field(0)
            .parse::<i32>()
            .map_err(|e| Error::Data(format!("record {i}: white_elo: {e}")))?;
        let black_rating = field(1)
            .parse::<i32>()
            .map_err(|e| Error::Data(format!("record {i}: black_elo: {e}")))?;
        let outcome_raw = field(2)
            .parse::<i8>()
            .map_err(|e| Error::Data(format!("record {i}: outcome: {e}")))?;
        let outcome = Outcome::try_from(outcome_raw)
            .map_err(|_| Error::Data(format!("record {i}: outcome must be 1, 0 or -1")))?;
        records.push(GameRecord {
            white_rating,
            black_rating,
            outcome,
            source_tag: row.get(3).unwrap_or_default().to_string(),
        });
    }
    Ok((records, comments))
}

/// Per-month accounting of a sampling run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonthReport {
    pub month: String,
    /// Valid records the month's archive yielded (the sampling universe).
    pub universe: u64,
    /// Records retained after the two-stage draw.
    pub sampled: u64,
    /// True when the month held fewer records than the quota.
    pub quota_shortfall: bool,
    pub parse: ParseStats,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// Parses and samples each month's archive, then concatenates the samples in
/// chronological (lexicographic month-id) order.
///
/// Each month draws up to the plan quota with the two-stage sampler; months
/// smaller than the quota contribute everything and are flagged. The RNG seed
/// of a month is derived from the plan seed and the month id, so results do
/// not depend on the order archives are supplied in.
pub fn sample_archive_by_month<R: BufRead + Send>(
    archives: Vec<(String, R)>,
    plan: &SamplePlan,
) -> Result<(Vec<GameRecord>, Vec<MonthReport>)> {
    plan.validate()?;
    if archives.is_empty() {
        return Err(Error::EmptyInput("no archives to sample"));
    }

    let process = |(month, reader): (String, R)| -> Result<(String, Vec<GameRecord>, MonthReport)> {
        let month_seed = plan.seed ^ fnv1a(month.as_bytes());
        let mut parser = PgnParser::new(reader, month.clone());
        let mut sampler =
            TwoStageSampler::new(plan.per_month_quota, plan.chunk_size, month_seed);
        for record in parser.by_ref() {
            sampler.push(record?);
        }
        let stats = *parser.stats();
        let (records, universe) = sampler.finish();
        let quota_shortfall = (universe as usize) < plan.per_month_quota;
        if quota_shortfall {
            log::warn!(
                "month {month}: only {universe} records available for a quota of {}",
                plan.per_month_quota
            );
        }
        let report = MonthReport {
            month: month.clone(),
            universe,
            sampled: records.len() as u64,
            quota_shortfall,
            parse: stats,
        };
        Ok((month, records, report))
    };

    #[cfg(feature = "parallel")]
    let months: Result<Vec<_>> = {
        use rayon::prelude::*;
        archives.into_par_iter().map(process).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let months: Result<Vec<_>> = archives.into_iter().map(process).collect();

    let mut months = months?;
    months.sort_by(|a, b| a.0.cmp(&b.0));

    let mut all_records = Vec::new();
    let mut reports = Vec::new();
    for (_, records, report) in months {
        all_records.extend(records);
        reports.push(report);
    }
    Ok((all_records, reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn month_pgn(games: &[(i32, i32, &str)]) -> String {
        games
            .iter()
            .map(|(w, b, r)| {
                format!(
                    "[WhiteElo \"{w}\"]\n[BlackElo \"{b}\"]\n[Result \"{r}\"]\n\n1. e4 {r}\n\n"
                )
            })
            .collect()
    }

    fn plan(quota: usize, seed: u64) -> SamplePlan {
        SamplePlan { per_month_quota: quota, chunk_size: quota.max(4), seed }
    }

    #[test]
    fn record_file_round_trip_with_comment() {
        let records = vec![
            GameRecord {
                white_rating: 2400,
                black_rating: 2200,
                outcome: Outcome::WhiteWin,
                source_tag: "2024-01".into(),
            },
            GameRecord {
                white_rating: 1500,
                black_rating: 1700,
                outcome: Outcome::BlackWin,
                source_tag: "2024-02".into(),
            },
            GameRecord {
                white_rating: 1600,
                black_rating: 1600,
                outcome: Outcome::Draw,
                source_tag: "with, comma".into(),
            },
        ];
        let mut buf = Vec::new();
        write_records(&mut buf, &records, Some("config {\"seed\":7}")).unwrap();
        let (back, comments) = read_records(buf.as_slice()).unwrap();
        assert_eq!(back, records);
        assert_eq!(comments, vec!["config {\"seed\":7}".to_string()]);

        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# config"));
        assert!(text.contains("white_elo,black_elo,outcome,source_tag"));
        assert!(text.contains("1500,1700,-1,2024-02"));
    }

    #[test]
    fn record_file_without_comment() {
        let mut buf = Vec::new();
        write_records(&mut buf, &[], None).unwrap();
        let (back, comments) = read_records(buf.as_slice()).unwrap();
        assert!(back.is_empty());
        assert!(comments.is_empty());
    }

    #[test]
    fn record_file_rejects_bad_outcome_and_header() {
        let bad_outcome = "white_elo,black_elo,outcome,source_tag\n1500,1600,2,x\n";
        assert!(read_records(bad_outcome.as_bytes()).is_err());
        let bad_header = "white,black,outcome,source_tag\n1500,1600,1,x\n";
        assert!(read_records(bad_header.as_bytes()).is_err());
    }

    #[test]
    fn months_concatenate_chronologically_regardless_of_input_order() {
        let jan = month_pgn(&[(1500, 1600, "1-0"), (1700, 1800, "0-1")]);
        let feb = month_pgn(&[(2000, 2100, "1/2-1/2")]);
        let archives = vec![
            ("2024-02".to_string(), feb.as_bytes()),
            ("2024-01".to_string(), jan.as_bytes()),
        ];
        let (records, reports) = sample_archive_by_month(archives, &plan(5, 3)).unwrap();
        assert_eq!(records.len(), 3);
        assert!(records[..2].iter().all(|r| r.source_tag == "2024-01"));
        assert_eq!(records[2].source_tag, "2024-02");
        assert_eq!(reports[0].month, "2024-01");
        assert_eq!(reports[1].month, "2024-02");
        assert!(reports.iter().all(|r| r.quota_shortfall), "both months are under quota");
    }

    #[test]
    fn sampling_is_deterministic_and_order_independent() {
        let a_pgn = month_pgn(&(0..50).map(|i| (1200 + i, 1300 + i, "1-0")).collect::<Vec<_>>());
        let b_pgn = month_pgn(&(0..50).map(|i| (1400 + i, 1250 + i, "0-1")).collect::<Vec<_>>());

        let run = |flip: bool| {
            let mut archives = vec![
                ("2023-05".to_string(), a_pgn.as_bytes()),
                ("2023-06".to_string(), b_pgn.as_bytes()),
            ];
            if flip {
                archives.reverse();
            }
            sample_archive_by_month(archives, &plan(10, 42)).unwrap().0
        };
        let straight = run(false);
        let flipped = run(true);
        assert_eq!(straight, flipped);
        assert_eq!(straight.len(), 20);
    }

    #[test]
    fn empty_archive_list_is_an_error() {
        let archives: Vec<(String, &[u8])> = Vec::new();
        assert!(matches!(
            sample_archive_by_month(archives, &plan(10, 1)),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn month_quota_is_exact_when_data_suffices() {
        let pgn = month_pgn(&(0..200).map(|i| (1200 + i, 1300 + i, "1-0")).collect::<Vec<_>>());
        let archives = vec![("2023-07".to_string(), pgn.as_bytes())];
        let (records, reports) = sample_archive_by_month(archives, &plan(64, 9)).unwrap();
        assert_eq!(records.len(), 64);
        assert_eq!(reports[0].universe, 200);
        assert!(!reports[0].quota_shortfall);
        assert!(reports[0].parse.is_conserved());
    }
}
