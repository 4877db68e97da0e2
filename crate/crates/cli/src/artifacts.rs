//! Artifact plumbing: atomic writes, the provenance header embedded in every
//! output, and parsing of that header when artifacts feed later commands.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};

/// Provenance attached to every artifact of one run.
pub struct RunMeta {
    pub config: PipelineConfig,
    pub config_hash: String,
    pub created_at: u64,
}

impl RunMeta {
    pub fn new(config: PipelineConfig) -> Self {
        let config_hash = config.hash();
        let created_at =
            SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        RunMeta { config, config_hash, created_at }
    }

    /// Comment block placed above CSV header rows; each line is written with
    /// a leading `# `.
    pub fn comment(&self) -> String {
        let json = serde_json::to_string(&self.config).expect("config serializes");
        format!(
            "spintop config_hash={} created_at={}\nconfig {json}",
            self.config_hash, self.created_at
        )
    }
}

/// JSON artifact envelope: provenance fields followed by the payload's own
/// fields, flattened into one object.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub config_hash: &'a str,
    pub created_at: u64,
    pub config: &'a PipelineConfig,
    #[serde(flatten)]
    pub payload: T,
}

/// Writes an artifact atomically: the content lands in a temporary file in
/// the target directory and is renamed over the destination, so readers never
/// observe a half-written artifact and failures leave prior outputs intact.
pub fn write_atomic(
    path: &Path,
    write: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    write(tmp.as_file_mut())?;
    tmp.as_file_mut().flush()?;
    tmp.persist(path).map_err(|e| CliError::data(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, meta: &RunMeta, payload: T) -> Result<()> {
    let envelope = Envelope {
        config_hash: &meta.config_hash,
        created_at: meta.created_at,
        config: &meta.config,
        payload,
    };
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, &envelope)
            .map_err(|e| CliError::data(anyhow::anyhow!("writing {}: {e}", path.display())))?;
        writeln!(w)?;
        Ok(())
    })
}

/// Writes the `# `-prefixed comment block followed by CSV content produced by
/// `write_body`.
pub fn write_csv_with_comment(
    path: &Path,
    comment: &str,
    write_body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    write_atomic(path, |w| {
        for line in comment.lines() {
            writeln!(w, "# {line}")?;
        }
        write_body(w)
    })
}

/// Provenance recovered from an artifact's leading comment lines.
#[derive(Debug, Default)]
pub struct ArtifactMeta {
    pub config_hash: Option<String>,
    pub config: Option<serde_json::Value>,
}

pub fn parse_artifact_meta(comments: &[String]) -> ArtifactMeta {
    let mut meta = ArtifactMeta::default();
    for line in comments {
        if let Some(rest) = line.strip_prefix("spintop ") {
            for kv in rest.split_whitespace() {
                if let Some(hash) = kv.strip_prefix("config_hash=") {
                    meta.config_hash = Some(hash.to_string());
                }
            }
        } else if let Some(json) = line.strip_prefix("config ") {
            meta.config = serde_json::from_str(json).ok();
        }
    }
    meta
}

/// Reads the leading `#` comment lines of an artifact, stripped of markers.
pub fn read_comment_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(anyhow::anyhow!("cannot open {}: {e}", path.display())))?;
    Ok(text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').trim().to_string())
        .collect())
}

/// Enforces the mixing rule: when an upstream artifact embeds provenance, its
/// bin scheme must match the current run's, and when the caller pinned an
/// expected hash it must match exactly.
pub fn check_compatibility(
    what: &str,
    meta: &ArtifactMeta,
    current: &RunMeta,
    expected_hash: Option<&str>,
) -> Result<()> {
    if let Some(expected) = expected_hash {
        match meta.config_hash.as_deref() {
            Some(found) if found == expected => {}
            Some(found) => {
                return Err(CliError::config(anyhow::anyhow!(
                    "{what} was produced under config {found}, expected {expected}"
                )));
            }
            None => {
                return Err(CliError::config(anyhow::anyhow!(
                    "{what} carries no config hash but --expect hash {expected} was given"
                )));
            }
        }
    }
    if let Some(embedded) = &meta.config {
        let range = embedded.get("bin_range").and_then(|v| {
            let lo = v.get(0)?.as_i64()?;
            let hi = v.get(1)?.as_i64()?;
            Some((lo as i32, hi as i32))
        });
        let width = embedded.get("bin_width").and_then(|v| v.as_i64()).map(|w| w as i32);
        if let (Some(range), Some(width)) = (range, width) {
            let cfg = &current.config;
            if range != cfg.bin_range || width != cfg.bin_width {
                return Err(CliError::config(anyhow::anyhow!(
                    "refusing to mix {what} binned as {:?} width {} with the current scheme {:?} width {}; \
                     rebuild it or pass matching --bin-range/--bin-width",
                    range,
                    width,
                    cfg.bin_range,
                    cfg.bin_width
                )));
            }
        }
    }
    Ok(())
}
