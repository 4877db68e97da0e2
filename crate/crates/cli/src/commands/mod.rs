//! One module per subcommand. Each command takes the resolved configuration,
//! writes its artifacts under `out_dir`, and reports a short summary on
//! stdout.

pub mod analyze;
pub mod cycles;
pub mod fit_ratings;
pub mod fplay;
pub mod ingest;
pub mod sample;
pub mod synth;

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use crate::artifacts::RunMeta;
use crate::error::{CliError, Result};

/// Month identifier of an archive: its file stem (`2024-01.pgn` -> `2024-01`).
fn month_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| {
        path.to_string_lossy().into_owned()
    })
}

fn open_archive(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path)
        .map_err(|e| CliError::data(anyhow::anyhow!("cannot open {}: {e}", path.display())))?;
    Ok(BufReader::with_capacity(1 << 20, file))
}

/// Input archives: positional paths win; otherwise the config's `inputs`.
fn resolve_archives(meta: &RunMeta, positional: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let paths: Vec<PathBuf> = if positional.is_empty() {
        meta.config.inputs.iter().map(PathBuf::from).collect()
    } else {
        positional.to_vec()
    };
    if paths.is_empty() {
        return Err(CliError::config(anyhow::anyhow!(
            "no input archives: pass paths on the command line or set `inputs` in the config"
        )));
    }
    Ok(paths)
}

fn out_path(meta: &RunMeta, name: &str) -> PathBuf {
    Path::new(&meta.config.out_dir).join(name)
}
