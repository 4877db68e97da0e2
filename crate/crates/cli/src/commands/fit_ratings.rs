//! `spintop fit-ratings`: least-squares affine maps between rating systems
//! from a comparison table, plus a consistency check of the composed
//! Lichess -> USCF -> FIDE path against the direct fit.

use std::fs::File;
use std::path::Path;

use serde::Serialize;
use spintop_core::fitting::{LinearMap, RatingSystem, RatingTable};

use crate::artifacts::{write_json, RunMeta};
use crate::error::{CliError, Result};

#[derive(Serialize)]
struct CompositionCheck {
    composed_slope: f64,
    composed_intercept: f64,
    max_abs_gap: f64,
    tolerance: f64,
    consistent: bool,
}

#[derive(Serialize)]
struct RatingMapsArtifact {
    lichess_to_uscf: LinearMap,
    uscf_to_fide: LinearMap,
    lichess_to_fide: LinearMap,
    rows: usize,
    composition: CompositionCheck,
}

fn rmse(pairs: &[(f64, f64)], map: &LinearMap) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let ss: f64 = pairs.iter().map(|&(x, y)| (y - map.translate(x)).powi(2)).sum();
    (ss / pairs.len() as f64).sqrt()
}

pub fn run(meta: &RunMeta, table_path: &Path) -> Result<()> {
    let file = File::open(table_path)
        .map_err(|e| CliError::data(anyhow::anyhow!("cannot open {}: {e}", table_path.display())))?;
    let table = RatingTable::from_csv(file)?;

    let lu_pairs = table.pairs(RatingSystem::Lichess, RatingSystem::Uscf);
    let uf_pairs = table.pairs(RatingSystem::Uscf, RatingSystem::Fide);
    let lf_pairs = table.pairs(RatingSystem::Lichess, RatingSystem::Fide);
    let lu = table.fit(RatingSystem::Lichess, RatingSystem::Uscf)?;
    let uf = table.fit(RatingSystem::Uscf, RatingSystem::Fide)?;
    let lf = table.fit(RatingSystem::Lichess, RatingSystem::Fide)?;
    for (name, map) in
        [("lichess->uscf", &lu), ("uscf->fide", &uf), ("lichess->fide", &lf)]
    {
        if map.slope <= 0.0 {
            eprintln!("warning: {name} slope {:.4} is not positive", map.slope);
        }
    }

    let composed = lu.then(&uf);
    let tolerance =
        3.0 * (rmse(&lf_pairs, &lf) + rmse(&uf_pairs, &uf) + uf.slope.abs() * rmse(&lu_pairs, &lu));
    let max_abs_gap = lf_pairs
        .iter()
        .map(|&(x, _)| (composed.translate(x) - lf.translate(x)).abs())
        .fold(0.0f64, f64::max);
    let consistent = max_abs_gap <= tolerance;
    if !consistent {
        eprintln!(
            "warning: composed map disagrees with the direct fit by up to {max_abs_gap:.2} \
             (tolerance {tolerance:.2})"
        );
    }

    let artifact = RatingMapsArtifact {
        lichess_to_uscf: lu,
        uscf_to_fide: uf,
        lichess_to_fide: lf,
        rows: table.len(),
        composition: CompositionCheck {
            composed_slope: composed.slope,
            composed_intercept: composed.intercept,
            max_abs_gap,
            tolerance,
            consistent,
        },
    };
    let out = super::out_path(meta, "rating_maps.json");
    write_json(&out, meta, &artifact)?;
    println!(
        "fitted 3 rating maps over {} rows (composition gap {:.2} <= {:.2}: {}) -> {}",
        artifact.rows,
        max_abs_gap,
        tolerance,
        consistent,
        out.display()
    );
    Ok(())
}
