//! `spintop synth`: generate a layered synthetic game and write it as a
//! payoff matrix over pseudo-rating bins, with the ground-truth layers as a
//! JSON sidecar.

use serde::Serialize;
use spintop_core::payoff::write_payoff_csv;
use spintop_core::synth::{generate, generate_ordered, pseudo_elo_scheme, LayerStructure, SyntheticSpec};

use crate::artifacts::{write_csv_with_comment, write_json, RunMeta};
use crate::error::{CliError, Result};

#[derive(Serialize)]
struct SynthArtifact<'a> {
    layer_sizes: &'a [usize],
    structure: LayerStructure,
    margin: f64,
    ordered: bool,
    seed: u64,
    /// Ground-truth layers under the emitted labels, strongest first.
    layers: Vec<Vec<usize>>,
}

pub fn run(
    meta: &RunMeta,
    layer_sizes: &[usize],
    structure: LayerStructure,
    margin: f64,
    ordered: bool,
) -> Result<()> {
    let spec = SyntheticSpec { layer_sizes: layer_sizes.to_vec(), structure, margin };
    spec.validate().map_err(CliError::config)?;
    let game = if ordered { generate_ordered(&spec) } else { generate(&spec, meta.config.seed) }
        .map_err(CliError::config)?;
    let scheme = pseudo_elo_scheme(game.matrix.m()).map_err(CliError::config)?;
    let midpoints = scheme.midpoints();

    let payoff_path = super::out_path(meta, "payoff.csv");
    write_csv_with_comment(&payoff_path, &meta.comment(), |w| {
        write_payoff_csv(&game.matrix, &midpoints, w).map_err(CliError::from)
    })?;
    let artifact = SynthArtifact {
        layer_sizes,
        structure,
        margin,
        ordered,
        seed: meta.config.seed,
        layers: game.layers.clone(),
    };
    write_json(&super::out_path(meta, "synth_layers.json"), meta, &artifact)?;

    println!(
        "generated {}-strategy layered game ({:?} layers) -> {}",
        game.matrix.m(),
        layer_sizes,
        payoff_path.display()
    );
    Ok(())
}
