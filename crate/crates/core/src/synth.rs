//! Synthetic games with planted layer structure, used as ground truth for
//! exercising the clustering and dynamics code paths.
//!
//! A game is a stack of layers: every strategy beats every strategy in a
//! lower layer by a fixed margin, and within a layer the strategies either
//! all draw or form a balanced cyclic tournament (every member beats the
//! next (n-1)/2 members around the circle). Balanced cycles need odd layer
//! sizes; they guarantee each layer is internally tied, so the layers are
//! exactly what equilibrium clustering should recover.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::payoff::{BinScheme, PayoffMatrix};
use crate::{Error, Result};

/// Intra-layer structure of a synthetic game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerStructure {
    /// Balanced cyclic tournament inside each layer (odd sizes only).
    #[serde(rename = "rps")]
    RpsLike,
    /// All intra-layer games are draws.
    Draws,
}

/// Blueprint for a synthetic layered game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Layer sizes, strongest layer first.
    pub layer_sizes: Vec<usize>,
    pub structure: LayerStructure,
    /// Expected score for any cross-layer (or intra-cycle) win, in (0, 1].
    pub margin: f64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.is_empty() {
            return Err(Error::InvalidSynthetic("layer list is empty".into()));
        }
        if self.layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidSynthetic("layers must be non-empty".into()));
        }
        if !(self.margin.is_finite() && self.margin > 0.0 && self.margin <= 1.0) {
            return Err(Error::InvalidSynthetic(format!(
                "margin must lie in (0, 1], got {}",
                self.margin
            )));
        }
        if self.structure == LayerStructure::RpsLike {
            if let Some(&even) = self.layer_sizes.iter().find(|&&s| s > 1 && s % 2 == 0) {
                return Err(Error::InvalidSynthetic(format!(
                    "balanced cycles need odd layer sizes, got {even}"
                )));
            }
        }
        Ok(())
    }

    pub fn total_strategies(&self) -> usize {
        self.layer_sizes.iter().sum()
    }
}

/// A generated game along with its ground-truth layers (strongest first,
/// member indices ascending).
#[derive(Clone, Debug)]
pub struct SyntheticGame {
    pub matrix: PayoffMatrix,
    pub layers: Vec<Vec<usize>>,
}

/// Generates the game with strategies in canonical order: index 0 is the
/// weakest strategy and index m-1 the strongest, so strength aligns with the
/// ascending bins of [`pseudo_elo_scheme`].
pub fn generate_ordered(spec: &SyntheticSpec) -> Result<SyntheticGame> {
    spec.validate()?;
    let m = spec.total_strategies();
    let mut entries = Array2::<f64>::zeros((m, m));

    // Carve 0..m into layers, weakest block first; `spec.layer_sizes` lists
    // the strongest layer first, so it is consumed in reverse.
    let mut layers_weak_first: Vec<Vec<usize>> = Vec::with_capacity(spec.layer_sizes.len());
    let mut next = 0usize;
    for &size in spec.layer_sizes.iter().rev() {
        layers_weak_first.push((next..next + size).collect());
        next += size;
    }

    for (depth, layer) in layers_weak_first.iter().enumerate() {
        // Cross-layer: everything in a higher block beats this whole block.
        for stronger in layers_weak_first.iter().skip(depth + 1) {
            for &s in stronger {
                for &t in layer {
                    entries[(s, t)] = spec.margin;
                    entries[(t, s)] = -spec.margin;
                }
            }
        }
        // Intra-layer: balanced cycle or draws.
        if spec.structure == LayerStructure::RpsLike && layer.len() > 1 {
            let n = layer.len();
            for a in 0..n {
                for offset in 1..=(n - 1) / 2 {
                    let b = (a + offset) % n;
                    entries[(layer[a], layer[b])] = spec.margin;
                    entries[(layer[b], layer[a])] = -spec.margin;
                }
            }
        }
    }

    let layers: Vec<Vec<usize>> = layers_weak_first.into_iter().rev().collect();
    Ok(SyntheticGame { matrix: PayoffMatrix::from_entries(entries)?, layers })
}

/// Generates the game with strategy indices shuffled by a seeded permutation,
/// hiding the layer order from anything reading the matrix. The returned
/// layers are the ground truth under the shuffled labels.
pub fn generate(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticGame> {
    let ordered = generate_ordered(spec)?;
    let m = ordered.matrix.m();
    let mut perm: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perm.shuffle(&mut rng);
    let matrix = ordered.matrix.permuted(&perm)?;
    let layers = ordered
        .layers
        .iter()
        .map(|layer| {
            let mut mapped: Vec<usize> = layer.iter().map(|&s| perm[s]).collect();
            mapped.sort_unstable();
            mapped
        })
        .collect();
    Ok(SyntheticGame { matrix, layers })
}

/// A bin scheme giving synthetic strategy `i` the pseudo-Elo bin
/// `[1000 + 10i, 1000 + 10(i+1))`, so canonical strength order maps onto
/// ascending ratings.
pub fn pseudo_elo_scheme(m: usize) -> Result<BinScheme> {
    let m = i32::try_from(m).map_err(|_| Error::InvalidSynthetic("too many strategies".into()))?;
    BinScheme::new((1000, 1000 + 10 * m), 10)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(layer_sizes: &[usize], structure: LayerStructure, margin: f64) -> SyntheticSpec {
        SyntheticSpec { layer_sizes: layer_sizes.to_vec(), structure, margin }
    }

    #[test]
    fn ordered_single_cycle_layer_is_plain_rps() {
        let game = generate_ordered(&spec(&[3], LayerStructure::RpsLike, 1.0)).unwrap();
        let e = game.matrix.entries();
        // 0 beats 1, 1 beats 2, 2 beats 0.
        assert_eq!(e[(0, 1)], 1.0);
        assert_eq!(e[(1, 2)], 1.0);
        assert_eq!(e[(2, 0)], 1.0);
        assert_eq!(game.layers, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn ordered_layers_put_the_strongest_block_on_top() {
        let game = generate_ordered(&spec(&[1, 3, 1], LayerStructure::RpsLike, 0.25)).unwrap();
        let e = game.matrix.entries();
        assert_eq!(game.layers, vec![vec![4], vec![1, 2, 3], vec![0]]);
        // The top strategy beats every other strategy.
        for t in 0..4 {
            assert_eq!(e[(4, t)], 0.25);
        }
        // The middle layer beats the bottom singleton.
        for s in 1..4 {
            assert_eq!(e[(s, 0)], 0.25);
            assert_eq!(e[(0, s)], -0.25);
        }
        // Inside the middle layer: a balanced cycle at the same margin.
        assert_eq!(e[(1, 2)], 0.25);
        assert_eq!(e[(2, 3)], 0.25);
        assert_eq!(e[(3, 1)], 0.25);
    }

    #[test]
    fn draws_structure_zeroes_the_intra_layer_block() {
        let game = generate_ordered(&spec(&[1, 2], LayerStructure::Draws, 0.5)).unwrap();
        let e = game.matrix.entries();
        assert_eq!(e[(0, 1)], 0.0);
        assert_eq!(e[(1, 0)], 0.0);
        assert_eq!(e[(2, 0)], 0.5);
        assert_eq!(e[(2, 1)], 0.5);
    }

    #[test]
    fn row_sums_depend_only_on_the_layer() {
        // In a layered game a strategy's total score counts the layers below
        // minus the layers above; the internal cycle contributes zero.
        let game =
            generate_ordered(&spec(&[1, 3, 5, 3, 1], LayerStructure::RpsLike, 0.4)).unwrap();
        let sizes = [1usize, 3, 5, 3, 1];
        for (i, layer) in game.layers.iter().enumerate() {
            let below: usize = sizes[i + 1..].iter().sum();
            let above: usize = sizes[..i].iter().sum();
            let want = 0.4 * (below as f64 - above as f64);
            for &s in layer {
                assert!((game.matrix.row_sum(s) - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn seeded_generation_is_deterministic_and_seed_sensitive() {
        let sp = spec(&[1, 3, 1], LayerStructure::RpsLike, 1.0);
        let a = generate(&sp, 7).unwrap();
        let b = generate(&sp, 7).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.layers, b.layers);
        let c = generate(&sp, 8).unwrap();
        assert!(a.matrix != c.matrix || a.layers != c.layers);
    }

    #[test]
    fn shuffled_layers_still_partition_the_strategies() {
        let sp = spec(&[1, 3, 5, 3, 1], LayerStructure::RpsLike, 0.7);
        let game = generate(&sp, 42).unwrap();
        let mut seen: Vec<usize> = game.layers.iter().flatten().copied().collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..13).collect::<Vec<_>>());
        assert_eq!(
            game.layers.iter().map(Vec::len).collect::<Vec<_>>(),
            vec![1, 3, 5, 3, 1]
        );
    }

    #[test]
    fn shuffled_matrix_is_the_relabelled_ordered_matrix() {
        // Cross-layer relations must survive the relabelling: every member
        // of layer r beats every member of layer r+1.
        let sp = spec(&[2, 3], LayerStructure::Draws, 0.6);
        let game = generate(&sp, 5).unwrap();
        for &s in &game.layers[0] {
            for &t in &game.layers[1] {
                assert_eq!(game.matrix.entries()[(s, t)], 0.6);
            }
        }
    }

    #[test]
    fn invalid_blueprints_are_rejected() {
        assert!(generate_ordered(&spec(&[], LayerStructure::Draws, 0.5)).is_err());
        assert!(generate_ordered(&spec(&[2, 0], LayerStructure::Draws, 0.5)).is_err());
        assert!(generate_ordered(&spec(&[1, 4], LayerStructure::RpsLike, 0.5)).is_err());
        assert!(generate_ordered(&spec(&[3], LayerStructure::RpsLike, 0.0)).is_err());
        assert!(generate_ordered(&spec(&[3], LayerStructure::RpsLike, 1.5)).is_err());
        // Even sizes are fine when the layer only draws internally.
        assert!(generate_ordered(&spec(&[2, 4], LayerStructure::Draws, 0.5)).is_ok());
    }

    #[test]
    fn pseudo_scheme_gives_one_bin_per_strategy() {
        let scheme = pseudo_elo_scheme(13).unwrap();
        assert_eq!(scheme.len(), 13);
        assert_eq!(scheme.range(), (1000, 1130));
        assert_eq!(scheme.index_of(1005), Some(0));
        assert_eq!(scheme.index_of(1125), Some(12));
    }
}
