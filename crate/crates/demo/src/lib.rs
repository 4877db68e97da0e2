//! WebAssembly façade over `spintop-core` for the browser playground in
//! `www/`. Each export takes plain scalars and strings and returns a JSON
//! string — either the requested document or `{"error": "..."}` — so the
//! page needs no generated TypeScript glue beyond the wasm-bindgen shims.

use serde::Serialize;
use spintop_core::cycles::{rps_cycle_counts, to_adjacency};
use spintop_core::dynamics::{run_fictitious_play, AllocationMode, FpOptions, FpTrace};
use spintop_core::equilibrium::{nash_clustering, npp_matrix, ts_cluster_winrate, SolveOptions};
use spintop_core::payoff::{expected_score, expected_win_probability};
use spintop_core::synth::{
    generate, generate_ordered, pseudo_elo_scheme, LayerStructure, SyntheticGame, SyntheticSpec,
};
use wasm_bindgen::prelude::*;

fn err_json(msg: impl std::fmt::Display) -> String {
    serde_json::json!({ "error": msg.to_string() }).to_string()
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap_or_else(err_json)
}

/// Parses "1,3,5,3,1" into layer sizes, strongest layer first.
fn parse_layers(text: &str) -> Result<Vec<usize>, String> {
    let sizes: Result<Vec<usize>, _> =
        text.split(',').map(|part| part.trim().parse::<usize>()).collect();
    match sizes {
        Ok(s) if !s.is_empty() => Ok(s),
        Ok(_) => Err("no layer sizes given".to_owned()),
        Err(e) => Err(format!("layer sizes must be comma-separated integers: {e}")),
    }
}

fn parse_structure(text: &str) -> Result<LayerStructure, String> {
    match text {
        "rps" => Ok(LayerStructure::RpsLike),
        "draws" => Ok(LayerStructure::Draws),
        other => Err(format!("unknown layer structure {other:?}; use \"rps\" or \"draws\"")),
    }
}

fn build_game(
    layers: &str,
    structure: &str,
    margin: f64,
    ordered: bool,
    seed: u64,
) -> Result<SyntheticGame, String> {
    let spec = SyntheticSpec {
        layer_sizes: parse_layers(layers)?,
        structure: parse_structure(structure)?,
        margin,
    };
    let game = if ordered { generate_ordered(&spec) } else { generate(&spec, seed) };
    game.map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ClusterView {
    ordinal: usize,
    members: Vec<usize>,
    ne_probabilities: Vec<f64>,
    winrate: f64,
}

#[derive(Serialize)]
struct AnalysisView {
    m: usize,
    midpoints: Vec<f64>,
    payoff: Vec<Vec<f64>>,
    layers: Vec<Vec<usize>>,
    clusters: Vec<ClusterView>,
    npp: Vec<Vec<f64>>,
    cycles_per_strategy: Vec<i64>,
    total_cycles: i64,
}

fn rows(matrix: &ndarray::Array2<f64>) -> Vec<Vec<f64>> {
    matrix.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Generates a layered game and returns its payoff matrix, Nash clusters,
/// relative population performance and 3-cycle counts as one JSON document.
#[wasm_bindgen]
pub fn analyze_layered(
    layers: &str,
    structure: &str,
    margin: f64,
    ordered: bool,
    seed: u64,
) -> String {
    let game = match build_game(layers, structure, margin, ordered, seed) {
        Ok(g) => g,
        Err(e) => return err_json(e),
    };
    let m = game.matrix.m();
    let scheme = match pseudo_elo_scheme(m) {
        Ok(s) => s,
        Err(e) => return err_json(e),
    };
    let clustering = match nash_clustering(&game.matrix, &SolveOptions::default()) {
        Ok(c) => c,
        Err(e) => return err_json(e),
    };
    let mut clusters = Vec::with_capacity(clustering.len());
    for c in clustering.clusters() {
        let winrate = match ts_cluster_winrate(&game.matrix, &clustering, c.ordinal) {
            Ok(w) => w,
            Err(e) => return err_json(e),
        };
        clusters.push(ClusterView {
            ordinal: c.ordinal,
            members: c.members.clone(),
            ne_probabilities: c.ne.probs().to_vec(),
            winrate,
        });
    }
    let counts = rps_cycle_counts(&to_adjacency(&game.matrix));
    to_json(&AnalysisView {
        m,
        midpoints: scheme.midpoints(),
        payoff: rows(game.matrix.entries()),
        layers: game.layers,
        clusters,
        npp: rows(&npp_matrix(&game.matrix, &clustering)),
        cycles_per_strategy: counts.per_strategy,
        total_cycles: counts.total,
    })
}

#[derive(Serialize)]
struct TraceView {
    #[serde(flatten)]
    trace: FpTrace,
    final_wr: f64,
    iterations: usize,
    top_winrate: f64,
}

/// Runs fixed-memory fictitious play with population size `k` on a freshly
/// generated layered game and returns the full trajectory.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn play_fictitious(
    layers: &str,
    structure: &str,
    margin: f64,
    ordered: bool,
    seed: u64,
    k: u32,
    nash_allocation: bool,
    max_iters: u32,
) -> String {
    let game = match build_game(layers, structure, margin, ordered, seed) {
        Ok(g) => g,
        Err(e) => return err_json(e),
    };
    let opts = FpOptions {
        max_iters: if max_iters == 0 { None } else { Some(max_iters as usize) },
        allocation: if nash_allocation {
            AllocationMode::NashEquilibrium
        } else {
            AllocationMode::Uniform
        },
        solver: SolveOptions::default(),
    };
    let mut traces = match run_fictitious_play(&game.matrix, &[k as usize], &opts) {
        Ok(t) => t,
        Err(e) => return err_json(e),
    };
    let trace = traces.remove(&(k as usize)).expect("requested k is present");
    let m = game.matrix.m();
    let top_winrate = (0..m)
        .map(|i| game.matrix.row_sum(i) / m as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let final_point = trace.final_point();
    let (final_wr, iterations) = (final_point.wr, final_point.iteration);
    to_json(&TraceView { trace, final_wr, iterations, top_winrate })
}

#[derive(Serialize)]
struct EloPoint {
    gap: f64,
    win_probability: f64,
    expected_score: f64,
}

/// Samples the Elo link function over rating gaps in `[-gap_limit, gap_limit]`.
#[wasm_bindgen]
pub fn elo_curve(gap_limit: f64, steps: u32) -> String {
    if !(gap_limit > 0.0) || steps < 2 {
        return err_json("need a positive gap limit and at least 2 steps");
    }
    let points: Vec<EloPoint> = (0..steps)
        .map(|i| {
            let gap = -gap_limit + 2.0 * gap_limit * f64::from(i) / f64::from(steps - 1);
            EloPoint {
                gap,
                win_probability: expected_win_probability(gap, 0.0),
                expected_score: expected_score(gap, 0.0),
            }
        })
        .collect();
    to_json(&points)
}
