//! Population fictitious play over the strategies of an empirical game.
//!
//! A population of fixed size k climbs the game by repeatedly admitting the
//! weakest outside strategy that still beats the current population in
//! aggregate, retiring its oldest member in exchange. Convergence means no
//! outside strategy beats the population; in strongly cyclic games small
//! populations can orbit forever, which is the behaviour this module exists
//! to measure.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::equilibrium::{self, SolveOptions};
use crate::payoff::PayoffMatrix;
use crate::{Error, Result};

/// How the population's mixture is weighted when scoring it against the
/// whole strategy set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllocationMode {
    /// Every member carries weight 1/k.
    #[default]
    Uniform,
    /// Members are weighted by the maximum-entropy equilibrium of the
    /// population's internal game.
    #[serde(rename = "nash")]
    NashEquilibrium,
}

/// Knobs for a fictitious-play run.
#[derive(Clone, Copy, Debug, Default)]
pub struct FpOptions {
    /// Step budget per run; defaults to 4 * m^2 when unset.
    pub max_iters: Option<usize>,
    pub allocation: AllocationMode,
    /// Solver settings used when `allocation` is `NashEquilibrium`.
    pub solver: SolveOptions,
}

/// A population mid-run: member strategy indices ordered oldest first, and
/// the number of steps taken so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PopulationState {
    members: Vec<usize>,
    t: usize,
}

impl PopulationState {
    /// Member strategies, oldest first.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn t(&self) -> usize {
        self.t
    }
}

/// Result of one fictitious-play step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Replaced { incoming: usize, outgoing: usize },
    /// No outside strategy beats the population; the run is finished.
    Converged,
}

/// Winrate of every strategy against the rest of the field.
pub fn strategy_winrates(matrix: &PayoffMatrix) -> Vec<f64> {
    (0..matrix.m())
        .map(|s| equilibrium::ts_strategy_winrate(matrix, s).expect("index in range"))
        .collect()
}

/// Seeds a population with the k weakest strategies by winrate (ties to the
/// lower index), ordered weakest first so the weakest retires first.
pub fn init_population(matrix: &PayoffMatrix, k: usize) -> Result<PopulationState> {
    let m = matrix.m();
    if k == 0 || k > m {
        return Err(Error::InvalidPopulationSize { k, m });
    }
    let ts = strategy_winrates(matrix);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| ts[a].partial_cmp(&ts[b]).expect("finite winrates").then(a.cmp(&b)));
    order.truncate(k);
    Ok(PopulationState { members: order, t: 0 })
}

/// Advances the population one step: the weakest outside strategy with a
/// strictly positive aggregate score against the population replaces the
/// oldest member. `ts` must be the per-strategy winrates of the full game.
pub fn fp_step(matrix: &PayoffMatrix, state: &mut PopulationState, ts: &[f64]) -> StepOutcome {
    let m = matrix.m();
    debug_assert_eq!(ts.len(), m);
    let entries = matrix.entries();
    let mut in_pop = vec![false; m];
    for &s in &state.members {
        in_pop[s] = true;
    }
    let mut incoming: Option<usize> = None;
    let mut best_ts = f64::INFINITY;
    for s in 0..m {
        if in_pop[s] {
            continue;
        }
        let total: f64 = state.members.iter().map(|&r| entries[(s, r)]).sum();
        if total > 0.0 && ts[s] < best_ts {
            best_ts = ts[s];
            incoming = Some(s);
        }
    }
    match incoming {
        None => StepOutcome::Converged,
        Some(s) => {
            let outgoing = state.members.remove(0);
            state.members.push(s);
            state.t += 1;
            StepOutcome::Replaced { incoming: s, outgoing }
        }
    }
}

/// Mixture weights for a population under the given allocation mode.
pub fn population_allocation(
    matrix: &PayoffMatrix,
    members: &[usize],
    mode: AllocationMode,
    solver: &SolveOptions,
) -> Result<Vec<f64>> {
    if members.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    match mode {
        AllocationMode::Uniform => Ok(vec![1.0 / members.len() as f64; members.len()]),
        AllocationMode::NashEquilibrium => {
            let entries = matrix.entries();
            let sub = ndarray::Array2::from_shape_fn((members.len(), members.len()), |(a, b)| {
                entries[(members[a], members[b])]
            });
            let sub_matrix = PayoffMatrix::from_entries(sub)?;
            let ne = equilibrium::solve_maxent_ne(&sub_matrix, solver)?;
            Ok(ne.probs().to_vec())
        }
    }
}

/// Mean score of the weighted population against the entire strategy set:
/// sum_i alloc_i * row_sum(member_i) / m.
pub fn wr_performance(matrix: &PayoffMatrix, members: &[usize], allocation: &[f64]) -> f64 {
    debug_assert_eq!(members.len(), allocation.len());
    let m = matrix.m() as f64;
    members.iter().zip(allocation).map(|(&s, &w)| w * matrix.row_sum(s)).sum::<f64>() / m
}

/// One recorded point of a fictitious-play trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FpPoint {
    pub iteration: usize,
    pub wr: f64,
    /// Population members at this point, oldest first.
    pub members: Vec<usize>,
}

/// A full trajectory for one population size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FpTrace {
    pub k: usize,
    pub converged: bool,
    pub points: Vec<FpPoint>,
}

impl FpTrace {
    pub fn final_point(&self) -> &FpPoint {
        self.points.last().expect("a trace has at least its initial point")
    }
}

fn run_single(
    matrix: &PayoffMatrix,
    k: usize,
    ts: &[f64],
    opts: &FpOptions,
) -> Result<FpTrace> {
    let m = matrix.m();
    let max_iters = opts.max_iters.unwrap_or(4 * m * m);
    let mut state = init_population(matrix, k)?;
    let mut points = Vec::with_capacity(max_iters.min(1024) + 1);
    let record = |state: &PopulationState, points: &mut Vec<FpPoint>| -> Result<()> {
        let alloc = population_allocation(matrix, &state.members, opts.allocation, &opts.solver)?;
        points.push(FpPoint {
            iteration: state.t,
            wr: wr_performance(matrix, &state.members, &alloc),
            members: state.members.clone(),
        });
        Ok(())
    };
    record(&state, &mut points)?;
    let mut converged = false;
    while state.t < max_iters {
        match fp_step(matrix, &mut state, ts) {
            StepOutcome::Converged => {
                converged = true;
                break;
            }
            StepOutcome::Replaced { .. } => record(&state, &mut points)?,
        }
    }
    // A run that exhausted its budget may still be at a fixed point; check.
    if !converged && fp_step(matrix, &mut state.clone(), ts) == StepOutcome::Converged {
        converged = true;
    }
    Ok(FpTrace { k, converged, points })
}

/// Runs fictitious play for every population size in `ks` and returns the
/// traces keyed by k. Population sizes must lie in 1..=m.
pub fn run_fictitious_play(
    matrix: &PayoffMatrix,
    ks: &[usize],
    opts: &FpOptions,
) -> Result<BTreeMap<usize, FpTrace>> {
    if ks.is_empty() {
        return Err(Error::EmptyInput("population size list"));
    }
    let m = matrix.m();
    for &k in ks {
        if k == 0 || k > m {
            return Err(Error::InvalidPopulationSize { k, m });
        }
    }
    let mut unique: Vec<usize> = ks.to_vec();
    unique.sort_unstable();
    unique.dedup();
    let ts = strategy_winrates(matrix);

    #[cfg(feature = "parallel")]
    let traces: Result<Vec<(usize, FpTrace)>> = unique
        .par_iter()
        .map(|&k| run_single(matrix, k, &ts, opts).map(|t| (k, t)))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let traces: Result<Vec<(usize, FpTrace)>> =
        unique.iter().map(|&k| run_single(matrix, k, &ts, opts).map(|t| (k, t))).collect();

    Ok(traces?.into_iter().collect())
}

/// Writes a trajectory as CSV: iteration, winrate, and the population as a
/// semicolon-joined list of bin midpoints. `midpoints` maps strategy index to
/// midpoint and must cover every member index.
pub fn write_fp_trace_csv<W: Write>(
    trace: &FpTrace,
    midpoints: &[f64],
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["iteration", "wr", "population_member_midpoints"])?;
    for p in &trace.points {
        if let Some(&bad) = p.members.iter().find(|&&s| s >= midpoints.len()) {
            return Err(Error::Data(format!(
                "trace member {bad} has no midpoint (only {} provided)",
                midpoints.len()
            )));
        }
        let members =
            p.members.iter().map(|&s| midpoints[s].to_string()).collect::<Vec<_>>().join(";");
        w.write_record([p.iteration.to_string(), p.wr.to_string(), members])?;
    }
    w.flush()?;
    Ok(())
}
