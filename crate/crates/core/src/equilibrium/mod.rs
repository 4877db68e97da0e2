//! Equilibria of the empirical game and the structure built on top of them:
//! Nash clustering, relative population performance, and transitive-strength
//! summaries.

mod maxent;
mod minimax;

use std::io::Write;

use ndarray::{aview1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::payoff::{BinScheme, PayoffMatrix};
use crate::{Error, Result};

pub use maxent::{SolveFailure, SolveOptions};

/// NPP values above this count as one cluster beating another.
pub const NPP_WIN_THRESHOLD: f64 = 1e-9;

/// Tolerance for the sign pattern checks on the cluster NPP matrix.
const NPP_SIGN_TOL: f64 = 1e-8;

/// A probability vector over the strategies of a game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy {
    probs: Vec<f64>,
    support_threshold: f64,
}

impl MixedStrategy {
    /// Validates and wraps a probability vector. Entries must be finite and
    /// non-negative (tiny negative rounding noise is clipped) and must sum
    /// to one within 1e-9.
    pub fn new(mut probs: Vec<f64>, support_threshold: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyInput("mixed strategy"));
        }
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -1e-12 {
                return Err(Error::Data(format!("invalid probability {p}")));
            }
            *p = p.max(0.0);
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Data(format!("probabilities sum to {total}, not 1")));
        }
        Ok(MixedStrategy { probs, support_threshold })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Indices carrying more than the support threshold of probability.
    pub fn support(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > self.support_threshold)
            .map(|(i, _)| i)
            .collect()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }
}

/// Finds the maximum-entropy symmetric Nash equilibrium of the game.
pub fn solve_maxent_ne(matrix: &PayoffMatrix, opts: &SolveOptions) -> Result<MixedStrategy> {
    let probs = maxent::solve_maxent(matrix.entries().view(), opts)
        .map_err(|f| f.into_error(format!("maximum-entropy equilibrium, {} strategies", matrix.m())))?;
    MixedStrategy::new(probs, opts.support_threshold)
}

/// Solves the maximum-entropy equilibrium of the game restricted to `indices`
/// and returns the probabilities padded back out to the full strategy set.
fn solve_restricted(
    entries: &Array2<f64>,
    indices: &[usize],
    opts: &SolveOptions,
) -> std::result::Result<Vec<f64>, SolveFailure> {
    let k = indices.len();
    let sub = Array2::from_shape_fn((k, k), |(a, b)| entries[(indices[a], indices[b])]);
    let local = maxent::solve_maxent(sub.view(), opts)?;
    let mut padded = vec![0.0; entries.nrows()];
    for (slot, &global) in indices.iter().enumerate() {
        padded[global] = local[slot];
    }
    Ok(padded)
}

/// One cluster in a Nash clustering: its 1-based rank, its member strategy
/// indices (ascending), and the equilibrium of the residual game it was the
/// support of, padded to full length.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NashCluster {
    pub ordinal: usize,
    pub members: Vec<usize>,
    pub ne: MixedStrategy,
}

/// An ordered partition of the strategy set by iterated equilibrium support.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Clustering {
    clusters: Vec<NashCluster>,
    m: usize,
}

impl Clustering {
    pub fn clusters(&self) -> &[NashCluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Number of strategies in the underlying game.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Looks up a cluster by its 1-based ordinal.
    pub fn cluster(&self, ordinal: usize) -> Result<&NashCluster> {
        if ordinal == 0 || ordinal > self.clusters.len() {
            return Err(Error::OrdinalOutOfRange { ordinal, count: self.clusters.len() });
        }
        Ok(&self.clusters[ordinal - 1])
    }
}

/// Partitions the strategies by repeatedly solving the maximum-entropy
/// equilibrium of the residual game and peeling off its support. The first
/// cluster is the strongest: every strategy outside it is a strictly worse
/// reply to the residual equilibrium.
pub fn nash_clustering(matrix: &PayoffMatrix, opts: &SolveOptions) -> Result<Clustering> {
    let m = matrix.m();
    if m == 0 {
        return Err(Error::EmptyInput("payoff matrix"));
    }
    let entries = matrix.entries();
    let mut residual: Vec<usize> = (0..m).collect();
    let mut clusters = Vec::new();
    while !residual.is_empty() {
        let padded = solve_restricted(entries, &residual, opts).map_err(|f| {
            f.into_error(format!(
                "Nash clustering round {}, residual {} of {} strategies",
                clusters.len() + 1,
                residual.len(),
                m
            ))
        })?;
        let ne = MixedStrategy::new(padded, opts.support_threshold)?;
        let members: Vec<usize> =
            residual.iter().copied().filter(|&g| ne.probs[g] > opts.support_threshold).collect();
        if members.is_empty() {
            return Err(Error::Data(
                "equilibrium support fell below the support threshold".into(),
            ));
        }
        residual.retain(|g| members.binary_search(g).is_err());
        clusters.push(NashCluster { ordinal: clusters.len() + 1, members, ne });
    }
    Ok(Clustering { clusters, m })
}

/// Nash population performance of cluster `i` against cluster `j` (both
/// 1-based): the expected payoff p_i' M p_j between their equilibria.
pub fn npp(matrix: &PayoffMatrix, clustering: &Clustering, i: usize, j: usize) -> Result<f64> {
    let ci = clustering.cluster(i)?;
    let cj = clustering.cluster(j)?;
    Ok(npp_between(matrix.entries().view(), ci.ne.probs(), cj.ne.probs()))
}

fn npp_between(entries: ArrayView2<f64>, pi: &[f64], pj: &[f64]) -> f64 {
    aview1(pi).dot(&entries.dot(&aview1(pj)))
}

/// The full pairwise NPP matrix, indexed by cluster rank.
pub fn npp_matrix(matrix: &PayoffMatrix, clustering: &Clustering) -> Array2<f64> {
    let k = clustering.len();
    let entries = matrix.entries();
    let mut out = Array2::zeros((k, k));
    for a in 0..k {
        for b in 0..k {
            out[(a, b)] = npp_between(
                entries.view(),
                clustering.clusters[a].ne.probs(),
                clustering.clusters[b].ne.probs(),
            );
        }
    }
    out
}

/// Relative population performance between two strategy populations: the
/// minimax value of the rectangular game restricted to rows `a` and
/// columns `b`. Positive means population `a` beats population `b` at
/// equilibrium.
pub fn rpp(matrix: &PayoffMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let m = matrix.m();
    for &s in a.iter().chain(b) {
        if s >= m {
            return Err(Error::OrdinalOutOfRange { ordinal: s, count: m });
        }
    }
    let entries = matrix.entries();
    let sub = Array2::from_shape_fn((a.len(), b.len()), |(r, c)| entries[(a[r], b[c])]);
    minimax::matrix_game_value(sub.view())
}

/// Transitive strength of a single strategy: the fraction of the other
/// strategies it strictly beats.
pub fn ts_strategy_winrate(matrix: &PayoffMatrix, s: usize) -> Result<f64> {
    let m = matrix.m();
    if s >= m {
        return Err(Error::OrdinalOutOfRange { ordinal: s, count: m });
    }
    if m < 2 {
        return Ok(0.0);
    }
    let entries = matrix.entries();
    let wins = (0..m).filter(|&z| entries[(s, z)] > 0.0).count();
    Ok(wins as f64 / (m - 1) as f64)
}

/// Transitive strength of a cluster: the fraction of the other clusters it
/// beats in the NPP sense.
pub fn ts_cluster_winrate(matrix: &PayoffMatrix, clustering: &Clustering, a: usize) -> Result<f64> {
    clustering.cluster(a)?;
    let k = clustering.len();
    if k < 2 {
        log::warn!("cluster winrate is ill-defined with a single cluster; returning 0");
        return Ok(0.0);
    }
    let mut wins = 0usize;
    for other in 1..=k {
        if other != a && npp(matrix, clustering, a, other)? > NPP_WIN_THRESHOLD {
            wins += 1;
        }
    }
    Ok(wins as f64 / (k - 1) as f64)
}

/// Mean Elo midpoint of a cluster's member bins.
pub fn ts_cluster_elo(clustering: &Clustering, scheme: &BinScheme, a: usize) -> Result<f64> {
    let cluster = clustering.cluster(a)?;
    if clustering.m() != scheme.len() {
        return Err(Error::Data(format!(
            "clustering covers {} strategies but the scheme has {} bins",
            clustering.m(),
            scheme.len()
        )));
    }
    let total: f64 = cluster.members.iter().map(|&s| scheme.bins()[s].midpoint()).sum();
    Ok(total / cluster.members.len() as f64)
}

/// Per-cluster summary row: rank, size, mean member Elo, cluster winrate,
/// and the cluster's row of the NPP matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterProfileRow {
    pub ordinal: usize,
    pub size: usize,
    pub ts_elo: f64,
    pub ts_winrate: f64,
    pub npp_row: Vec<f64>,
}

/// Validated per-cluster profile of a clustering.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub rows: Vec<ClusterProfileRow>,
}

/// Builds the cluster profile and checks the structural guarantees of the
/// clustering: later clusters never beat earlier ones in NPP, the NPP
/// diagonal vanishes, and cluster winrates are non-increasing in rank.
/// Violations indicate a solver failure and surface as errors.
pub fn cluster_profile(
    matrix: &PayoffMatrix,
    clustering: &Clustering,
    scheme: &BinScheme,
) -> Result<ClusterProfile> {
    if clustering.m() != matrix.m() {
        return Err(Error::Data(format!(
            "clustering covers {} strategies but the matrix has {}",
            clustering.m(),
            matrix.m()
        )));
    }
    let k = clustering.len();
    let npp = npp_matrix(matrix, clustering);
    for i in 0..k {
        if npp[(i, i)].abs() > NPP_SIGN_TOL {
            return Err(Error::ClusterOrdering(format!(
                "cluster {} has self-play NPP {:.3e}, expected 0",
                i + 1,
                npp[(i, i)]
            )));
        }
        for j in i + 1..k {
            if npp[(i, j)] < -NPP_SIGN_TOL {
                return Err(Error::ClusterOrdering(format!(
                    "cluster {} loses to lower-ranked cluster {} with NPP {:.3e}",
                    i + 1,
                    j + 1,
                    npp[(i, j)]
                )));
            }
        }
    }

    let mut rows = Vec::with_capacity(k);
    let mut previous = f64::INFINITY;
    for a in 1..=k {
        let winrate = if k < 2 {
            0.0
        } else {
            let wins = (1..=k)
                .filter(|&b| b != a && npp[(a - 1, b - 1)] > NPP_WIN_THRESHOLD)
                .count();
            wins as f64 / (k - 1) as f64
        };
        if winrate > previous + 1e-12 {
            return Err(Error::ClusterOrdering(format!(
                "cluster winrate rises from {previous} to {winrate} at rank {a}"
            )));
        }
        previous = winrate;
        rows.push(ClusterProfileRow {
            ordinal: a,
            size: clustering.clusters[a - 1].members.len(),
            ts_elo: ts_cluster_elo(clustering, scheme, a)?,
            ts_winrate: winrate,
            npp_row: npp.row(a - 1).to_vec(),
        });
    }
    Ok(ClusterProfile { rows })
}

/// Serialisable form of a clustering together with its profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusteringDocument {
    pub clusters: Vec<ClusterRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub ordinal: usize,
    pub member_bin_indices: Vec<usize>,
    pub ne_probabilities: Vec<f64>,
    pub size: usize,
    pub ts_elo: f64,
    pub ts_winrate: f64,
}

/// Combines a clustering and its profile into the document written to disk.
pub fn clustering_document(clustering: &Clustering, profile: &ClusterProfile) -> ClusteringDocument {
    let clusters = clustering
        .clusters()
        .iter()
        .zip(&profile.rows)
        .map(|(c, row)| {
            debug_assert_eq!(c.ordinal, row.ordinal);
            ClusterRecord {
                ordinal: c.ordinal,
                member_bin_indices: c.members.clone(),
                ne_probabilities: c.ne.probs().to_vec(),
                size: row.size,
                ts_elo: row.ts_elo,
                ts_winrate: row.ts_winrate,
            }
        })
        .collect();
    ClusteringDocument { clusters }
}

/// Writes the cluster-by-cluster NPP matrix as CSV with a rank header.
pub fn write_npp_csv<W: Write>(npp: &Array2<f64>, writer: W) -> Result<()> {
    let k = npp.nrows();
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["cluster".to_string()];
    header.extend((1..=k).map(|j| format!("c{j}")));
    w.write_record(&header)?;
    for i in 0..k {
        let mut record = vec![format!("c{}", i + 1)];
        record.extend(npp.row(i).iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
