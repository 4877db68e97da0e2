//! Counting rock-paper-scissors cycles in the beat graph of a game.
//!
//! The beat graph has an edge i -> j whenever strategy i strictly beats j.
//! Entry (i, j) of the cubed adjacency matrix counts length-3 walks from i
//! to j, so the diagonal of A^3 counts each 3-cycle through a strategy once
//! per cycle, and the trace counts every cycle three times.

use std::io::Write;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::payoff::PayoffMatrix;
use crate::Result;

/// Directed beat graph of a game in adjacency-matrix form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    entries: Array2<i64>,
}

impl AdjacencyMatrix {
    pub fn entries(&self) -> &Array2<i64> {
        &self.entries
    }

    pub fn m(&self) -> usize {
        self.entries.nrows()
    }
}

/// Builds the beat graph: an edge wherever the expected payoff is strictly
/// positive. Draws and the diagonal contribute no edges.
pub fn to_adjacency(matrix: &PayoffMatrix) -> AdjacencyMatrix {
    let m = matrix.m();
    let entries =
        Array2::from_shape_fn((m, m), |(i, j)| i64::from(matrix.entries()[(i, j)] > 0.0));
    AdjacencyMatrix { entries }
}

/// 3-cycle counts: per strategy (how many cycles pass through it) and the
/// total number of distinct cycles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCounts {
    pub per_strategy: Vec<i64>,
    pub total: i64,
}

/// Counts directed 3-cycles in the beat graph with exact integer arithmetic.
pub fn rps_cycle_counts(adj: &AdjacencyMatrix) -> CycleCounts {
    let a = &adj.entries;
    let cubed = a.dot(a).dot(a);
    let per_strategy: Vec<i64> = cubed.diag().to_vec();
    let trace: i64 = per_strategy.iter().sum();
    debug_assert_eq!(trace % 3, 0, "every 3-cycle appears on exactly three diagonal entries");
    CycleCounts { per_strategy, total: trace / 3 }
}

/// Writes per-bin cycle counts with the bin midpoints for plotting.
pub fn write_cycles_csv<W: Write>(
    midpoints: &[f64],
    counts: &CycleCounts,
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["bin_midpoint", "cycles_through_bin"])?;
    for (mid, count) in midpoints.iter().zip(&counts.per_strategy) {
        w.write_record([mid.to_string(), count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn payoff(entries: Array2<f64>) -> PayoffMatrix {
        PayoffMatrix::from_entries(entries).unwrap()
    }

    #[test]
    fn rock_paper_scissors_has_exactly_one_cycle() {
        let m = payoff(arr2(&[[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]]));
        let counts = rps_cycle_counts(&to_adjacency(&m));
        assert_eq!(counts.per_strategy, vec![1, 1, 1]);
        assert_eq!(counts.total, 1);
    }

    #[test]
    fn transitive_games_have_no_cycles() {
        let entries = Array2::from_shape_fn((6, 6), |(i, j)| {
            if i > j {
                0.25
            } else if i < j {
                -0.25
            } else {
                0.0
            }
        });
        let counts = rps_cycle_counts(&to_adjacency(&payoff(entries)));
        assert_eq!(counts.per_strategy, vec![0; 6]);
        assert_eq!(counts.total, 0);
    }

    #[test]
    fn draws_produce_no_edges() {
        let m = payoff(Array2::zeros((4, 4)));
        let adj = to_adjacency(&m);
        assert_eq!(adj.entries().sum(), 0);
        assert_eq!(rps_cycle_counts(&adj).total, 0);
    }

    #[test]
    fn two_triangles_sharing_an_edge() {
        // 0 -> 1 -> 2 -> 0 and 0 -> 1 -> 3 -> 0, with 2 -> 3 breaking any
        // third triangle.
        let m = payoff(arr2(&[
            [0.0, 1.0, -1.0, -1.0],
            [-1.0, 0.0, 1.0, 1.0],
            [1.0, -1.0, 0.0, 1.0],
            [1.0, -1.0, -1.0, 0.0],
        ]));
        let counts = rps_cycle_counts(&to_adjacency(&m));
        assert_eq!(counts.total, 2);
        assert_eq!(counts.per_strategy, vec![2, 2, 1, 1]);
    }

    #[test]
    fn counts_are_permutation_equivariant() {
        let base = payoff(arr2(&[
            [0.0, 1.0, -1.0, -1.0],
            [-1.0, 0.0, 1.0, 1.0],
            [1.0, -1.0, 0.0, 1.0],
            [1.0, -1.0, -1.0, 0.0],
        ]));
        let perm = [2usize, 0, 3, 1];
        let permuted = base.permuted(&perm).unwrap();
        let original = rps_cycle_counts(&to_adjacency(&base));
        let shuffled = rps_cycle_counts(&to_adjacency(&permuted));
        assert_eq!(shuffled.total, original.total);
        for (old_idx, &new_idx) in perm.iter().enumerate() {
            assert_eq!(shuffled.per_strategy[new_idx], original.per_strategy[old_idx]);
        }
    }

    #[test]
    fn adjacency_powers_count_walks() {
        // Check A^k against a direct walk enumeration on a fixed graph.
        fn count_walks(a: &Array2<i64>, from: usize, to: usize, k: usize) -> i64 {
            if k == 0 {
                return i64::from(from == to);
            }
            (0..a.nrows())
                .map(|mid| a[(from, mid)] * count_walks(a, mid, to, k - 1))
                .sum()
        }
        let m = payoff(arr2(&[
            [0.0, 1.0, -1.0, 1.0],
            [-1.0, 0.0, 1.0, -1.0],
            [1.0, -1.0, 0.0, 1.0],
            [-1.0, 1.0, -1.0, 0.0],
        ]));
        let adj = to_adjacency(&m);
        let a = adj.entries();
        let a3 = a.dot(a).dot(a);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a3[(i, j)], count_walks(a, i, j, 3), "walks {i} -> {j}");
            }
        }
    }

    #[test]
    fn cycles_csv_lists_bins_in_order() {
        let m = payoff(arr2(&[[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]]));
        let counts = rps_cycle_counts(&to_adjacency(&m));
        let mut buf = Vec::new();
        write_cycles_csv(&[1005.0, 1015.0, 1025.0], &counts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "bin_midpoint,cycles_through_bin\n1005,1\n1015,1\n1025,1\n"
        );
    }
}
