//! Value of a finite zero-sum matrix game via the classic LP reduction.
//!
//! After shifting every payoff by a constant so the matrix is strictly
//! positive, the game value v satisfies v = 1 / max { sum(y) : R y <= 1,
//! y >= 0 }, and the shift subtracts back out. The LP starts from the
//! all-slack basis (feasible because the right-hand side is positive), so no
//! phase-one is needed, and Bland's rule guarantees termination.

use ndarray::ArrayView2;

const PIVOT_TOL: f64 = 1e-9;

/// Computes the minimax value of the game where the row player picks a row
/// of `r` to maximise and the column player picks a column to minimise.
pub(crate) fn matrix_game_value(r: ArrayView2<f64>) -> crate::Result<f64> {
    let (rows, cols) = r.dim();
    if rows == 0 || cols == 0 {
        return Err(crate::Error::EmptyIndexSet);
    }
    let min = r.fold(f64::INFINITY, |a, &b| a.min(b));
    if !min.is_finite() {
        return Err(crate::Error::Data("game matrix contains non-finite payoffs".into()));
    }
    let shift = 1.0 - min;

    // Tableau: columns [y_0..y_cols | slack_0..slack_rows | rhs], one row per
    // constraint plus the objective row (max sum y, stored negated).
    let width = cols + rows + 1;
    let mut tab = vec![vec![0.0f64; width]; rows + 1];
    for i in 0..rows {
        for j in 0..cols {
            tab[i][j] = r[(i, j)] + shift;
        }
        tab[i][cols + i] = 1.0;
        tab[i][width - 1] = 1.0;
    }
    for j in 0..cols {
        tab[rows][j] = -1.0;
    }

    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    let max_pivots = 100 * (rows + cols + 10);
    for _ in 0..max_pivots {
        // Bland's rule: the entering variable is the lowest-index column with
        // a negative reduced cost.
        let Some(enter) = (0..width - 1).find(|&j| tab[rows][j] < -PIVOT_TOL) else {
            let objective = tab[rows][width - 1];
            debug_assert!(objective > 0.0);
            return Ok(1.0 / objective - shift);
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..rows {
            if tab[i][enter] > PIVOT_TOL {
                let ratio = tab[i][width - 1] / tab[i][enter];
                let better = ratio < best_ratio - PIVOT_TOL
                    || (ratio < best_ratio + PIVOT_TOL
                        && leave.is_some_and(|l| basis[i] < basis[l]));
                if better {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return Err(crate::Error::Data(
                "game value program is unbounded, matrix cannot be antisymmetric".into(),
            ));
        };
        let pivot = tab[leave][enter];
        for x in tab[leave].iter_mut() {
            *x /= pivot;
        }
        for i in 0..=rows {
            if i != leave {
                let factor = tab[i][enter];
                if factor != 0.0 {
                    for j in 0..width {
                        tab[i][j] -= factor * tab[leave][j];
                    }
                }
            }
        }
        basis[leave] = enter;
    }
    Err(crate::Error::Data("game value simplex failed to terminate".into()))
}
