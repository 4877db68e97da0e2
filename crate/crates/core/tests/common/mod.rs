//! Shared oracles for integration tests.
//!
//! These deliberately avoid the library's solver paths: the equilibrium
//! oracle enumerates supports and solves small linear systems directly, and
//! the triangle oracle counts cycles by triple enumeration.

#![allow(dead_code)]

use ndarray::Array2;
use rand::Rng;

/// Entropy of a distribution, with 0 ln 0 = 0.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Maximum-entropy symmetric Nash equilibrium of the zero-sum symmetric game
/// with antisymmetric payoff matrix `m`, found by support enumeration.
///
/// Every symmetric equilibrium satisfies `(Mp)_i = 0` on its support and
/// `(Mp)_j <= 0` elsewhere, so for each candidate support the equalities plus
/// normalisation form a linear system. Unique solutions are checked for
/// feasibility directly; solution sets with up to two degrees of freedom are
/// searched by grid plus pattern refinement. Intended for m <= 12.
pub fn oracle_maxent_ne(m: &Array2<f64>) -> Vec<f64> {
    let n = m.nrows();
    assert!(n >= 1 && n <= 20, "oracle is for small instances");
    assert_eq!(n, m.ncols());

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |p: Vec<f64>| {
        let h = entropy(&p);
        if best.as_ref().map_or(true, |(bh, _)| h > bh + 1e-12) {
            best = Some((h, p));
        }
    };

    for mask in 1u32..(1u32 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let k = support.len();

        // Rows: (Mp)_i = 0 for i in support; then normalisation.
        let mut aug = vec![vec![0.0; k + 1]; k + 1];
        for (r, &i) in support.iter().enumerate() {
            for (c, &j) in support.iter().enumerate() {
                aug[r][c] = m[(i, j)];
            }
        }
        for c in 0..k {
            aug[k][c] = 1.0;
        }
        aug[k][k] = 1.0;

        let Some(solution) = solve_affine(aug, k) else { continue };
        match solution {
            AffineSet::Point(x) => {
                if let Some(p) = feasible_full(m, &support, &x) {
                    consider(p);
                }
            }
            AffineSet::Family { origin, basis } => {
                let zero_block = support
                    .iter()
                    .all(|&i| support.iter().all(|&j| m[(i, j)].abs() <= 1e-12));
                if zero_block {
                    // Entropy over the face is maximised by the uniform point.
                    let x = vec![1.0 / k as f64; k];
                    if let Some(p) = feasible_full(m, &support, &x) {
                        consider(p);
                        continue;
                    }
                }
                assert!(
                    basis.len() <= 2,
                    "oracle cannot refine a {}-dimensional equilibrium face",
                    basis.len()
                );
                if let Some(p) = search_family(m, &support, &origin, &basis) {
                    consider(p);
                }
            }
        }
    }

    best.expect("a symmetric zero-sum game always has a symmetric equilibrium").1
}

enum AffineSet {
    Point(Vec<f64>),
    Family { origin: Vec<f64>, basis: Vec<Vec<f64>> },
}

/// Gaussian elimination of the augmented system; `None` when inconsistent.
fn solve_affine(mut aug: Vec<Vec<f64>>, cols: usize) -> Option<AffineSet> {
    let rows = aug.len();
    let tol = 1e-10;
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut row = 0;
    for col in 0..cols {
        let pivot = (row..rows)
            .max_by(|&a, &b| aug[a][col].abs().total_cmp(&aug[b][col].abs()))
            .filter(|&r| aug[r][col].abs() > tol);
        let Some(p) = pivot else { continue };
        aug.swap(row, p);
        let scale = aug[row][col];
        for v in aug[row].iter_mut() {
            *v /= scale;
        }
        for r in 0..rows {
            if r != row && aug[r][col].abs() > 0.0 {
                let f = aug[r][col];
                for c in 0..=cols {
                    aug[r][c] -= f * aug[row][c];
                }
            }
        }
        pivot_of_col[col] = Some(row);
        row += 1;
        if row == rows {
            break;
        }
    }
    // Inconsistent: a zero row with nonzero right-hand side.
    for r in row..rows {
        if aug[r][..cols].iter().all(|v| v.abs() <= tol) && aug[r][cols].abs() > tol {
            return None;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|&c| pivot_of_col[c].is_none()).collect();
    let mut origin = vec![0.0; cols];
    for c in 0..cols {
        if let Some(r) = pivot_of_col[c] {
            origin[c] = aug[r][cols];
        }
    }
    if free.is_empty() {
        return Some(AffineSet::Point(origin));
    }
    let mut basis = Vec::new();
    for &f in &free {
        let mut v = vec![0.0; cols];
        v[f] = 1.0;
        for c in 0..cols {
            if let Some(r) = pivot_of_col[c] {
                v[c] = -aug[r][f];
            }
        }
        basis.push(v);
    }
    Some(AffineSet::Family { origin, basis })
}

/// Embeds support values into a full vector and checks equilibrium
/// feasibility: nonnegative, normalised, and `(Mp)_j <= 0` off support.
fn feasible_full(m: &Array2<f64>, support: &[usize], x: &[f64]) -> Option<Vec<f64>> {
    let n = m.nrows();
    let slack = 1e-9;
    if x.iter().any(|&v| v < -slack) {
        return None;
    }
    let mut p = vec![0.0; n];
    for (&i, &v) in support.iter().zip(x) {
        p[i] = v.max(0.0);
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-7 {
        return None;
    }
    for v in p.iter_mut() {
        *v /= total;
    }
    for j in 0..n {
        let mp: f64 = (0..n).map(|l| m[(j, l)] * p[l]).sum();
        if mp > slack {
            return None;
        }
    }
    Some(p)
}

/// Grid search plus pattern refinement of entropy over a low-dimensional
/// affine family of equilibria.
fn search_family(
    m: &Array2<f64>,
    support: &[usize],
    origin: &[f64],
    basis: &[Vec<f64>],
) -> Option<Vec<f64>> {
    let f = basis.len();
    let point_at = |t: &[f64]| -> Vec<f64> {
        let mut x = origin.to_vec();
        for (tk, b) in t.iter().zip(basis) {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += tk * bi;
            }
        }
        x
    };
    let eval = |t: &[f64]| -> Option<(f64, Vec<f64>)> {
        let p = feasible_full(m, support, &point_at(t))?;
        Some((entropy(&p), p))
    };

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let grid: Vec<f64> = (-30..=30).map(|i| f64::from(i) * 0.1).collect();
    let scan = |t: Vec<f64>, best: &mut Option<(f64, Vec<f64>, Vec<f64>)>| {
        if let Some((h, p)) = eval(&t) {
            if best.as_ref().map_or(true, |(bh, _, _)| h > *bh) {
                *best = Some((h, t, p));
            }
        }
    };
    if f == 1 {
        for &a in &grid {
            scan(vec![a], &mut best);
        }
    } else {
        for &a in &grid {
            for &b in &grid {
                scan(vec![a, b], &mut best);
            }
        }
    }
    let (_, mut t, _) = best?;

    // Axis-wise pattern search: entropy is strictly concave on the face.
    let mut step = 0.05;
    while step > 1e-11 {
        let mut improved = false;
        for axis in 0..f {
            for dir in [-1.0, 1.0] {
                let mut cand = t.clone();
                cand[axis] += dir * step;
                if let (Some((hc, _)), Some((hb, _))) = (eval(&cand), eval(&t)) {
                    if hc > hb {
                        t = cand;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    eval(&t).map(|(_, p)| p)
}

/// Per-strategy directed 3-cycle counts by triple enumeration, and the total
/// number of distinct cycles.
pub fn oracle_triangle_counts(adj: &Array2<i64>) -> (Vec<i64>, i64) {
    let n = adj.nrows();
    let mut per = vec![0i64; n];
    for s in 0..n {
        for j in 0..n {
            if adj[(s, j)] == 0 {
                continue;
            }
            for k in 0..n {
                if adj[(j, k)] == 1 && adj[(k, s)] == 1 {
                    per[s] += 1;
                }
            }
        }
    }
    let sum: i64 = per.iter().sum();
    assert_eq!(sum % 3, 0, "each cycle is seen from its three corners");
    (per, sum / 3)
}

/// Random antisymmetric matrix with off-diagonal magnitudes in (0, 1).
pub fn random_skew_matrix<R: Rng>(n: usize, rng: &mut R) -> Array2<f64> {
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = rng.random_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

/// Random tournament: every pair is decided, payoff +/-1.
pub fn random_tournament<R: Rng>(n: usize, rng: &mut R) -> Array2<f64> {
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

/// The classic rock-paper-scissors matrix.
pub fn rps_matrix() -> Array2<f64> {
    Array2::from_shape_vec((3, 3), vec![0.0, 1.0, -1.0, -1.0, 0.0, 1.0, 1.0, -1.0, 0.0]).unwrap()
}

/// Strictly transitive game: strategy i beats every j < i by `margin`.
pub fn transitive_matrix(n: usize, margin: f64) -> Array2<f64> {
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i > j {
                m[(i, j)] = margin;
                m[(j, i)] = -margin;
            }
        }
    }
    m
}
