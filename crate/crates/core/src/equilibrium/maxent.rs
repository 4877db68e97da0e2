//! Maximum-entropy symmetric equilibrium solver.
//!
//! For an antisymmetric payoff matrix the symmetric equilibria are exactly
//! the feasible set {p in the simplex : Mp <= 0}, and the maximum-entropy
//! point in it is unique. The solver works in two phases.
//!
//! Support phase. A strategy belongs to the equilibrium support exactly when
//! some feasible point gives it positive mass — entropy's gradient blows up
//! at the simplex boundary, so the optimum keeps every such coordinate
//! positive. That set is pinned down combinatorially by a short sequence of
//! linear programs: maximise the total mass on the still-undecided
//! strategies, promote whatever comes back visibly positive, and stop once
//! the achievable mass drops to zero, which proves the remainder carries
//! none. This settles exclusions no local test at the optimum can see — a
//! strategy can tie the equilibrium yet be forced out by a chain of
//! constraints — and it does so before any smooth optimisation starts.
//!
//! Newton phase. On the certified support the optimum is strictly positive,
//! which guarantees finite Lagrange multipliers (affine constraints plus a
//! feasible point strictly inside the face), so the Gibbs parameterisation
//! p = softmax(M lambda) with lambda >= 0 reaches it. A projected Newton
//! method minimises the convex dual F(lambda) = log-sum-exp(M lambda): the
//! gradient is -Mp, so multipliers rise exactly on violated constraints, and
//! the Newton model on the free multipliers gives the fast tail convergence
//! that plain gradient steps lack. The duality gap -lambda.(Mp) bounds the
//! entropy shortfall of the iterate, making the stopping test a certificate
//! rather than a heuristic.
//!
//! Three rescues keep the tail honest when the optimum presses objective
//! differences under the rounding floor. If the line search can no longer
//! measure a decrease, a full Newton step is still taken whenever it shrinks
//! the KKT residual geometrically. A run that stops improving is cut short
//! rather than left to burn its budget. And a near-converged stall is handed
//! to an active-set polish: the constraint rows at zero slack are pinned as
//! equalities, whose multipliers are unconstrained in sign, so Newton drives
//! that system to machine precision with no duality gap left to measure. The
//! polished point must then prove itself — feasible on every row, with
//! multiplier signs certifying that no entropy was left on the table — or
//! the stall is reported as a failure after all.

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use ndarray::{Array1, ArrayView2};

/// Tolerances and limits for the equilibrium solver.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Permitted constraint violation: the result satisfies Mp <= feas_tol.
    pub feas_tol: f64,
    /// Permitted duality gap, bounding the entropy distance from optimal.
    pub gap_tol: f64,
    pub max_iters: usize,
    /// Probabilities above this are counted as equilibrium support.
    pub support_threshold: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iters: 100_000,
            support_threshold: 1e-6,
        }
    }
}

/// Non-convergence report carrying the best iterate seen.
#[derive(Clone, Debug)]
pub struct SolveFailure {
    pub kkt_residual: f64,
    pub iterations: usize,
    pub best: Vec<f64>,
}

impl SolveFailure {
    pub fn into_error(self, context: String) -> crate::Error {
        crate::Error::Solver {
            context,
            kkt_residual: self.kkt_residual,
            iterations: self.iterations,
            best: self.best,
        }
    }
}

fn softmax_on(x: &Array1<f64>, active: &[usize]) -> Array1<f64> {
    let shift = active.iter().fold(f64::NEG_INFINITY, |a, &i| a.max(x[i]));
    let mut p = Array1::<f64>::zeros(x.len());
    let mut total = 0.0;
    for &i in active {
        let e = (x[i] - shift).exp();
        p[i] = e;
        total += e;
    }
    p.mapv_inplace(|v| v / total);
    p
}

fn log_sum_exp_on(x: &Array1<f64>, active: &[usize]) -> f64 {
    let shift = active.iter().fold(f64::NEG_INFINITY, |a, &i| a.max(x[i]));
    shift + active.iter().map(|&i| (x[i] - shift).exp()).sum::<f64>().ln()
}

/// Gaussian elimination with partial pivoting for the small dense Newton
/// systems. Returns `None` when the matrix is numerically singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
        .max(1e-300);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).expect("finite"))?;
        if a[pivot_row][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let upper: f64 = (col + 1..n).map(|k| a[col][k] * x[k]).sum();
        x[col] = (b[col] - upper) / a[col][col];
    }
    Some(x)
}

/// A support-phase round whose achievable mass falls below this proves the
/// remaining strategies excluded.
const MASSLESS: f64 = 1e-9;
/// Coordinates must clear this in a support-phase witness to be promoted.
/// Anything the feasible set caps below it is far under `support_threshold`,
/// so calling it zero is invisible to every consumer of the result.
const VISIBLE: f64 = 1e-8;

/// Greatest total probability the feasible set can place on the `undecided`
/// strategies, together with the witnessing point. `None` when the linear
/// program cannot be solved to proven optimality.
fn undecided_mass(a: ArrayView2<f64>, undecided: &[usize]) -> Option<(f64, Vec<f64>)> {
    let n = a.nrows();
    let mut in_set = vec![false; n];
    for &i in undecided {
        in_set[i] = true;
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<Variable> = (0..n)
        .map(|i| lp.add_var(if in_set[i] { 1.0 } else { 0.0 }, (0.0, 1.0)))
        .collect();
    let total: Vec<(Variable, f64)> = vars.iter().map(|&v| (v, 1.0)).collect();
    lp.add_constraint(total, ComparisonOp::Eq, 1.0);
    for row in a.rows() {
        let terms: Vec<(Variable, f64)> =
            vars.iter().copied().zip(row.iter().copied()).collect();
        lp.add_constraint(terms, ComparisonOp::Le, 0.0);
    }
    let outcome = lp.solve().ok()?;
    if !outcome.is_optimal() {
        return None;
    }
    let solution = outcome.into_solution().ok()?;
    let q = vars.iter().map(|&v| solution.var_value(v)).collect();
    Some((solution.objective(), q))
}

/// The strategies that receive positive probability somewhere in the feasible
/// set — equivalently, the support of the maximum-entropy point. Each round
/// asks how much mass the undecided strategies can jointly carry; witnesses
/// promote their visibly positive coordinates, and a round that cannot raise
/// any mass proves every remaining strategy excluded. At most n rounds, since
/// a positive round always promotes its witness's largest coordinate.
fn feasible_support(a: ArrayView2<f64>) -> Option<Vec<usize>> {
    let mut support: Vec<usize> = Vec::new();
    let mut undecided: Vec<usize> = (0..a.nrows()).collect();
    while !undecided.is_empty() {
        let (mass, q) = undecided_mass(a, &undecided)?;
        if mass <= MASSLESS {
            break;
        }
        let (promoted, rest): (Vec<usize>, Vec<usize>) =
            undecided.iter().copied().partition(|&i| q[i] >= VISIBLE);
        if promoted.is_empty() {
            // Jointly the leftovers reach at most n * VISIBLE — still far
            // under the support threshold, so they count as massless too.
            break;
        }
        support.extend(promoted);
        undecided = rest;
    }
    support.sort_unstable();
    Some(support)
}

/// Solves max entropy over {p in simplex : a p <= 0} for antisymmetric `a`.
/// Returns the probability vector; deterministic for fixed input.
pub(crate) fn solve_maxent(
    a: ArrayView2<f64>,
    opts: &SolveOptions,
) -> Result<Vec<f64>, SolveFailure> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    if n == 0 {
        return Err(SolveFailure { kkt_residual: f64::INFINITY, iterations: 0, best: vec![] });
    }
    // The feasible set is never empty (every symmetric game has a symmetric
    // equilibrium), so an empty or failed support phase means the linear
    // programs themselves broke down.
    let support = feasible_support(a).unwrap_or_default();
    if support.is_empty() {
        return Err(SolveFailure {
            kkt_residual: f64::INFINITY,
            iterations: 0,
            best: vec![1.0 / n as f64; n],
        });
    }
    solve_on_support(a, &support, opts)
}

/// Newton iterations allowed without a one-percent residual improvement
/// before the run is declared stalled and handed to the polish.
const STALL_PATIENCE: usize = 500;
/// A stalled iterate must come this close to feasible-and-complementary
/// before the active-set polish may stand in for convergence.
const POLISH_GATE: f64 = 1e-5;

/// Projected Newton on the dual with the primal restricted to the certified
/// support; all constraint rows stay enforced.
fn solve_on_support(
    a: ArrayView2<f64>,
    active: &[usize],
    opts: &SolveOptions,
) -> Result<Vec<f64>, SolveFailure> {
    let n = a.nrows();
    if active.len() == 1 {
        let mut p = vec![0.0; n];
        p[active[0]] = 1.0;
        let worst = a.column(active[0]).fold(f64::NEG_INFINITY, |acc, &x| acc.max(x));
        return if worst <= opts.feas_tol {
            Ok(p)
        } else {
            Err(SolveFailure { kkt_residual: worst, iterations: 0, best: p })
        };
    }

    let mut lambda = Array1::<f64>::zeros(n);
    let mut scores = a.dot(&lambda); // M lambda
    let mut p = softmax_on(&scores, active);
    let mut objective = log_sum_exp_on(&scores, active);

    let mut best = p.to_vec();
    let mut best_residual = f64::INFINITY;
    let mut iterations = 0usize;
    let mut stagnant = 0usize;
    let mut prev_objective = f64::INFINITY;

    for _ in 0..opts.max_iters {
        iterations += 1;
        let v = a.dot(&p); // Mp: constraint values, and -gradient of the dual
        let violation = v.fold(0.0f64, |acc, &x| acc.max(x));
        let gap = -lambda.dot(&v);
        let residual = violation.max(gap.abs());
        // The KKT residual is a poor progress meter in the middle of a run —
        // the gap term swells while the multipliers travel — so a round that
        // still moves the objective counts as progress no matter what the
        // residual says. That alibi expires once the iterate is essentially
        // feasible: from there, objective movement at the rounding floor is
        // just ridge noise, and a residual that stays put means a stall.
        let objective_step = prev_objective - objective;
        prev_objective = objective;
        let alibi = objective_step > 1e-12 * objective.abs().max(1.0)
            && best_residual > POLISH_GATE;
        if residual < 0.99 * best_residual || alibi {
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        if residual < best_residual {
            best_residual = residual;
            best.copy_from_slice(p.as_slice().expect("contiguous"));
        }
        if violation <= opts.feas_tol && gap.abs() <= opts.gap_tol {
            return Ok(normalised(p));
        }
        if stagnant >= STALL_PATIENCE {
            // Hundreds of dead rounds will not turn into convergence later;
            // hand the iterate to the polish instead of burning the rest of
            // the budget.
            break;
        }

        // Multipliers pinned at zero whose gradient pushes them negative stay
        // out of the Newton model; everything else is free to move.
        let free: Vec<usize> =
            (0..n).filter(|&i| lambda[i] > 1e-12 || v[i] > 0.0).collect();
        let mut newton: Option<Array1<f64>> = None;
        if !free.is_empty() {
            // Dual Hessian: A' (diag(p) - p p') A restricted to free rows.
            let ap: Vec<Array1<f64>> =
                free.iter().map(|&f| a.column(f).to_owned()).collect();
            let k = free.len();
            let mut hess = vec![vec![0.0f64; k]; k];
            let pa: Vec<f64> = ap.iter().map(|col| p.dot(col)).collect();
            for r in 0..k {
                for c in r..k {
                    let mut h = 0.0;
                    for i in 0..n {
                        h += p[i] * ap[r][i] * ap[c][i];
                    }
                    h -= pa[r] * pa[c];
                    hess[r][c] = h;
                    hess[c][r] = h;
                }
            }
            let trace: f64 = (0..k).map(|i| hess[i][i]).sum();
            let ridge = 1e-10 * (trace / k as f64).max(1e-12);
            for (i, row) in hess.iter_mut().enumerate() {
                row[i] += ridge;
            }
            let rhs: Vec<f64> = free.iter().map(|&f| v[f]).collect();
            if let Some(step) = solve_dense(hess, rhs) {
                let ascent: f64 =
                    step.iter().zip(free.iter()).map(|(&d, &f)| d * v[f]).sum();
                if ascent > 0.0 && step.iter().all(|d| d.is_finite()) {
                    let mut direction = Array1::<f64>::zeros(n);
                    for (&f, &d) in free.iter().zip(&step) {
                        direction[f] = d;
                    }
                    newton = Some(direction);
                }
            }
        }

        // Backtracking line search along the projected arc; an ill-conditioned
        // Newton direction falls back to plain gradient ascent before the
        // iteration counts as stalled.
        let mut accepted = false;
        'directions: for direction in newton.iter().chain(std::iter::once(&v)) {
            let mut t = 1.0f64;
            for _ in 0..80 {
                let candidate = (&lambda + &direction.mapv(|d| t * d)).mapv(|x| x.max(0.0));
                let cand_scores = a.dot(&candidate);
                let cand_obj = log_sum_exp_on(&cand_scores, active);
                let predicted: f64 = (0..n).map(|i| (candidate[i] - lambda[i]) * v[i]).sum();
                if predicted > 0.0 && cand_obj <= objective - 1e-4 * predicted {
                    lambda = candidate;
                    scores = cand_scores;
                    objective = cand_obj;
                    p = softmax_on(&scores, active);
                    accepted = true;
                    break 'directions;
                }
                t *= 0.5;
            }
        }
        if !accepted {
            // Near the optimum the objective differences sink under the
            // rounding floor while the Newton model still contracts, so a
            // full step stands on the KKT residual's own merits as long as
            // that keeps shrinking geometrically.
            if let Some(direction) = &newton {
                let candidate = (&lambda + direction).mapv(|x| x.max(0.0));
                let cand_scores = a.dot(&candidate);
                let cand_p = softmax_on(&cand_scores, active);
                let cand_v = a.dot(&cand_p);
                let cand_violation = cand_v.fold(0.0f64, |acc, &x| acc.max(x));
                let cand_gap = -candidate.dot(&cand_v);
                if cand_violation.max(cand_gap.abs()) <= 0.9 * residual {
                    lambda = candidate;
                    scores = cand_scores;
                    objective = log_sum_exp_on(&scores, active);
                    p = cand_p;
                    accepted = true;
                }
            }
        }
        if !accepted {
            break;
        }
    }

    let v = a.dot(&p);
    let violation = v.fold(0.0f64, |acc, &x| acc.max(x));
    let gap = -lambda.dot(&v);
    if violation <= opts.feas_tol && gap.abs() <= opts.gap_tol {
        return Ok(normalised(p));
    }
    // A stall this close to the optimum still pins down which constraints
    // matter: the rows at zero slack. Holding those as equalities leaves a
    // smooth unconstrained dual that Newton can finish to machine precision,
    // and the polished point is accepted on a directly checkable certificate
    // rather than on a duality gap the multipliers have outgrown.
    if best_residual <= POLISH_GATE {
        if let Some(q) = polish(a, active, &best, opts) {
            return Ok(normalised(q));
        }
    }
    Err(SolveFailure {
        kkt_residual: violation.max(gap.abs()).min(best_residual),
        iterations,
        best,
    })
}

fn normalised(p: Array1<f64>) -> Vec<f64> {
    let total = p.sum();
    p.mapv(|x| x / total).to_vec()
}

/// Rescues a stalled near-optimal iterate by solving the problem it was
/// converging towards: entropy maximisation with the near-active rows held
/// exactly at zero. The result is accepted only on its own certificate —
/// feasible on every row, and optimal by multiplier signs. A negative
/// equality multiplier is tolerated just for a row that provably cannot go
/// slack (an equality in disguise, which owes no sign — the rule for
/// single-point feasible sets) or whose achievable slack is too small to buy
/// visible entropy. Rows the pinned optimum violates join the pin set,
/// wrongly pinned rows leave it, and the rounds are capped so degenerate
/// fencing stays finite.
fn polish(
    a: ArrayView2<f64>,
    active: &[usize],
    best: &[f64],
    opts: &SolveOptions,
) -> Option<Array1<f64>> {
    let n = a.nrows();
    let scale = a.iter().fold(1.0f64, |acc, &x| acc.max(x.abs()));
    let act_thr = (1e-5 * scale).max(100.0 * opts.feas_tol);
    let bv = a.dot(&Array1::from(best.to_vec()));
    // A row with no coefficient on the support is zero at every candidate:
    // pinning it would only put an empty column into the Newton system.
    let relevant = |j: usize| active.iter().any(|&i| a[[i, j]] != 0.0);
    let mut pinned: Vec<usize> = (0..n)
        .filter(|&j| bv[j] >= -act_thr && relevant(j))
        .collect();
    // Entropy the optimum may concede per excused row before the certificate
    // refuses to vouch for the point.
    let budget = 100.0 * opts.gap_tol;
    for _ in 0..2 * n + 4 {
        let (q, mu) = if pinned.is_empty() {
            // Nothing binds, so the entropy optimum over the support is
            // uniform over the support.
            let mut u = Array1::<f64>::zeros(n);
            for &i in active {
                u[i] = 1.0 / active.len() as f64;
            }
            (u, Array1::<f64>::zeros(n))
        } else {
            equality_maxent(a, active, &pinned, 0.25 * opts.feas_tol)?
        };
        let v = a.dot(&q);
        let violated: Vec<usize> = (0..n)
            .filter(|&j| !pinned.contains(&j) && v[j] > 0.5 * opts.feas_tol)
            .collect();
        if !violated.is_empty() {
            pinned.extend(violated);
            pinned.sort_unstable();
            continue;
        }
        let dual_tol =
            1e-6 * (1.0 + mu.iter().fold(0.0f64, |acc, &x| acc.max(x.abs())));
        let mut evict: Option<(usize, f64)> = None;
        let mut certified = true;
        for &j in &pinned {
            if mu[j] >= -dual_tol {
                continue;
            }
            let slack = min_row_slack(a, active, j)?;
            if mu[j].abs() * (-slack).max(0.0) <= budget {
                continue;
            }
            certified = false;
            if evict.is_none_or(|(_, worst)| mu[j] < worst) {
                evict = Some((j, mu[j]));
            }
        }
        if certified {
            return Some(q);
        }
        let (worst_row, _) = evict.expect("uncertified round names a row");
        pinned.retain(|&j| j != worst_row);
    }
    None
}

/// Least value constraint row `j` can take over the feasible points carried
/// by the support — the proof of whether the row can go slack at all.
fn min_row_slack(a: ArrayView2<f64>, active: &[usize], j: usize) -> Option<f64> {
    let n = a.nrows();
    let mut on = vec![false; n];
    for &i in active {
        on[i] = true;
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Variable> = (0..n)
        .map(|i| lp.add_var(a[[j, i]], (0.0, if on[i] { 1.0 } else { 0.0 })))
        .collect();
    let total: Vec<(Variable, f64)> = vars.iter().map(|&v| (v, 1.0)).collect();
    lp.add_constraint(total, ComparisonOp::Eq, 1.0);
    for row in a.rows() {
        let terms: Vec<(Variable, f64)> =
            vars.iter().copied().zip(row.iter().copied()).collect();
        lp.add_constraint(terms, ComparisonOp::Le, 0.0);
    }
    let outcome = lp.solve().ok()?;
    if !outcome.is_optimal() {
        return None;
    }
    outcome.into_solution().ok().map(|s| s.objective())
}

/// Maximum entropy over the support with the pinned rows of `a` held exactly
/// at zero, returned with its multipliers. Equality multipliers carry no
/// sign constraint, so this dual has no boundary to crawl along and plain
/// Newton converges to machine precision; a gradient-norm halving stands in
/// for the Armijo test once the objective differences round away. `None`
/// when `tol` stays out of reach — as when the pinned system admits no point
/// positive on the whole support.
fn equality_maxent(
    a: ArrayView2<f64>,
    active: &[usize],
    pinned: &[usize],
    tol: f64,
) -> Option<(Array1<f64>, Array1<f64>)> {
    let n = a.nrows();
    let mut mu = Array1::<f64>::zeros(n); // multipliers live on the pinned rows
    let mut q = softmax_on(&a.dot(&mu), active);
    let mut objective = log_sum_exp_on(&a.dot(&mu), active);
    for _ in 0..200 {
        let v = a.dot(&q);
        let worst = pinned.iter().fold(0.0f64, |acc, &j| acc.max(v[j].abs()));
        if worst <= tol {
            return Some((q, mu));
        }

        // Same Hessian as the inequality dual, on the pinned block.
        let ap: Vec<Array1<f64>> =
            pinned.iter().map(|&j| a.column(j).to_owned()).collect();
        let k = pinned.len();
        let mut hess = vec![vec![0.0f64; k]; k];
        let qa: Vec<f64> = ap.iter().map(|col| q.dot(col)).collect();
        for r in 0..k {
            for c in r..k {
                let mut h = 0.0;
                for i in 0..n {
                    h += q[i] * ap[r][i] * ap[c][i];
                }
                h -= qa[r] * qa[c];
                hess[r][c] = h;
                hess[c][r] = h;
            }
        }
        let trace: f64 = (0..k).map(|i| hess[i][i]).sum();
        let ridge = 1e-10 * (trace / k as f64).max(1e-12);
        for (i, row) in hess.iter_mut().enumerate() {
            row[i] += ridge;
        }
        let rhs: Vec<f64> = pinned.iter().map(|&j| v[j]).collect();
        let step = solve_dense(hess, rhs)?;
        if !step.iter().all(|d| d.is_finite()) {
            return None;
        }

        let mut accepted = false;
        let mut t = 1.0f64;
        for _ in 0..60 {
            let mut candidate = mu.clone();
            for (&j, &d) in pinned.iter().zip(&step) {
                candidate[j] += t * d;
            }
            let cand_scores = a.dot(&candidate);
            let cand_obj = log_sum_exp_on(&cand_scores, active);
            let cand_q = softmax_on(&cand_scores, active);
            let cand_v = a.dot(&cand_q);
            let cand_worst =
                pinned.iter().fold(0.0f64, |acc, &j| acc.max(cand_v[j].abs()));
            let predicted: f64 = t * step
                .iter()
                .zip(pinned.iter())
                .map(|(&d, &j)| d * v[j])
                .sum::<f64>();
            if (predicted > 0.0 && cand_obj <= objective - 1e-4 * predicted)
                || cand_worst <= 0.5 * worst
            {
                mu = candidate;
                objective = cand_obj;
                q = cand_q;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr2, Array2};

    fn solve(a: &Array2<f64>) -> Vec<f64> {
        solve_maxent(a.view(), &SolveOptions::default()).expect("solvable")
    }

    #[test]
    fn rock_paper_scissors_is_exactly_uniform() {
        let a = arr2(&[[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]]);
        let p = solve(&a);
        // Uniform is feasible at the initial multipliers, so the solver
        // terminates immediately with the exact value.
        for &x in &p {
            assert!((x - 1.0 / 3.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn transitive_game_concentrates_on_the_dominant_strategy() {
        // Strategy 0 beats both others; 1 beats 2.
        let a = arr2(&[[0.0, 0.5, 0.5], [-0.5, 0.0, 0.5], [-0.5, -0.5, 0.0]]);
        let p = solve(&a);
        assert!(p[0] > 1.0 - 1e-6, "dominant strategy mass {}", p[0]);
        assert!(p[1] <= 1e-6 && p[2] <= 1e-6);
    }

    #[test]
    fn dominated_strategy_is_excluded_from_the_cycle() {
        // Rock-paper-scissors plus a strategy that loses to all three.
        let a = arr2(&[
            [0.0, 1.0, -1.0, 0.5],
            [-1.0, 0.0, 1.0, 0.5],
            [1.0, -1.0, 0.0, 0.5],
            [-0.5, -0.5, -0.5, 0.0],
        ]);
        let p = solve(&a);
        for i in 0..3 {
            assert!((p[i] - 1.0 / 3.0).abs() <= 1e-7, "p[{i}] = {}", p[i]);
        }
        assert!(p[3] <= 1e-7);
    }

    #[test]
    fn support_phase_finds_the_feasible_strategies() {
        let rps = arr2(&[[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]]);
        assert_eq!(feasible_support(rps.view()), Some(vec![0, 1, 2]));

        let transitive = arr2(&[[0.0, 0.5, 0.5], [-0.5, 0.0, 0.5], [-0.5, -0.5, 0.0]]);
        assert_eq!(feasible_support(transitive.view()), Some(vec![0]));

        // Two strategies that tie each other both stay feasible.
        let tie = Array2::<f64>::zeros((2, 2));
        assert_eq!(feasible_support(tie.view()), Some(vec![0, 1]));
    }

    #[test]
    fn strictly_beaten_strategy_gets_exactly_zero_mass() {
        // The unique equilibrium is the interior point of the 3-cycle on
        // {0, 2, 3}; strategy 1 loses to it outright. Through the softmax its
        // probability could only reach zero in the limit of divergent
        // multipliers, so the support phase has to rule it out beforehand.
        let a = arr2(&[
            [0.0, 0.13166344691066048, 0.965045426415796, -0.8746117889827003],
            [-0.13166344691066048, 0.0, -0.37007572889190005, 0.46020683790289557],
            [-0.965045426415796, 0.37007572889190005, 0.0, 0.9675363089541563],
            [0.8746117889827003, -0.46020683790289557, -0.9675363089541563, 0.0],
        ]);
        let p = solve(&a);
        assert_eq!(p[1], 0.0, "excluded strategy carries exactly no mass");
        let expected = [0.3446632020652421, 0.0, 0.31156091713568043, 0.3437758807990775];
        for (got, want) in p.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-6, "{got} vs {want}");
        }
        let pv = Array1::from(p);
        let residual = a.dot(&pv);
        assert!(residual.iter().all(|&x| x <= 1e-8), "feasibility: {residual}");
    }

    #[test]
    fn thin_margin_exclusion_is_resolved_exactly() {
        // Strategy 0 ties everything, so the optimum mixes it with the cycle
        // equilibrium on {2, 3, 4}; strategy 1 loses to that mixture by less
        // than 6e-6. A margin that thin leaves Newton iterates hovering with
        // visible mass on strategy 1 for tens of thousands of iterations,
        // while the support phase settles it outright.
        let a = arr2(&[
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, -0.3640675078008163, 0.38535584386457916, 0.153670820354014],
            [0.0, 0.3640675078008163, 0.0, 0.7129241896568272, -0.1415809943202762],
            [0.0, -0.38535584386457916, -0.7129241896568272, 0.0, 0.45080981700186834],
            [0.0, -0.153670820354014, 0.1415809943202762, -0.45080981700186834, 0.0],
        ]);
        let p = solve(&a);
        assert_eq!(p[1], 0.0);
        // alpha = 1 / (1 + e^H) on the tie strategy, cycle weights on the rest.
        let expected = [0.281213645, 0.0, 0.248243476, 0.077963156, 0.392579723];
        for (got, want) in p.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-6, "{got} vs {want}");
        }
        let pv = Array1::from(p);
        let residual = a.dot(&pv);
        assert!(residual.iter().all(|&x| x <= 1e-8), "feasibility: {residual}");
    }

    #[test]
    fn tied_strategies_squeezed_out_by_combined_constraints_are_excluded() {
        // The equilibrium mixes strategies 0 and 3 at the endpoint where
        // strategy 2's constraint becomes active, so 2 ties the equilibrium
        // exactly — no margin at the point reveals its exclusion. Only rows 0
        // and 3 jointly force q2 (and q4) to zero: the interval
        // 1.0162 q2 <= q4 <= 1.0157 q2 is empty for positive q2. The support
        // phase proves that where any certificate local to the optimum
        // cannot.
        let a = arr2(&[
            [0.0, 0.0, -0.7759369777687692, 0.0, 0.7643152992585242, 0.0],
            [0.0, 0.0, 0.0, -0.8647913628200069, 0.0, 0.0],
            [0.7759369777687692, 0.0, 0.0, -0.5018643478360145, 0.0, 0.0],
            [0.0, 0.8647913628200069, 0.5018643478360145, 0.0, -0.4935404258337874, 0.43335813472027285],
            [-0.7643152992585242, 0.0, 0.0, 0.4935404258337874, 0.0, 0.0],
            [0.0, 0.0, 0.0, -0.43335813472027285, 0.0, 0.0],
        ]);
        assert_eq!(feasible_support(a.view()), Some(vec![0, 3]));
        let p = solve(&a);
        let expected = [0.3927561646553168, 0.0, 0.0, 0.6072438353446832, 0.0, 0.0];
        for (got, want) in p.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-6, "{got} vs {want}");
        }
        let pv = Array1::from(p);
        let residual = a.dot(&pv);
        assert!(residual.iter().all(|&x| x <= 1e-8), "feasibility: {residual}");
    }

    #[test]
    fn full_support_interior_equilibrium_is_reached() {
        // The kernel of this matrix meets the simplex at a strictly positive
        // point, so the feasible set is that single point and every
        // constraint is active at it. The multipliers settle around 10, and
        // the raw duality gap bottoms out just above 1e-8 once line-search
        // progress sinks under rounding; the full-step rescue and the
        // active-set polish have to finish the job.
        let a = arr2(&[
            [0.0, -0.8180591064198701, 0.46979747150885726, 0.2589005631043158, -0.05024453372093471],
            [0.8180591064198701, 0.0, -0.7661436782460337, 0.04579879118477443, -0.6725320992903167],
            [-0.46979747150885726, 0.7661436782460337, 0.0, -0.2612995324713179, 0.3755177570474007],
            [-0.2589005631043158, -0.04579879118477443, 0.2612995324713179, 0.0, 0.8095098634798094],
            [0.05024453372093471, 0.6725320992903167, -0.3755177570474007, -0.8095098634798094, 0.0],
        ]);
        let p = solve(&a);
        let expected = [
            0.354677013818271,
            0.22756644344162694,
            0.37675839007287776,
            0.036302032690968655,
            0.004696119976255637,
        ];
        for (got, want) in p.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-6, "{got} vs {want}");
        }
        let pv = Array1::from(p);
        let residual = a.dot(&pv);
        assert!(residual.iter().all(|&x| x <= 1e-8), "feasibility: {residual}");
    }

    #[test]
    fn badly_conditioned_kernel_point_is_polished_to_convergence() {
        // Another single-point feasible set, but with two coordinates down at
        // 7e-5 and 2e-4. That wrecks the curvature of the dual: Newton creeps
        // to a residual near 4e-8 and then stops improving, so without the
        // stall exit and the polish this burns the whole iteration budget and
        // fails. The expected values are the kernel of the matrix scaled onto
        // the simplex.
        let a = arr2(&[
            [0.0, -0.83158247869078, 0.1427068754865366, 0.30705784651747936, 0.11323293221021302],
            [0.83158247869078, 0.0, -0.8013195688146306, -0.09635101793417741, -0.6210641247170638],
            [-0.1427068754865366, 0.8013195688146306, 0.0, -0.27962527213144767, -0.0024153720967404852],
            [-0.30705784651747936, 0.09635101793417741, 0.27962527213144767, 0.0, -0.5295289671231252],
            [-0.11323293221021302, 0.6210641247170638, 0.0024153720967404852, 0.5295289671231252, 0.0],
        ]);
        let p = solve(&a);
        let expected = [
            0.4512343370893578,
            0.08038634341547966,
            0.4681324494999352,
            7.327084319751116e-05,
            0.000173599152029893,
        ];
        for (got, want) in p.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-6, "{got} vs {want}");
        }
        let pv = Array1::from(p);
        let residual = a.dot(&pv);
        assert!(residual.iter().all(|&x| x <= 1e-8), "feasibility: {residual}");
    }

    #[test]
    fn degenerate_squeeze_with_a_free_rider_recovers_the_entropy_optimum() {
        // Rows 0, 3 and 5 conspire through a 7e-10 coefficient to force
        // q0 = 0.4349 q3 exactly, strategy 5 is capped at a genuinely
        // massless 2e-9, and strategy 2 meets no constraint at all. The dual
        // on the certified support has a duality gap — its iterates drift
        // toward a point that starves the free rider — so only the pinned
        // equality solve recovers the true optimum, growing its pin set on
        // the way and skipping the all-zero row that would blind the Newton
        // system.
        let a = arr2(&[
            [0.0, 0.0, 0.0, 7.291727333953859e-10, 0.0, -0.9074245991934691],
            [0.0, 0.0, 0.0, -0.5780620173757706, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [-7.291727333953859e-10, 0.5780620173757706, 0.0, 0.0, 0.9595897639759435, 0.39465248487457605],
            [0.0, 0.0, 0.0, -0.9595897639759435, 0.0, 0.0],
            [0.9074245991934691, 0.0, 0.0, -0.39465248487457605, 0.0, 0.0],
        ]);
        let p = solve(&a);
        // Entropy optimum over the squeezed family, with strategy 5's 4e-10
        // share rounded down to nothing.
        let expected = [
            0.19662668617232204,
            0.0,
            0.35126950383712685,
            0.45210380962725727,
            0.0,
            0.0,
        ];
        for (got, want) in p.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-6, "{got} vs {want}");
        }
        let pv = Array1::from(p);
        let residual = a.dot(&pv);
        assert!(residual.iter().all(|&x| x <= 1e-8), "feasibility: {residual}");
    }

    #[test]
    fn lopsided_cycle_survives_the_slow_multiplier_climb() {
        // Strategies 0, 1 and 3 form a cycle whose margins span two orders
        // of magnitude, so the equilibrium concentrates 98% on one strategy
        // and the multipliers settle near 2000. On the way there the duality
        // gap swells far above its starting point — the KKT residual looks
        // worse for hundreds of rounds while the objective descends steadily
        // — so a stall detector keyed on the residual alone would cut the
        // run short at the initial uniform. The expected values are the
        // cycle's kernel direction, normalised.
        let a = arr2(&[
            [0.0, 0.2290784167461909, -0.8787636430321981, -0.002689909179039949],
            [-0.2290784167461909, 0.0, -0.4298472483591484, 0.0015903209473482121],
            [0.8787636430321981, 0.4298472483591484, 0.0, -0.5369646366298835],
            [0.002689909179039949, -0.0015903209473482121, 0.5369646366298835, 0.0],
        ]);
        let p = solve(&a);
        let expected = [
            0.006814921875239429,
            0.011526931678296548,
            0.0,
            0.9816581464464641,
        ];
        for (got, want) in p.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-6, "{got} vs {want}");
        }
        let pv = Array1::from(p);
        let residual = a.dot(&pv);
        assert!(residual.iter().all(|&x| x <= 1e-8), "feasibility: {residual}");
    }

    #[test]
    fn feasibility_and_gap_hold_at_the_returned_point() {
        let a = arr2(&[
            [0.0, 0.3, -0.2, 0.7],
            [-0.3, 0.0, 0.4, -0.1],
            [0.2, -0.4, 0.0, 0.6],
            [-0.7, 0.1, -0.6, 0.0],
        ]);
        let p = solve(&a);
        let pv = Array1::from(p.clone());
        let mp = a.dot(&pv);
        assert!(mp.iter().all(|&x| x <= 1e-8), "Mp must stay below tolerance: {mp}");
        assert!((pv.sum() - 1.0).abs() <= 1e-9);
        assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn solver_is_deterministic() {
        let a = arr2(&[
            [0.0, 0.9, -0.4, 0.1],
            [-0.9, 0.0, 0.3, -0.2],
            [0.4, -0.3, 0.0, 0.8],
            [-0.1, 0.2, -0.8, 0.0],
        ]);
        let p1 = solve(&a);
        let p2 = solve(&a);
        for (x, y) in p1.iter().zip(&p2) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn support_phase_makes_a_dominant_game_exact_without_iterating() {
        // The support phase alone identifies the singleton equilibrium, so
        // even a zero Newton budget returns the exact answer.
        let a = arr2(&[[0.0, 0.5], [-0.5, 0.0]]);
        let opts = SolveOptions { max_iters: 0, ..Default::default() };
        let p = solve_maxent(a.view(), &opts).expect("support phase is exact");
        assert_eq!(p, vec![1.0, 0.0]);
    }

    #[test]
    fn exhausted_budget_reports_best_iterate() {
        // An uneven cycle keeps full support, so the Newton phase has real
        // work to do and a zero budget must surface the failure with the
        // initial iterate attached.
        let a = arr2(&[[0.0, 1.0, -2.0], [-1.0, 0.0, 1.0], [2.0, -1.0, 0.0]]);
        let opts = SolveOptions { max_iters: 0, ..Default::default() };
        match solve_maxent(a.view(), &opts) {
            Err(failure) => {
                assert_eq!(failure.best.len(), 3);
                assert!(failure.kkt_residual > 0.0);
            }
            Ok(p) => panic!("a zero budget should not converge here, got {p:?}"),
        }
    }

    #[test]
    fn singleton_game_is_trivial() {
        let a = Array2::zeros((1, 1));
        assert_eq!(solve(&a), vec![1.0]);
    }
}
