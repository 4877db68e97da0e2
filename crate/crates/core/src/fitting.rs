//! Curve fitting for rating histograms and cross-system rating maps.
//!
//! The histogram of player ratings is summarised by a scaled skew-normal
//! profile fitted by least squares, and rating systems are related by
//! ordinary-least-squares linear maps. Both fits are deterministic: the
//! skew-normal objective is polished from a fixed grid of starting points by
//! Nelder-Mead, with no randomness anywhere.

use std::f64::consts::PI;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::ingest::GameRecord;
use crate::payoff::BinScheme;
use crate::{Error, Result};

/// Standard normal density.
fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
fn big_phi(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// Skew-normal profile 2 * phi(z) * Phi(alpha * z) at standardised `z`.
pub fn skew_normal_density(z: f64, alpha: f64) -> f64 {
    2.0 * phi(z) * big_phi(alpha * z)
}

/// A fitted scaled skew-normal profile: amplitude * sn((x - location) / scale).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewNormalFit {
    pub amplitude: f64,
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
    /// Mean squared error of the fit over the input points.
    pub mse: f64,
    /// Argmax of the fitted curve, clamped to the data's x-range.
    pub peak_x: f64,
}

impl SkewNormalFit {
    /// Value of the fitted curve at `x`.
    pub fn value(&self, x: f64) -> f64 {
        let z = (x - self.location) / self.scale;
        self.amplitude * skew_normal_density(z, self.shape)
    }
}

fn mean_squared_error(points: &[(f64, f64)], params: &[f64]) -> f64 {
    let (ln_a, xi, ln_omega, alpha) = (params[0], params[1], params[2], params[3]);
    let (a, omega) = (ln_a.exp(), ln_omega.exp());
    let total: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = a * skew_normal_density((x - xi) / omega, alpha) - y;
            r * r
        })
        .sum();
    total / points.len() as f64
}

/// Nelder-Mead minimisation with the textbook coefficients. Deterministic:
/// the simplex comes from `x0` and the per-coordinate `steps`.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    steps: &[f64],
    max_iters: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        let fv = f(&v);
        simplex.push((v, fv));
    }
    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if worst - best <= 1e-15 * (1.0 + best.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|(v, _)| v[d]).sum::<f64>() / n as f64)
            .collect();
        let reflect: Vec<f64> =
            (0..n).map(|d| centroid[d] + (centroid[d] - simplex[n].0[d])).collect();
        let f_reflect = f(&reflect);
        if f_reflect < simplex[0].1 {
            let expand: Vec<f64> =
                (0..n).map(|d| centroid[d] + 2.0 * (centroid[d] - simplex[n].0[d])).collect();
            let f_expand = f(&expand);
            simplex[n] = if f_expand < f_reflect { (expand, f_expand) } else { (reflect, f_reflect) };
        } else if f_reflect < simplex[n - 1].1 {
            simplex[n] = (reflect, f_reflect);
        } else {
            let (towards, f_towards) = if f_reflect < simplex[n].1 {
                (reflect.clone(), f_reflect)
            } else {
                (simplex[n].0.clone(), simplex[n].1)
            };
            let contract: Vec<f64> =
                (0..n).map(|d| centroid[d] + 0.5 * (towards[d] - centroid[d])).collect();
            let f_contract = f(&contract);
            if f_contract < f_towards {
                simplex[n] = (contract, f_contract);
            } else {
                let origin = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    for d in 0..n {
                        entry.0[d] = origin[d] + 0.5 * (entry.0[d] - origin[d]);
                    }
                    entry.1 = f(&entry.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"));
    simplex.swap_remove(0)
}

/// Mode height of the standardised skew-normal profile for a given shape,
/// found on a fixed grid (plenty for seeding an amplitude).
fn profile_mode_height(alpha: f64) -> f64 {
    let mut best = 0.0f64;
    for i in 0..=800 {
        let z = -4.0 + i as f64 * 0.01;
        best = best.max(skew_normal_density(z, alpha));
    }
    best
}

/// Golden-section maximisation of `f` on `[lo, hi]`.
fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-10 * (1.0 + hi.abs()) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Fits amplitude, location, scale, and shape of a scaled skew-normal to
/// `(x, y)` points by least squares. Needs at least five points and a
/// non-trivial y; returns the parameters together with the fit error and the
/// in-range peak position.
pub fn fit_skew_normal(points: &[(f64, f64)]) -> Result<SkewNormalFit> {
    if points.len() < 5 {
        return Err(Error::Fit(format!(
            "skew-normal fit needs at least 5 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Fit("points must be finite".into()));
    }
    if points.iter().all(|&(_, y)| y == 0.0) {
        return Err(Error::Fit("all y values are zero; nothing to fit".into()));
    }
    let x_min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let x_range = x_max - x_min;
    if x_range <= 0.0 {
        return Err(Error::Fit("x values are all identical".into()));
    }
    let y_max = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);

    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite x"));
    let quantile = |q: f64| xs[((xs.len() - 1) as f64 * q).round() as usize];

    let objective = |params: &[f64]| mean_squared_error(points, params);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for xi0 in [quantile(0.25), quantile(0.5), quantile(0.75)] {
        for omega0 in [x_range / 8.0, x_range / 4.0] {
            for alpha0 in [-3.0, 0.0, 3.0] {
                let a0 = (y_max.abs().max(1e-12)) / profile_mode_height(alpha0);
                let start = [a0.ln(), xi0, omega0.ln(), alpha0];
                let steps = [0.4, omega0 / 4.0, 0.3, 0.8];
                let candidate = nelder_mead(objective, &start, &steps, 2500);
                if best.as_ref().is_none_or(|(_, f)| candidate.1 < *f) {
                    best = Some(candidate);
                }
            }
        }
    }
    let (coarse, _) = best.expect("at least one start");
    let polish_steps = [0.02, coarse[2].exp() / 80.0, 0.015, 0.04];
    let (params, mse) = nelder_mead(objective, &coarse, &polish_steps, 2500);

    let fit_value = |x: f64| {
        params[0].exp() * skew_normal_density((x - params[1]) / params[2].exp(), params[3])
    };
    // Locate the curve's peak inside the data range: coarse grid, then a
    // golden-section refinement around the best grid cell.
    let grid = 2000usize;
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..=grid {
        let x = x_min + x_range * i as f64 / grid as f64;
        let v = fit_value(x);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let lo = x_min + x_range * best_i.saturating_sub(1) as f64 / grid as f64;
    let hi = x_min + x_range * (best_i + 1).min(grid) as f64 / grid as f64;
    let peak_x = golden_max(fit_value, lo, hi).clamp(x_min, x_max);

    Ok(SkewNormalFit {
        amplitude: params[0].exp(),
        location: params[1],
        scale: params[2].exp(),
        shape: params[3],
        mse,
        peak_x,
    })
}

/// An affine map between two rating systems, fitted by least squares.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearMap {
    pub fn translate(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    /// Maps a rating back through the fit; fails on a flat map.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if self.slope == 0.0 {
            return Err(Error::Fit("linear map with zero slope has no inverse".into()));
        }
        Ok((y - self.intercept) / self.slope)
    }

    /// Composition: `other` applied after `self`.
    pub fn then(&self, other: &LinearMap) -> LinearMap {
        LinearMap {
            slope: other.slope * self.slope,
            intercept: other.slope * self.intercept + other.intercept,
            r_squared: f64::NAN,
        }
    }
}

/// Ordinary least squares fit of `y = slope * x + intercept`. Requires at
/// least two points with x-spread; a non-positive slope is legal but logged,
/// since rating systems are expected to agree on direction.
pub fn fit_linear_map(pairs: &[(f64, f64)]) -> Result<LinearMap> {
    if pairs.len() < 2 {
        return Err(Error::Fit(format!("linear fit needs at least 2 points, got {}", pairs.len())));
    }
    if pairs.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Fit("points must be finite".into()));
    }
    let n = pairs.len() as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|&(x, _)| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = pairs.iter().map(|&(x, y)| (x - mean_x) * (y - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("x values are all identical; slope is undefined".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = pairs.iter().map(|&(_, y)| (y - mean_y) * (y - mean_y)).sum();
    let ss_res: f64 = pairs
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    // A constant y is explained perfectly by the (flat) fit.
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    if slope <= 0.0 {
        log::warn!("rating map slope {slope} is not positive; systems disagree on direction");
    }
    Ok(LinearMap { slope, intercept, r_squared })
}

/// Histogram of player-game rating observations over a bin scheme. Each game
/// contributes both players' ratings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EloHistogram {
    pub counts: Vec<u64>,
    /// Observations outside the scheme's range.
    pub overflow: u64,
}

pub fn elo_histogram(records: &[GameRecord], scheme: &BinScheme) -> EloHistogram {
    let mut counts = vec![0u64; scheme.len()];
    let mut overflow = 0u64;
    for r in records {
        for rating in [r.white_rating, r.black_rating] {
            match scheme.index_of(rating) {
                Some(idx) => counts[idx] += 1,
                None => overflow += 1,
            }
        }
    }
    EloHistogram { counts, overflow }
}

/// Writes the histogram with bin bounds and midpoints for plotting.
pub fn write_histogram_csv<W: Write>(
    scheme: &BinScheme,
    hist: &EloHistogram,
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["bin_lower", "bin_upper", "bin_midpoint", "count"])?;
    for (bin, count) in scheme.bins().iter().zip(&hist.counts) {
        w.write_record([
            bin.lower.to_string(),
            bin.upper.to_string(),
            bin.midpoint().to_string(),
            count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// The rating systems a comparison table can relate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatingSystem {
    Lichess,
    Uscf,
    Fide,
}

impl RatingSystem {
    pub const ALL: [RatingSystem; 3] = [RatingSystem::Lichess, RatingSystem::Uscf, RatingSystem::Fide];

    pub fn name(self) -> &'static str {
        match self {
            RatingSystem::Lichess => "lichess",
            RatingSystem::Uscf => "uscf",
            RatingSystem::Fide => "fide",
        }
    }

    fn slot(self) -> usize {
        match self {
            RatingSystem::Lichess => 0,
            RatingSystem::Uscf => 1,
            RatingSystem::Fide => 2,
        }
    }
}

/// A table of per-player ratings across systems, with missing cells allowed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatingTable {
    rows: Vec<[Option<f64>; 3]>,
}

impl RatingTable {
    /// Reads a CSV with (at least) the columns `lichess`, `uscf`, and `fide`,
    /// in any order and case. Blank cells are missing values; anything else
    /// must parse as a number.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = csv.headers()?.clone();
        let mut columns = [None::<usize>; 3];
        for (idx, h) in headers.iter().enumerate() {
            for system in RatingSystem::ALL {
                if h.eq_ignore_ascii_case(system.name()) {
                    columns[system.slot()] = Some(idx);
                }
            }
        }
        let mut resolved = [0usize; 3];
        for system in RatingSystem::ALL {
            resolved[system.slot()] = columns[system.slot()].ok_or_else(|| {
                Error::Data(format!("rating table is missing a `{}` column", system.name()))
            })?;
        }
        let mut rows = Vec::new();
        for record in csv.records() {
            let record = record?;
            let mut row = [None; 3];
            for slot in 0..3 {
                let cell = record.get(resolved[slot]).unwrap_or("");
                if !cell.is_empty() {
                    let value: f64 = cell.parse().map_err(|_| {
                        Error::Data(format!("unparseable rating value `{cell}`"))
                    })?;
                    row[slot] = Some(value);
                }
            }
            rows.push(row);
        }
        Ok(RatingTable { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// All rows where both systems have a rating, as `(from, to)` pairs.
    pub fn pairs(&self, from: RatingSystem, to: RatingSystem) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|row| Some((row[from.slot()]?, row[to.slot()]?)))
            .collect()
    }

    /// Fits the OLS map between two systems over the pairwise-complete rows.
    pub fn fit(&self, from: RatingSystem, to: RatingSystem) -> Result<LinearMap> {
        let pairs = self.pairs(from, to);
        if pairs.len() < 2 {
            return Err(Error::Fit(format!(
                "only {} rows have both {} and {} ratings",
                pairs.len(),
                from.name(),
                to.name()
            )));
        }
        fit_linear_map(&pairs)
    }
}
