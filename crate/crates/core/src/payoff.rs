//! Rating bins and payoff-matrix construction.
//!
//! Strategies are Elo rating bins. The payoff between two bins averages the
//! observed game scores in both colour directions; directions with no observed
//! games fall back to the score predicted by the Elo model from the bin
//! midpoints, so the matrix is total even when the data is sparse.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::ingest::GameRecord;
use crate::{Error, Result};

/// Logistic scale of the Elo model: a 400-point gap gives 10:1 win odds.
pub const ELO_K: f64 = std::f64::consts::LN_10 / 400.0;

/// Probability that a player rated `r_a` beats a player rated `r_b`.
pub fn expected_win_probability(r_a: f64, r_b: f64) -> f64 {
    1.0 / (1.0 + (-ELO_K * (r_a - r_b)).exp())
}

/// Expected game score from the perspective of `r_a`, on the win=1, draw=0,
/// loss=-1 scale.
pub fn expected_score(r_a: f64, r_b: f64) -> f64 {
    2.0 * expected_win_probability(r_a, r_b) - 1.0
}

/// A half-open rating interval `[lower, upper)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EloBin {
    pub lower: i32,
    pub upper: i32,
    pub index: usize,
}

impl EloBin {
    pub fn midpoint(&self) -> f64 {
        f64::from(self.lower + self.upper) / 2.0
    }

    pub fn contains(&self, rating: i32) -> bool {
        rating >= self.lower && rating < self.upper
    }
}

/// Contiguous, disjoint rating bins covering `[lower, upper)`.
///
/// All bins have the configured width except the last, which is clipped at the
/// range's upper bound when the span is not an exact multiple of the width.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SchemeRepr", into = "SchemeRepr")]
pub struct BinScheme {
    lower: i32,
    upper: i32,
    width: i32,
    bins: Vec<EloBin>,
}

#[derive(Serialize, Deserialize)]
struct SchemeRepr {
    range: (i32, i32),
    width: i32,
}

impl From<BinScheme> for SchemeRepr {
    fn from(s: BinScheme) -> Self {
        SchemeRepr { range: (s.lower, s.upper), width: s.width }
    }
}

impl TryFrom<SchemeRepr> for BinScheme {
    type Error = Error;

    fn try_from(r: SchemeRepr) -> Result<Self> {
        BinScheme::new(r.range, r.width)
    }
}

impl BinScheme {
    pub fn new(range: (i32, i32), width: i32) -> Result<Self> {
        let (lower, upper) = range;
        if width <= 0 {
            return Err(Error::InvalidScheme(format!("bin width must be positive, got {width}")));
        }
        if lower >= upper {
            return Err(Error::InvalidScheme(format!(
                "range lower bound {lower} must be below upper bound {upper}"
            )));
        }
        if i64::from(upper) - i64::from(lower) < 2 * i64::from(width) {
            return Err(Error::InvalidScheme(format!(
                "range [{lower}, {upper}) must span at least two bins of width {width}"
            )));
        }
        let mut bins = Vec::new();
        let mut start = lower;
        while start < upper {
            let end = upper.min(start.saturating_add(width));
            bins.push(EloBin { lower: start, upper: end, index: bins.len() });
            start = end;
        }
        Ok(BinScheme { lower, upper, width, bins })
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn bins(&self) -> &[EloBin] {
        &self.bins
    }

    pub fn range(&self) -> (i32, i32) {
        (self.lower, self.upper)
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    /// Index of the bin containing `rating`, or `None` when the rating falls
    /// outside `[lower, upper)`.
    pub fn index_of(&self, rating: i32) -> Option<usize> {
        if rating < self.lower || rating >= self.upper {
            return None;
        }
        let idx = ((rating - self.lower) / self.width) as usize;
        Some(idx.min(self.bins.len() - 1))
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.bins.iter().map(EloBin::midpoint).collect()
    }
}

/// Antisymmetric payoff matrix over rating bins.
///
/// `entries[(i, j)]` is the expected score of bin `i` against bin `j`;
/// `fill_mask[(i, j)]` is true when the entry came from observed games in both
/// colour directions rather than (partly) from the Elo prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffMatrix {
    entries: Array2<f64>,
    fill_mask: Array2<bool>,
}

impl PayoffMatrix {
    /// Builds a matrix from raw parts, validating shape and exact antisymmetry.
    pub fn from_parts(entries: Array2<f64>, fill_mask: Array2<bool>) -> Result<Self> {
        let m = entries.nrows();
        if entries.ncols() != m {
            return Err(Error::Data(format!(
                "payoff matrix must be square, got {}x{}",
                m,
                entries.ncols()
            )));
        }
        if fill_mask.nrows() != m || fill_mask.ncols() != m {
            return Err(Error::Data("fill mask shape does not match entries".into()));
        }
        for i in 0..m {
            for j in i..m {
                let sum = entries[(i, j)] + entries[(j, i)];
                if sum != 0.0 || !entries[(i, j)].is_finite() {
                    return Err(Error::Data(format!(
                        "entries ({i},{j}) and ({j},{i}) are not antisymmetric: {} vs {}",
                        entries[(i, j)],
                        entries[(j, i)]
                    )));
                }
            }
        }
        Ok(PayoffMatrix { entries, fill_mask })
    }

    /// Builds a matrix from entries alone, marking every entry as observed.
    pub fn from_entries(entries: Array2<f64>) -> Result<Self> {
        let mask = Array2::from_elem(entries.raw_dim(), true);
        Self::from_parts(entries, mask)
    }

    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn fill_mask(&self) -> &Array2<bool> {
        &self.fill_mask
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Sum of row `i`, i.e. the total score of strategy `i` against the field.
    pub fn row_sum(&self, i: usize) -> f64 {
        self.entries.row(i).sum()
    }

    /// Relabels strategies: entry `(i, j)` moves to `(perm[i], perm[j])`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let m = self.m();
        if perm.len() != m {
            return Err(Error::Data(format!("permutation length {} != {m}", perm.len())));
        }
        let mut seen = vec![false; m];
        for &p in perm {
            if p >= m || seen[p] {
                return Err(Error::Data("not a permutation".into()));
            }
            seen[p] = true;
        }
        let mut entries = Array2::zeros((m, m));
        let mut mask = Array2::from_elem((m, m), false);
        for i in 0..m {
            for j in 0..m {
                entries[(perm[i], perm[j])] = self.entries[(i, j)];
                mask[(perm[i], perm[j])] = self.fill_mask[(i, j)];
            }
        }
        Ok(PayoffMatrix { entries, fill_mask: mask })
    }

    /// Rescales every payoff by `c > 0`, preserving sign structure.
    pub fn scaled(&self, c: f64) -> Self {
        PayoffMatrix { entries: self.entries.mapv(|x| c * x), fill_mask: self.fill_mask.clone() }
    }
}

/// Bookkeeping from a payoff-matrix build.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffBuildStats {
    /// Games whose two ratings fell into distinct in-range bins.
    pub games_used: u64,
    /// Games with at least one rating outside the scheme range.
    pub skipped_out_of_range: u64,
    /// Games whose two ratings share a bin; they carry no cross-bin signal.
    pub same_bin: u64,
}

/// Folds game records into a payoff matrix over the scheme's bins.
///
/// For each unordered bin pair the representative score of each colour
/// direction is the mean observed score from the lower-index bin's
/// perspective; a direction with no games uses the Elo-predicted expected
/// score between the bin midpoints instead. The entry is the average of the
/// two directions, making white and black appearances count symmetrically.
pub fn build_payoff_matrix(
    records: &[GameRecord],
    scheme: &BinScheme,
) -> (PayoffMatrix, PayoffBuildStats) {
    let m = scheme.len();
    let mut score_sum = Array2::<f64>::zeros((m, m));
    let mut game_count = Array2::<u64>::zeros((m, m));
    let mut stats = PayoffBuildStats::default();

    for rec in records {
        let (Some(w), Some(b)) =
            (scheme.index_of(rec.white_rating), scheme.index_of(rec.black_rating))
        else {
            stats.skipped_out_of_range += 1;
            continue;
        };
        if w == b {
            stats.same_bin += 1;
            continue;
        }
        score_sum[(w, b)] += rec.outcome.white_score();
        game_count[(w, b)] += 1;
        stats.games_used += 1;
    }

    let mids = scheme.midpoints();
    let mut entries = Array2::<f64>::zeros((m, m));
    let mut fill_mask = Array2::from_elem((m, m), false);
    for i in 0..m {
        fill_mask[(i, i)] = true;
        for j in (i + 1)..m {
            let predicted = expected_score(mids[i], mids[j]);
            // Direction 1: bin i plays white. Direction 2: bin i plays black,
            // so the observed white-perspective mean is negated.
            let as_white = if game_count[(i, j)] > 0 {
                score_sum[(i, j)] / game_count[(i, j)] as f64
            } else {
                predicted
            };
            let as_black = if game_count[(j, i)] > 0 {
                -(score_sum[(j, i)] / game_count[(j, i)] as f64)
            } else {
                predicted
            };
            let entry = (as_white + as_black) / 2.0;
            entries[(i, j)] = entry;
            entries[(j, i)] = -entry;
            let observed = game_count[(i, j)] > 0 && game_count[(j, i)] > 0;
            fill_mask[(i, j)] = observed;
            fill_mask[(j, i)] = observed;
        }
    }

    (PayoffMatrix { entries, fill_mask }, stats)
}

/// On-disk form of a payoff matrix together with its provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PayoffDocument {
    /// Bin scheme for data-derived matrices; `None` for synthetic games that
    /// carry no rating semantics.
    pub scheme: Option<BinScheme>,
    pub entries: Vec<Vec<f64>>,
    pub fill_mask: Vec<Vec<bool>>,
    pub skipped_count: u64,
}

impl PayoffDocument {
    pub fn new(matrix: &PayoffMatrix, scheme: Option<BinScheme>, skipped_count: u64) -> Self {
        let entries = matrix.entries.rows().into_iter().map(|r| r.to_vec()).collect();
        let fill_mask = matrix.fill_mask.rows().into_iter().map(|r| r.to_vec()).collect();
        PayoffDocument { scheme, entries, fill_mask, skipped_count }
    }

    /// Reconstructs the validated matrix.
    pub fn matrix(&self) -> Result<PayoffMatrix> {
        let m = self.entries.len();
        let mut entries = Array2::zeros((m, m));
        let mut mask = Array2::from_elem((m, m), false);
        for (i, row) in self.entries.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Data(format!("entries row {i} has length {}", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                entries[(i, j)] = v;
            }
        }
        if self.fill_mask.len() != m {
            return Err(Error::Data("fill mask row count mismatch".into()));
        }
        for (i, row) in self.fill_mask.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Data(format!("fill mask row {i} has length {}", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                mask[(i, j)] = v;
            }
        }
        if let Some(scheme) = &self.scheme {
            if scheme.len() != m {
                return Err(Error::Data(format!(
                    "scheme has {} bins but matrix is {m}x{m}",
                    scheme.len()
                )));
            }
        }
        PayoffMatrix::from_parts(entries, mask)
    }

    pub fn midpoints(&self) -> Vec<f64> {
        match &self.scheme {
            Some(s) => s.midpoints(),
            None => (0..self.entries.len()).map(|i| i as f64).collect(),
        }
    }
}

/// Writes the entries as CSV: one header row of bin midpoints, then one row
/// per bin. Values use the shortest representation that round-trips exactly.
pub fn write_payoff_csv<W: std::io::Write>(
    matrix: &PayoffMatrix,
    midpoints: &[f64],
    writer: W,
) -> Result<()> {
    if midpoints.len() != matrix.m() {
        return Err(Error::Data(format!(
            "{} midpoints for a {}x{} matrix",
            midpoints.len(),
            matrix.m(),
            matrix.m()
        )));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(midpoints.iter().map(|x| x.to_string()))?;
    for row in matrix.entries.rows() {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a payoff CSV written by [`write_payoff_csv`]. The CSV carries entries
/// only, so the fill mask of the result marks every entry observed.
pub fn read_payoff_csv<R: std::io::Read>(reader: R) -> Result<(PayoffMatrix, Vec<f64>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut midpoints: Vec<f64> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> =
            rec.iter().map(|s| s.trim().parse::<f64>()).collect();
        let parsed = parsed.map_err(|e| Error::Data(format!("payoff csv line {line}: {e}")))?;
        if line == 0 {
            midpoints = parsed;
        } else {
            rows.push(parsed);
        }
    }
    let m = midpoints.len();
    if rows.len() != m {
        return Err(Error::Data(format!("payoff csv has {} data rows for {m} columns", rows.len())));
    }
    let mut entries = Array2::zeros((m, m));
    for (i, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(Error::Data(format!("payoff csv row {i} has {} fields", row.len())));
        }
        for (j, &v) in row.iter().enumerate() {
            entries[(i, j)] = v;
        }
    }
    Ok((PayoffMatrix::from_entries(entries)?, midpoints))
}
