//! Two-stage uniform sampling over a streamed universe.
//!
//! The universe is consumed in consecutive chunks of `chunk_size` items; a
//! reservoir draws up to `d` items uniformly from each chunk into a pool, and
//! a second uniform draw of `d` items from the pool yields the sample. When
//! all chunks are full this gives every item the same marginal inclusion
//! probability `d / m` while never holding more than one chunk's reservoir
//! plus the pool in memory. A final short chunk contributes all of its items
//! when it holds fewer than `d`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameters of the monthly sampling stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePlan {
    /// Records retained per month.
    pub per_month_quota: usize,
    /// First-stage chunk length; must be at least the quota.
    pub chunk_size: usize,
    pub seed: u64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan { per_month_quota: 120_000, chunk_size: 1_000_000, seed: 0 }
    }
}

impl SamplePlan {
    pub fn validate(&self) -> Result<()> {
        if self.per_month_quota == 0 {
            return Err(Error::InvalidPlan("per-month quota must be positive".into()));
        }
        if self.chunk_size < self.per_month_quota {
            return Err(Error::InvalidPlan(format!(
                "chunk size {} must be at least the quota {}",
                self.chunk_size, self.per_month_quota
            )));
        }
        Ok(())
    }
}

/// Incremental two-stage sampler; push the universe through it, then call
/// [`TwoStageSampler::finish`].
pub struct TwoStageSampler<T> {
    d: usize,
    chunk_size: usize,
    rng: ChaCha8Rng,
    pool: Vec<T>,
    reservoir: Vec<T>,
    in_chunk: usize,
    seen: u64,
}

impl<T> TwoStageSampler<T> {
    pub fn new(d: usize, chunk_size: usize, seed: u64) -> Self {
        TwoStageSampler {
            d,
            chunk_size,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pool: Vec::new(),
            reservoir: Vec::with_capacity(d.min(chunk_size)),
            in_chunk: 0,
            seen: 0,
        }
    }

    pub fn push(&mut self, item: T) {
        if self.reservoir.len() < self.d {
            self.reservoir.push(item);
        } else {
            // Reservoir step: the new item displaces a uniform slot with
            // probability d / (position + 1).
            let j = self.rng.random_range(0..=self.in_chunk);
            if j < self.d {
                self.reservoir[j] = item;
            }
        }
        self.in_chunk += 1;
        self.seen += 1;
        if self.in_chunk == self.chunk_size {
            self.flush_chunk();
        }
    }

    fn flush_chunk(&mut self) {
        self.pool.append(&mut self.reservoir);
        self.in_chunk = 0;
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    /// Second stage: a uniform draw of `d` items from the pool. Returns all
    /// pooled items when the universe was smaller than `d`.
    pub fn finish(mut self) -> (Vec<T>, u64) {
        self.flush_chunk();
        let seen = self.seen;
        if self.pool.len() <= self.d {
            return (self.pool, seen);
        }
        let picked = rand::seq::index::sample(&mut self.rng, self.pool.len(), self.d);
        let mut slots: Vec<Option<T>> = self.pool.into_iter().map(Some).collect();
        let sample = picked.into_iter().map(|i| slots[i].take().expect("distinct indices")).collect();
        (sample, seen)
    }
}

/// Draws exactly `d` items uniformly from `universe` using the two-stage
/// scheme; errors when the universe holds fewer than `d` items.
pub fn two_stage_sample<T, I>(universe: I, d: usize, plan: &SamplePlan) -> Result<Vec<T>>
where
    I: IntoIterator<Item = T>,
{
    if d == 0 {
        return Err(Error::InvalidPlan("sample size must be positive".into()));
    }
    if plan.chunk_size < d {
        return Err(Error::InvalidPlan(format!(
            "chunk size {} must be at least the sample size {d}",
            plan.chunk_size
        )));
    }
    let mut sampler = TwoStageSampler::new(d, plan.chunk_size, plan.seed);
    for item in universe {
        sampler.push(item);
    }
    let (sample, seen) = sampler.finish();
    if sample.len() < d {
        return Err(Error::SampleExceedsUniverse { requested: d, available: seen as usize });
    }
    Ok(sample)
}
