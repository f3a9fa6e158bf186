//! Compensated summation with a thread-count independent reduction order.
//!
//! Index ranges are cut into fixed-size chunks. Each chunk is summed
//! sequentially with a compensated accumulator, and the chunk partials are
//! combined in chunk order. Neither step depends on how rayon schedules the
//! chunks, so results are bitwise identical for any pool size.

use std::ops::Range;

use rayon::prelude::*;

pub const CHUNK: usize = 4096;

/// Kahan-Babuska (Neumaier) compensated accumulator.
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = Self::new();
        for x in iter {
            k.add(x);
        }
        k
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// Applies `f` to consecutive chunks of `0..n` in parallel and returns the
/// per-chunk results in chunk order.
pub fn map_chunks<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| f(c * CHUNK..((c + 1) * CHUNK).min(n)))
        .collect()
}

/// Deterministic compensated sum of `term(i)` for `i` in `0..n`.
pub fn deterministic_sum<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let partials = map_chunks(n, |r| r.map(&term).collect::<KahanSum>().value());
    compensated_sum(partials)
}

/// Runs `op` on a dedicated pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, op: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(pool) => pool.install(op),
        Err(_) => op(),
    }
}
