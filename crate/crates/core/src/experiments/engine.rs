//! Deterministic batching of trials.
//!
//! Trials are cut into fixed-size batches. Every batch owns five random
//! streams derived from `(seed, substream, batch index, role)`, so a batch
//! produces the same draws whichever worker runs it. Batch results are
//! collected in index order and folded sequentially; the outcome is
//! bit-identical at any thread count.

use std::ops::Range;

use rayon::prelude::*;

use crate::math::RngStream;

pub(crate) const BATCH_TRIALS: u64 = 4096;

const ROLE_BITS: u32 = 3;
const BATCH_BITS: u32 = 37;

/// The random streams of one batch of trials, one per role.
#[derive(Debug, Clone)]
pub struct TrialStreams {
    pub source: RngStream,
    pub station_a: RngStream,
    pub station_b: RngStream,
    pub choice_a: RngStream,
    pub choice_b: RngStream,
}

impl TrialStreams {
    pub fn for_batch(seed: u64, substream: u64, batch: u64) -> Self {
        assert!(substream < 1 << (64 - BATCH_BITS - ROLE_BITS), "substream index out of range");
        assert!(batch < 1 << BATCH_BITS, "batch index out of range");
        let base = (substream << (BATCH_BITS + ROLE_BITS)) | (batch << ROLE_BITS);
        Self {
            source: RngStream::new(seed, base),
            station_a: RngStream::new(seed, base | 1),
            station_b: RngStream::new(seed, base | 2),
            choice_a: RngStream::new(seed, base | 3),
            choice_b: RngStream::new(seed, base | 4),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BatchPlan {
    pub n: u64,
    pub seed: u64,
    pub substream: u64,
}

impl BatchPlan {
    pub fn new(n: u64, seed: u64, substream: u64) -> Self {
        Self { n, seed, substream }
    }

    pub fn batch_count(&self) -> u64 {
        self.n.div_ceil(BATCH_TRIALS)
    }

    pub fn all_batches(&self) -> Range<u64> {
        0..self.batch_count()
    }

    fn batch_len(&self, batch: u64) -> u64 {
        let start = batch * BATCH_TRIALS;
        BATCH_TRIALS.min(self.n - start)
    }

    /// Runs `work(streams, batch_index, trials_in_batch)` for each batch in
    /// `batches`, in parallel, returning results in batch order.
    pub fn run<T, F>(&self, batches: Range<u64>, work: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut TrialStreams, u64, u64) -> T + Sync,
    {
        batches
            .into_par_iter()
            .map(|batch| {
                let mut streams = TrialStreams::for_batch(self.seed, self.substream, batch);
                work(&mut streams, batch, self.batch_len(batch))
            })
            .collect()
    }

    /// [`run`](Self::run) followed by an in-order fold.
    pub fn fold<T, F, M>(&self, batches: Range<u64>, work: F, init: T, mut merge: M) -> T
    where
        T: Send,
        F: Fn(&mut TrialStreams, u64, u64) -> T + Sync,
        M: FnMut(&mut T, T),
    {
        let mut acc = init;
        for part in self.run(batches, work) {
            merge(&mut acc, part);
        }
        acc
    }
}

/// Splits `range` into `parts` contiguous, possibly empty, chunks.
pub(crate) fn split_range(range: Range<u64>, parts: u64) -> Vec<Range<u64>> {
    let len = range.end - range.start;
    let parts = parts.max(1);
    (0..parts)
        .map(|i| {
            let lo = range.start + len * i / parts;
            let hi = range.start + len * (i + 1) / parts;
            lo..hi
        })
        .collect()
}
