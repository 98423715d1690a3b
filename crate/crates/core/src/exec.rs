//! Execution strategy for the data-parallel kernels.
//!
//! Every kernel splits its work into fixed-size chunks whose boundaries depend
//! only on the problem size, never on the worker count. Per-chunk partial
//! results are combined in chunk order, so the sequential and parallel paths
//! produce bit-identical output. Without the `parallel` feature every
//! strategy runs sequentially.

use std::ops::Range;
#[cfg(feature = "parallel")]
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default chunk length for kernels over walkers or samples.
pub const DEFAULT_CHUNK: usize = 4096;

#[derive(Clone, Debug, Default)]
pub enum Exec {
    /// Plain loops on the calling thread.
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    /// Rayon's global pool.
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
    /// A dedicated pool with a fixed number of workers.
    #[cfg(feature = "parallel")]
    Pool(Arc<rayon::ThreadPool>),
}

impl Exec {
    pub fn sequential() -> Self {
        Exec::Sequential
    }

    /// Rayon's global pool when the `parallel` feature is enabled.
    pub fn parallel() -> Self {
        #[cfg(feature = "parallel")]
        {
            Exec::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Exec::Sequential
        }
    }

    /// A dedicated pool of `workers` threads. `workers == 0` means the
    /// global pool.
    pub fn with_workers(workers: usize) -> Result<Self> {
        #[cfg(feature = "parallel")]
        {
            if workers == 0 {
                return Ok(Exec::Parallel);
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::ThreadPool(e.to_string()))?;
            Ok(Exec::Pool(Arc::new(pool)))
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = workers;
            let _ = Error::ThreadPool(String::new());
            Ok(Exec::Sequential)
        }
    }

    pub fn is_parallel(&self) -> bool {
        !matches!(self, Exec::Sequential)
    }

    /// Runs `op` inside this strategy's pool (if any).
    pub fn install<R: Send>(&self, op: impl FnOnce() -> R + Send) -> R {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Pool(pool) => pool.install(op),
            _ => op(),
        }
    }

    /// Maps `f` over consecutive index ranges of length `chunk` covering
    /// `0..len`, returning results in range order.
    pub fn map_ranges<R, F>(&self, len: usize, chunk: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(Range<usize>) -> R + Sync + Send,
    {
        let chunk = chunk.max(1);
        let n_chunks = len.div_ceil(chunk);
        let range = move |c: usize| c * chunk..((c + 1) * chunk).min(len);
        match self {
            Exec::Sequential => (0..n_chunks).map(|c| f(range(c))).collect(),
            #[cfg(feature = "parallel")]
            _ => self.install(|| (0..n_chunks).into_par_iter().map(|c| f(range(c))).collect()),
        }
    }

    /// Applies `f(offset, chunk)` to consecutive mutable chunks of `data`.
    pub fn for_each_chunk_mut<T, F>(&self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        let chunk = chunk.max(1);
        match self {
            Exec::Sequential => data
                .chunks_mut(chunk)
                .enumerate()
                .for_each(|(c, slice)| f(c * chunk, slice)),
            #[cfg(feature = "parallel")]
            _ => self.install(|| {
                data.par_chunks_mut(chunk)
                    .enumerate()
                    .for_each(|(c, slice)| f(c * chunk, slice))
            }),
        }
    }
}
