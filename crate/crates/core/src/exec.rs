//! Row-parallel execution with a sequential fallback.
//!
//! Kernels in this crate write disjoint, equally sized chunks of an output
//! buffer. [`Exec::Parallel`] hands the chunks to rayon when the `parallel`
//! feature is enabled and silently runs them in order otherwise, so results
//! never depend on the choice.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Calls `f(k, chunk)` for every `chunk_len`-sized chunk `k` of `out`;
    /// the last chunk may be shorter.
    pub fn for_each_chunk<F>(self, out: &mut [f64], chunk_len: usize, f: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        debug_assert!(chunk_len > 0);
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => out
                .par_chunks_mut(chunk_len)
                .enumerate()
                .for_each(|(k, c)| f(k, c)),
            _ => out
                .chunks_mut(chunk_len)
                .enumerate()
                .for_each(|(k, c)| f(k, c)),
        }
    }

    /// Maps `0..n` through `f`, preserving order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }
}
