//! Partitioned map-reduce with a rayon backend and a sequential fallback.
//!
//! Partition results are always combined in index order, so outcomes do not
//! depend on the backend or on scheduling.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    #[default]
    Parallel,
    Sequential,
}

impl ExecMode {
    /// `Parallel` degrades to `Sequential` without the `parallel` feature.
    pub fn effective(self) -> ExecMode {
        if cfg!(feature = "parallel") {
            self
        } else {
            ExecMode::Sequential
        }
    }
}

/// Runs `map` on partitions `0..parts` and folds the results left to right.
pub fn map_reduce<T, M, R>(mode: ExecMode, parts: usize, init: T, map: M, reduce: R) -> T
where
    T: Send,
    M: Fn(usize) -> T + Sync + Send,
    R: Fn(T, T) -> T,
{
    let results: Vec<T> = match mode.effective() {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..parts).into_par_iter().map(&map).collect()
        }
        _ => (0..parts).map(&map).collect(),
    };
    results.into_iter().fold(init, reduce)
}

/// Half-open range of the `i`-th of `parts` near-equal slices of `0..total`.
pub fn slice(total: u64, parts: usize, i: usize) -> (u64, u64) {
    let p = parts as u64;
    let i = i as u64;
    let (q, r) = (total / p, total % p);
    let start = i * q + i.min(r);
    (start, start + q + u64::from(i < r))
}
