//! Thin dispatch layer over the CPU-bound inner loops.
//!
//! With the `parallel` feature (the default) these fan out through rayon;
//! without it they run sequentially. Both implementations are always
//! compiled so the bench suite can compare them directly.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        par_map_collect(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        seq_map_collect(items, f)
    }
}

/// Sequential implementation of [`map_collect`].
pub fn seq_map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Rayon implementation of [`map_collect`].
#[cfg(feature = "parallel")]
pub fn par_map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

/// Sums `count(mask)` over every mask in `[0, 2^n)`. This is the inner loop
/// of exact signed-rank enumeration: `count` returns how many of the masks it
/// is given satisfy the predicate (here, 0 or 1).
pub fn count_masks<F>(n: u32, count: F) -> u64
where
    F: Fn(u64) -> u64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        par_count_masks(n, count)
    }
    #[cfg(not(feature = "parallel"))]
    {
        seq_count_masks(n, count)
    }
}

/// Sequential implementation of [`count_masks`].
pub fn seq_count_masks<F>(n: u32, count: F) -> u64
where
    F: Fn(u64) -> u64,
{
    let total: u64 = 1u64 << n;
    (0..total).map(count).sum()
}

/// Rayon implementation of [`count_masks`]: the mask space is split into
/// contiguous chunks so each task does meaningful work.
#[cfg(feature = "parallel")]
pub fn par_count_masks<F>(n: u32, count: F) -> u64
where
    F: Fn(u64) -> u64 + Sync + Send,
{
    let total: u64 = 1u64 << n;
    // For tiny spaces the spawn overhead dominates; just run inline.
    if total <= 1 << 12 {
        return (0..total).map(count).sum();
    }
    let chunks = (rayon::current_num_threads() as u64 * 8).max(1);
    let chunk_len = total.div_ceil(chunks);
    (0..chunks)
        .into_par_iter()
        .map(|i| {
            let start = i * chunk_len;
            let end = (start + chunk_len).min(total);
            (start..end).map(&count).sum::<u64>()
        })
        .sum()
}
