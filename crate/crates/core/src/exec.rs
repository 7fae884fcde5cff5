//! Term evaluation with optional data parallelism.
//!
//! With the `parallel` feature (default) per-index terms are evaluated on the
//! rayon pool; without it they are evaluated in a plain loop. Either way the
//! terms come back as a `Vec` in index order and are reduced sequentially by
//! the caller, so both builds produce bit-identical sums.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many terms the parallel path is not worth the fork/join.
pub const PAR_THRESHOLD: usize = 64;

/// Evaluates `f(0), …, f(n-1)` and returns the values in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= PAR_THRESHOLD {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Like [`map_indexed`] over the elements of a slice.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(usize, &S) -> T + Sync + Send,
{
    map_indexed(items.len(), |i| f(i, &items[i]))
}

/// Whether this build evaluates terms on the rayon pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
