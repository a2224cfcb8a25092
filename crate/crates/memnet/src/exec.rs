//! Data-parallel building blocks with a sequential fallback.
//!
//! With the `parallel` feature (default) the loops run on rayon; without it
//! they run sequentially. Both paths produce identical results because every
//! work item derives its own RNG stream, so the feature only affects wall
//! time.

/// Maps `f` over `0..n`, preserving index order in the output.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n`, preserving index order in the output.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sequential reference implementation of [`map_indexed`]; always available
/// so benchmarks can compare the two paths in one build.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
