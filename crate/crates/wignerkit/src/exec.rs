//! Indexed map helpers for the sample sweeps.
//!
//! Every bulk computation in this crate is an embarrassingly parallel loop
//! over an index range, with each index deriving its own random stream.  The
//! helpers here run such loops either across threads (default, behind the
//! `parallel` feature) or on the calling thread, always returning results in
//! index order so the two modes are bit-for-bit interchangeable.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is enabled.
///
/// Results are collected in index order regardless of execution order, so
/// output never depends on thread scheduling.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_sequential(n, f)
    }
}

/// Maps `f` over `0..n` on the calling thread, regardless of features.
///
/// Compiled unconditionally so benchmarks can compare the threaded and
/// single-threaded paths within one build.
pub fn map_indexed_sequential<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Largest value in a sweep of non-negative deviations (0.0 when empty).
pub fn max_of(values: Vec<f64>) -> f64 {
    values.into_iter().fold(0.0_f64, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_maps_agree_in_order() {
        let f = |i: usize| (i * i) as u64;
        assert_eq!(map_indexed(100, f), map_indexed_sequential(100, f));
    }

    #[test]
    fn max_of_handles_empty_and_unordered_input() {
        assert_eq!(max_of(vec![]), 0.0);
        assert_eq!(max_of(vec![0.25, 3.0, 1.5]), 3.0);
    }
}
