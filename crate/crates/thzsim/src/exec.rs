//! Execution helpers: data-parallel maps with a sequential fallback.
//!
//! Every parallel entry point in this crate maps independent work items
//! into an index-ordered `Vec` and reduces sequentially (or pairwise)
//! afterwards, so results are bit-identical for any thread count and
//! for the sequential fallback build (`--no-default-features`).

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, preserving index order in the output.
#[cfg(feature = "parallel")]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, preserving index order in the output.
#[cfg(not(feature = "parallel"))]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Map `f` over a slice, preserving order.
#[cfg(feature = "parallel")]
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Map `f` over a slice, preserving order.
#[cfg(not(feature = "parallel"))]
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Always-sequential variant, used by the benchmark suite as the
/// baseline against the parallel path.
pub fn map_range_seq<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

/// Pairwise summation over an ordered slice. Association is fixed by
/// the element order, so the result does not depend on how the inputs
/// were produced.
pub fn pairwise_sum(terms: &[Complex64]) -> Complex64 {
    match terms.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => terms[0],
        2 => terms[0] + terms[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
        }
    }
}
