//! Execution helpers: data-parallel maps and deterministic reductions.
//!
//! All bulk work in this crate goes through two primitives:
//!
//! * [`map_indexed`] — fills `out[i] = f(i)`. Each slot is written by exactly
//!   one worker, so the result is identical whatever the thread count.
//! * [`pairwise_sum`] / [`pairwise_sum_f64`] — reductions over an index range
//!   with a *fixed* binary split tree. The tree shape depends only on the
//!   range, never on scheduling, so sums are reproducible run to run.
//!
//! With the `parallel` feature disabled everything runs sequentially; the
//! numbers do not change, only the wall clock.

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sequential reference path, always available (used by the benchmarks).
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync,
    T: Send,
{
    (0..n).map(f).collect()
}

/// Compute `out[i] = f(i)` for `i in 0..n`, in parallel when enabled.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
    T: Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync,
    T: Send,
{
    map_indexed_seq(n, f)
}

/// Run `f` on disjoint row chunks of `data`, `row_len` elements per row.
/// The closure receives the row index and the mutable row slice.
#[cfg(feature = "parallel")]
pub fn for_each_row<T, F>(data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    data.par_chunks_mut(row_len)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_row<T, F>(data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    for (i, row) in data.chunks_mut(row_len).enumerate() {
        f(i, row);
    }
}

const PAIRWISE_LEAF: usize = 64;

/// Deterministic pairwise sum of `f(i)` over `lo..hi`.
///
/// The split tree is a function of the range alone; parallel evaluation of
/// the two halves yields bitwise the same total as sequential evaluation.
pub fn pairwise_sum<F>(lo: usize, hi: usize, f: &F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    if hi - lo <= PAIRWISE_LEAF {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in lo..hi {
            acc += f(i);
        }
        return acc;
    }
    let mid = lo + (hi - lo) / 2;
    let (a, b) = join_halves(lo, mid, hi, f);
    a + b
}

#[cfg(feature = "parallel")]
fn join_halves<F>(lo: usize, mid: usize, hi: usize, f: &F) -> (Complex64, Complex64)
where
    F: Fn(usize) -> Complex64 + Sync,
{
    // Only fork when the halves are big enough to amortize the task overhead.
    if hi - lo >= 1 << 14 {
        rayon::join(|| pairwise_sum(lo, mid, f), || pairwise_sum(mid, hi, f))
    } else {
        (pairwise_sum(lo, mid, f), pairwise_sum(mid, hi, f))
    }
}

#[cfg(not(feature = "parallel"))]
fn join_halves<F>(lo: usize, mid: usize, hi: usize, f: &F) -> (Complex64, Complex64)
where
    F: Fn(usize) -> Complex64 + Sync,
{
    (pairwise_sum(lo, mid, f), pairwise_sum(mid, hi, f))
}

/// Real-valued pairwise sum with the same fixed tree.
pub fn pairwise_sum_f64<F>(lo: usize, hi: usize, f: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    if hi - lo <= PAIRWISE_LEAF {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        return acc;
    }
    let mid = lo + (hi - lo) / 2;
    pairwise_sum_f64(lo, mid, f) + pairwise_sum_f64(mid, hi, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let vals: Vec<f64> = (0..37).map(|i| (i as f64).sin()).collect();
        let naive: f64 = vals.iter().sum();
        let pw = pairwise_sum_f64(0, vals.len(), &|i| vals[i]);
        assert!((naive - pw).abs() < 1e-14);
    }

    #[test]
    fn pairwise_is_split_invariant() {
        // The tree is fixed by the range, so the same range always gives
        // bitwise the same answer.
        let f = |i: usize| Complex64::new((i as f64).cos(), (i as f64 * 0.3).sin());
        let a = pairwise_sum(0, 100_000, &f);
        let b = pairwise_sum(0, 100_000, &f);
        assert_eq!(a, b);
    }

    #[test]
    fn map_indexed_matches_sequential() {
        let par = map_indexed(1000, |i| i * i);
        let seq = map_indexed_seq(1000, |i| i * i);
        assert_eq!(par, seq);
    }
}
