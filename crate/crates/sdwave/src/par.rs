//! Data-parallel building blocks with a sequential fallback.
//!
//! Everything in this crate that fans out over grid modes, time points or
//! quadrature panels goes through these helpers. With the `parallel` feature
//! (default) they dispatch to rayon; without it they run plain loops. Both
//! paths produce bit-identical results: reductions are computed as ordered
//! per-chunk partial sums that are folded sequentially, so the floating-point
//! summation order never depends on the scheduler.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used for deterministic reductions.
const CHUNK: usize = 4096;

/// Apply `f(index, &mut item)` to every element.
pub fn for_each_indexed<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }
}

/// Build a `Vec` by mapping over an index range. Output order is by index.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
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
        (0..n).map(f).collect()
    }
}

/// Deterministic sum of `f(index)` over `0..n`.
///
/// Partial sums are taken over fixed-size index chunks (in parallel when
/// enabled), then folded left-to-right, so the rounding error pattern is
/// independent of thread count.
pub fn sum_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let n_chunks = n.div_ceil(CHUNK);
    let partials = map_range(n_chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    });
    partials.iter().sum()
}

/// Deterministic max of `f(index)` over `0..n`; `f64::NEG_INFINITY` when empty.
pub fn max_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let n_chunks = n.div_ceil(CHUNK);
    let partials = map_range(n_chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        let mut acc = f64::NEG_INFINITY;
        for i in lo..hi {
            acc = acc.max(f(i));
        }
        acc
    });
    partials.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Process disjoint contiguous chunks of `data` in parallel.
pub fn for_each_chunk<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk_len).enumerate().for_each(|(i, c)| f(i, c));
    }
}
