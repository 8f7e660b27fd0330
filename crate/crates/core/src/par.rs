//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers dispatch to rayon; without it they
//! run the same closures in order. Results always come back in input order so
//! callers see identical output either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
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

/// Maps `f` over fixed-size chunks of `items`; the chunk boundaries depend only
/// on `chunk`, never on the worker count.
pub fn map_chunks<T, U, F>(items: &[T], chunk: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &[T]) -> U + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    {
        items.par_chunks(chunk).enumerate().map(|(i, c)| f(i, c)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.chunks(chunk).enumerate().map(|(i, c)| f(i, c)).collect()
    }
}

/// Runs `f` on each mutable chunk of `out` paired with the matching chunk of `items`.
pub fn zip_chunks_mut<T, U, F>(items: &[T], in_chunk: usize, out: &mut [U], out_chunk: usize, f: F)
where
    T: Sync,
    U: Send,
    F: Fn(&[T], &mut [U]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items
            .par_chunks(in_chunk)
            .zip(out.par_chunks_mut(out_chunk))
            .for_each(|(a, b)| f(a, b));
    }
    #[cfg(not(feature = "parallel"))]
    {
        items
            .chunks(in_chunk)
            .zip(out.chunks_mut(out_chunk))
            .for_each(|(a, b)| f(a, b));
    }
}

/// Reduces mapped chunk results in whatever order the scheduler prefers.
/// Only associative-and-commutative-up-to-rounding reductions belong here.
pub fn map_reduce_unordered<T, U, F, R>(
    items: &[T],
    chunk: usize,
    f: F,
    identity: impl Fn() -> U + Sync + Send,
    reduce: R,
) -> U
where
    T: Sync,
    U: Send,
    F: Fn(&[T]) -> U + Sync + Send,
    R: Fn(U, U) -> U + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    {
        items.par_chunks(chunk).map(f).reduce(identity, reduce)
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.chunks(chunk).map(f).fold(identity(), reduce)
    }
}

pub fn num_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
