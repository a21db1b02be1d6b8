//! Order-preserving parallel map; falls back to a serial loop without the
//! `parallel` feature. Results never depend on the worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, S, I, F>(n: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map_init(init, f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, S, I, F>(n: usize, init: I, f: F) -> Vec<T>
where
    I: Fn() -> S,
    F: Fn(&mut S, usize) -> T,
{
    let mut state = init();
    (0..n).map(|i| f(&mut state, i)).collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn for_each_chunk<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    data.par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_chunk<T, F>(data: &mut [T], chunk: usize, f: F)
where
    F: Fn(usize, &mut [T]),
{
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}
