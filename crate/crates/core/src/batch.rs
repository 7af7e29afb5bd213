//! Data-parallel fan-out over independent work items.
//!
//! With the `parallel` feature (on by default) work is spread across the
//! rayon pool; without it everything runs on the calling thread. Results are
//! always returned in input order, so callers see identical output either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..len` sequentially.
pub fn map_range_sequential<T, F>(len: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..len).map(f).collect()
}

/// Maps `f` over `0..len` on the rayon pool.
#[cfg(feature = "parallel")]
pub fn map_range_parallel<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..len` with the backend selected at compile time.
pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_range_parallel(len, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_range_sequential(len, f)
    }
}

pub fn map_items<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_range(items.len(), |k| f(&items[k]))
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
