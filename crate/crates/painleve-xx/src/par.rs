//! Data-parallel map helpers. With the `parallel` feature (default) the
//! work is spread over the rayon pool; without it everything runs
//! sequentially on the calling thread.

/// Execution strategy for batch work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// Rayon when compiled in, sequential otherwise.
    #[default]
    Auto,
    Sequential,
}

#[cfg(feature = "parallel")]
pub fn map<T, U, F>(mode: Parallelism, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    match mode {
        Parallelism::Auto => items.into_par_iter().map(f).collect(),
        Parallelism::Sequential => items.into_iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(_mode: Parallelism, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}

/// Fallible variant; returns the first error in item order.
pub fn try_map<T, U, E, F>(mode: Parallelism, items: Vec<T>, f: F) -> Result<Vec<U>, E>
where
    T: Send,
    U: Send,
    E: Send,
    F: Fn(T) -> Result<U, E> + Sync + Send,
{
    let results = map(mode, items, f);
    results.into_iter().collect()
}
