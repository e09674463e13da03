//! Grid sweeps. With the `parallel` feature the sweep runs on the rayon pool;
//! without it, or through [`map_seq`], it runs on the calling thread. Output
//! order always matches input order.

/// Sequential map, kept public so benches can compare both paths.
pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_seq(items, f)
}

/// Whether [`map`] actually fans out.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
