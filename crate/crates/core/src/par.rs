//! Block-parallel mapping with deterministic, in-order results.
//!
//! With the `parallel` feature enabled, [`ExecMode::Parallel`] dispatches to
//! rayon's global pool (or whatever pool the caller installed). Without it,
//! every mode runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    /// Whether this build can actually run work on more than one thread.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Evaluates `f(0..len)` and returns the results in index order.
pub fn map_indexed<T, F>(mode: ExecMode, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..len).map(f).collect()
}

/// Like [`map_indexed`], but over fixed-size chunks of `data`.
pub fn map_chunks<T, U, F>(mode: ExecMode, data: &[T], chunk: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &[T]) -> U + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return data
            .par_chunks(chunk)
            .enumerate()
            .map(|(i, c)| f(i, c))
            .collect();
    }
    let _ = mode;
    data.chunks(chunk).enumerate().map(|(i, c)| f(i, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_indexed(ExecMode::Sequential, 1000, |i| i * i);
        let par = map_indexed(ExecMode::Parallel, 1000, |i| i * i);
        assert_eq!(seq, par);
        let data: Vec<u32> = (0..103).collect();
        let a = map_chunks(ExecMode::Parallel, &data, 10, |i, c| (i, c.iter().sum::<u32>()));
        let b = map_chunks(ExecMode::Sequential, &data, 10, |i, c| (i, c.iter().sum::<u32>()));
        assert_eq!(a, b);
        assert_eq!(a.len(), 11);
    }
}
