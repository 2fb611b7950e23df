//! Execution mode for the data-parallel inner loops.
//!
//! With the default `parallel` feature the `Auto` mode maps over rayon;
//! without it everything degrades to plain iterators. `Sequential` is always
//! available so benchmarks can compare both paths in one build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Rayon when the `parallel` feature is enabled, sequential otherwise.
    #[default]
    Auto,
    Sequential,
}

/// Ordered map over a slice. The output order matches the input order in
/// every mode, so downstream reductions are deterministic.
pub fn map_collect<T, R, F>(mode: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Execution::Auto => items.par_iter().map(f).collect(),
        #[cfg(not(feature = "parallel"))]
        Execution::Auto => items.iter().map(f).collect(),
        Execution::Sequential => items.iter().map(f).collect(),
    }
}

/// Ordered map over an index range.
pub fn map_range<R, F>(mode: Execution, len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Execution::Auto => (0..len).into_par_iter().map(f).collect(),
        #[cfg(not(feature = "parallel"))]
        Execution::Auto => (0..len).map(f).collect(),
        Execution::Sequential => (0..len).map(f).collect(),
    }
}
