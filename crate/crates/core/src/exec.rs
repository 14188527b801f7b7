//! Sequential / data-parallel execution switch.

/// How a batch of independent jobs is executed.
///
/// Results are always returned in input order, so both modes produce
/// identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled; otherwise identical
    /// to [`Execution::Sequential`].
    #[default]
    Parallel,
}

impl Execution {
    /// True when jobs actually run on the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Maps `f` over `0..len`, preserving order.
    pub fn map_range<R, F>(self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Filters and maps `0..len` in chunks, preserving order.
    ///
    /// Used for large enumerations where materialising one result per index
    /// would be wasteful.
    pub fn filter_map_range<R, F>(self, len: u64, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64) -> Option<R> + Sync + Send,
    {
        const CHUNK: u64 = 4096;
        let chunks = len.div_ceil(CHUNK);
        let run = |c: u64| -> Vec<R> {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(len);
            (start..end).filter_map(&f).collect()
        };
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            let parts: Vec<Vec<R>> = (0..chunks).into_par_iter().map(run).collect();
            return parts.into_iter().flatten().collect();
        }
        (0..chunks).flat_map(run).collect()
    }
}
