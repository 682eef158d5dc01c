//! Execution mode for data-parallel loops.
//!
//! Every parallel loop in the crate maps an index range to values and
//! collects them in index order, so the output never depends on how work
//! was scheduled.

/// Where data-parallel loops run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    /// Calling thread only.
    Sequential,
    /// Rayon's global pool when the `parallel` feature is enabled,
    /// otherwise identical to `Sequential`.
    #[default]
    Parallel,
}

impl Exec {
    /// Map `0..n` through `f`, returning results in index order.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Map a slice through `f`, returning results in slice order.
    pub fn map_slice<'a, S, T, F>(self, items: &'a [S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&'a S) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }
}
