//! Parallel/sequential execution switch.
//!
//! Every data-parallel loop in the crate goes through [`Execution::map`],
//! which always returns results in index order. Reductions are then done
//! sequentially over that vector, so the numeric result never depends on
//! the thread count or on which backend ran.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    /// rayon work-stealing over the current pool. Falls back to
    /// [`Execution::Sequential`] when the `parallel` feature is disabled.
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// True if this build can actually run work on more than one thread.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let par = Execution::Parallel.map(1000, |i| i * i);
        let seq = Execution::Sequential.map(1000, |i| i * i);
        assert_eq!(par, seq);
        assert_eq!(par[31], 961);
    }
}
