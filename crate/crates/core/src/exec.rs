//! Execution mode for the data-parallel loops (Monte Carlo trials, exhaustive
//! enumeration, per-length scans of the prefix tree).
//!
//! Every reduction in the crate is order-independent (integer accumulators or
//! fixed-order combination), so both modes return identical results. Without
//! the `parallel` feature, [`Execution::Parallel`] silently runs sequentially.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Maps `f` over `0..len` and folds the results with `merge`.
    ///
    /// `merge` must be associative and commutative with `identity` as its
    /// neutral element; the result is then independent of how the range is
    /// split across workers.
    pub(crate) fn map_reduce<T, F, M, I>(self, len: u64, identity: I, f: F, merge: M) -> T
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
        M: Fn(T, T) -> T + Sync + Send,
        I: Fn() -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).reduce(identity, merge)
            }
            _ => (0..len).map(f).fold(identity(), merge),
        }
    }

    /// Maps `f` over a slice, preserving order.
    pub(crate) fn map_slice<A, T, F>(self, items: &[A], f: F) -> Vec<T>
    where
        A: Sync,
        T: Send,
        F: Fn(&A) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }
}
