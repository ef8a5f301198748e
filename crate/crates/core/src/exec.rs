//! Execution mode and cancellation for the search routines.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

/// How candidate evaluation is spread over threads.
///
/// `Parallel` uses the rayon pool when the crate is built with the
/// `parallel` feature and silently runs sequentially otherwise. Both modes
/// produce identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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

/// Deadline plus a shared cancellation flag.
///
/// Clones share the flag, so a handle kept by the caller can stop a search
/// running elsewhere.
#[derive(Debug, Clone, Default)]
pub struct Budget {
    deadline: Option<Instant>,
    cancelled: Arc<AtomicBool>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn with_timeout(timeout: Duration) -> Self {
        Self {
            deadline: Some(Instant::now() + timeout),
            cancelled: Arc::default(),
        }
    }

    pub fn cancel(&self) {
        self.cancelled.store(true, Ordering::Relaxed);
    }

    pub fn exhausted(&self) -> bool {
        self.cancelled.load(Ordering::Relaxed) || self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Maps `f` over `items`, keeping input order.
pub(crate) fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Splits `0..total` into fixed-size chunks and maps `f` over them in
/// order. The chunking does not depend on the execution mode.
pub(crate) fn map_chunks<R, F>(exec: Execution, total: u64, chunk: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(std::ops::Range<u64>) -> R + Sync + Send,
{
    let ranges: Vec<_> = (0..total.div_ceil(chunk))
        .map(|c| c * chunk..((c + 1) * chunk).min(total))
        .collect();
    map(exec, &ranges, |r| f(r.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_in_order() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let parts = map_chunks(exec, 10, 4, |r| r.collect::<Vec<_>>());
            assert_eq!(parts, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7], vec![8, 9]]);
        }
        assert!(map_chunks(Execution::Sequential, 0, 4, |r| r.start).is_empty());
    }

    #[test]
    fn cancel_is_shared_between_clones() {
        let b = Budget::unlimited();
        let c = b.clone();
        assert!(!c.exhausted());
        b.cancel();
        assert!(c.exhausted());
    }

    #[test]
    fn zero_timeout_is_exhausted() {
        assert!(Budget::with_timeout(Duration::ZERO).exhausted());
    }
}
