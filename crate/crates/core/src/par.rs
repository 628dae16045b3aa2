//! Per-point data parallelism with a sequential fallback.
//!
//! Results are always collected in input order and reduced sequentially,
//! so reports do not depend on the execution strategy.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled and
    /// degrades to `Sequential` otherwise.
    Parallel,
}

static MODE: AtomicU8 = AtomicU8::new(1);

impl Execution {
    /// The process-wide strategy used by the checks.
    pub fn current() -> Execution {
        if MODE.load(Ordering::Relaxed) == 0 {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    pub fn set_current(exec: Execution) {
        MODE.store(matches!(exec, Execution::Parallel) as u8, Ordering::Relaxed);
    }
}

pub fn map_points<T, F>(exec: Execution, points: &[Vec<f64>], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            points.par_iter().map(|p| f(p)).collect()
        }
        _ => points.iter().map(|p| f(p)).collect(),
    }
}

/// Same as [`map_points`] over an arbitrary slice of work items.
pub fn map_items<I, T, F>(exec: Execution, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(&f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}
