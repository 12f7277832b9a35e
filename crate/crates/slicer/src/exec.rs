//! Thread-pool executor for independent jobs.

use rayon::prelude::*;
use slicer_core::exec::Executor;

/// Runs jobs on the global rayon pool. Results keep input order, so output
/// is identical to sequential execution.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl Executor for Rayon {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        items.into_par_iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use slicer_core::exec::Sequential;

    #[test]
    fn matches_sequential_order() {
        let items: Vec<u64> = (0..1000).collect();
        let f = |x: u64| x.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 7;
        assert_eq!(Rayon.map(items.clone(), f), Sequential.map(items, f));
    }
}
