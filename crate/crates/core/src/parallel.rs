//! Data-parallel fan-out helpers.
//!
//! Independent solves (R-sweeps, probe batteries, random pair corpora) map
//! cleanly onto `rayon`; results come back in input order, so outputs are
//! deterministic regardless of scheduling. Building without the `parallel`
//! feature swaps in the sequential loop, which the bench suite compares
//! against directly.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn map_batch<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Sequential fallback used when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn map_batch<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Always-sequential map, kept available for benchmarking against the
/// parallel path.
pub fn map_batch_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_in_order() {
        let xs: Vec<u64> = (0..500).collect();
        let a = map_batch(&xs, |x| x * x + 1);
        let b = map_batch_seq(&xs, |x| x * x + 1);
        assert_eq!(a, b);
    }
}
