//! Data-parallel sweeps with a sequential fallback.
//!
//! Every sweep item gets its own RNG stream derived from `(seed, index)`, so
//! results do not depend on thread count or scheduling. Reductions used by
//! callers are order-independent (max/min/all).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How a sweep is executed. `Parallel` silently runs sequentially when the
/// crate is built without the `parallel` feature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") { Exec::Parallel } else { Exec::Sequential }
    }
}

/// Deterministic per-item RNG.
pub fn item_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `(0..n).map(f)` collected in index order.
pub fn map_indexed<T, F>(n: usize, exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Map over a slice in order.
pub fn map_slice<S, T, F>(items: &[S], exec: Exec, f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indexed(items.len(), exec, |k| f(&items[k]))
}

/// Max of a float-valued sweep; `f64::NEG_INFINITY` for an empty sweep.
pub fn max_f64(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn parallel_and_sequential_agree() {
        let f = |k: usize| item_rng(42, k as u64).gen::<u64>();
        assert_eq!(map_indexed(64, Exec::Sequential, f), map_indexed(64, Exec::Parallel, f));
    }

    #[test]
    fn streams_differ() {
        let a: u64 = item_rng(1, 0).gen();
        let b: u64 = item_rng(1, 1).gen();
        assert_ne!(a, b);
    }
}
