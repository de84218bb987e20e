//! Thread-pool plumbing for batch evaluation.
//!
//! `DISCORDLAB_THREADS` caps the worker count. Results are always collected in
//! input order, so output never depends on scheduling.

use std::sync::OnceLock;

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

pub const THREADS_ENV: &str = "DISCORDLAB_THREADS";

/// Worker count from `DISCORDLAB_THREADS`, or the number of available cores.
pub fn configured_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        ThreadPoolBuilder::new()
            .num_threads(configured_threads())
            .build()
            .expect("thread pool")
    })
}

/// `f(i, &items[i])` for every item, in parallel, returned in input order.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    pool().install(|| items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_input_order() {
        let items: Vec<u64> = (0..1000).collect();
        let out = par_map(&items, |i, x| (i as u64) * 2 + x);
        assert!(out.iter().enumerate().all(|(i, &v)| v == 3 * i as u64));
    }
}
