//! Thread pool backing the batch runner of the core crate.

use kacrice_core::kacrice::BatchRunner;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Environment variable read for the default thread count.
pub const THREADS_ENV: &str = "KACRICE_THREADS";

/// Runs batches on a dedicated rayon pool. Results come back in batch order, so
/// every reduction downstream is independent of the thread count.
pub struct Parallel {
    pool: ThreadPool,
}

impl Parallel {
    /// `None` uses one thread per available core.
    pub fn new(threads: Option<usize>) -> Result<Self, rayon::ThreadPoolBuildError> {
        let mut b = ThreadPoolBuilder::new();
        if let Some(n) = threads {
            b = b.num_threads(n.max(1));
        }
        Ok(Parallel { pool: b.build()? })
    }

    /// Thread count from `KACRICE_THREADS`, if set to a positive integer.
    pub fn threads_from_env() -> Option<usize> {
        std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl BatchRunner for Parallel {
    fn run<T: Send>(&self, batches: usize, job: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        self.pool.install(|| (0..batches).into_par_iter().map(job).collect())
    }
}
