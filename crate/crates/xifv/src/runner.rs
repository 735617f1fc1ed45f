//! Replicates on a rayon thread pool.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use xifv_core::seed::ReplicateRunner;

/// Runs replicates on a dedicated pool. Results come back in index order,
/// so the output does not depend on the number of threads.
#[derive(Debug)]
pub struct Rayon {
    pool: ThreadPool,
}

impl Rayon {
    /// `jobs = 0` uses one thread per core.
    pub fn new(jobs: usize) -> Result<Self, String> {
        let pool = ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| e.to_string())?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl ReplicateRunner for Rayon {
    fn run<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..count).into_par_iter().map(job).collect())
    }
}
