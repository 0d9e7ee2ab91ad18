//! Trial execution: a rayon pool when the `parallel` feature is on, a plain
//! loop otherwise. Results always come back in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "GOSSIP_PCA_THREADS";

#[derive(Default)]
pub enum Executor {
    #[default]
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel(rayon::ThreadPool),
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Executor::Sequential => write!(f, "Sequential"),
            #[cfg(feature = "parallel")]
            Executor::Parallel(pool) => write!(f, "Parallel({})", pool.current_num_threads()),
        }
    }
}

impl Executor {
    /// Pool with `threads` workers; falls back to sequential for one thread.
    pub fn with_threads(threads: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            if threads > 1 {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                    return Executor::Parallel(pool);
                }
            }
        }
        let _ = threads;
        Executor::Sequential
    }

    /// Reads the pool size from `GOSSIP_PCA_THREADS`, defaulting to the
    /// number of available cores.
    pub fn from_env() -> Self {
        let default = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1);
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&t| t >= 1)
            .unwrap_or(default);
        Self::with_threads(threads)
    }

    pub fn threads(&self) -> usize {
        match self {
            Executor::Sequential => 1,
            #[cfg(feature = "parallel")]
            Executor::Parallel(pool) => pool.current_num_threads(),
        }
    }

    /// Evaluates `f(0..count)` and returns the results in index order.
    pub fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Executor::Sequential => (0..count).map(f).collect(),
            #[cfg(feature = "parallel")]
            Executor::Parallel(pool) => {
                pool.install(|| (0..count).into_par_iter().map(f).collect())
            }
        }
    }
}
