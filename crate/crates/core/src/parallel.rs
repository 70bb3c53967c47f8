//! Worker-count control for the shared rayon pool.

use crate::error::{Error, Result};

/// Runs `f` on a pool with `workers` threads, or on the global pool when
/// `workers` is `None`.
pub fn with_workers<T, F>(workers: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::config("worker count must be >= 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config(format!("cannot build a pool of {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Threads available to this process.
pub fn available_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
