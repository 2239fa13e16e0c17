//! Index-ordered parallel map over independent work units.
//!
//! Results come back in index order whatever the scheduling, so any
//! aggregation done afterwards is deterministic.

use crate::error::{Error, Result};

/// Runs `f(0..count)` and returns the results in index order.
///
/// `workers`: `None` uses the ambient rayon pool, `Some(1)` runs on the
/// calling thread, `Some(k)` runs on a dedicated pool of `k` threads.
pub fn map_indexed<T, F>(count: usize, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let raw: Vec<Result<T>> = run(count, workers, &f)?;
    let mut out = Vec::with_capacity(count);
    for (index, r) in raw.into_iter().enumerate() {
        match r {
            Ok(v) => out.push(v),
            Err(e) => {
                return Err(Error::Replicate {
                    index,
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(feature = "parallel")]
fn run<T, F>(count: usize, workers: Option<usize>, f: &F) -> Result<Vec<Result<T>>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;

    match workers {
        Some(0) => Err(Error::InvalidInput("worker count must be positive".into())),
        Some(1) => Ok((0..count).map(f).collect()),
        None => Ok((0..count).into_par_iter().map(f).collect()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(|| (0..count).into_par_iter().map(f).collect()))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn run<T, F>(count: usize, workers: Option<usize>, f: &F) -> Result<Vec<Result<T>>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if workers == Some(0) {
        return Err(Error::InvalidInput("worker count must be positive".into()));
    }
    Ok((0..count).map(f).collect())
}
