//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature off, every [`Exec`] runs sequentially.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// `jobs == 0` means the global pool (available parallelism).
    Parallel { jobs: usize },
    #[default]
    Auto,
}

impl Exec {
    /// `--jobs` semantics: `None` is automatic, `Some(1)` sequential.
    pub fn from_jobs(jobs: Option<usize>) -> Self {
        match jobs {
            None => Exec::Auto,
            Some(0) => Exec::Parallel { jobs: 0 },
            Some(1) => Exec::Sequential,
            Some(n) => Exec::Parallel { jobs: n },
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self != Exec::Sequential
    }

    /// Order-preserving map.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            match self {
                Exec::Sequential => items.iter().map(f).collect(),
                Exec::Auto | Exec::Parallel { jobs: 0 } => items.par_iter().map(f).collect(),
                Exec::Parallel { jobs } => match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                    Ok(pool) => pool.install(|| items.par_iter().map(f).collect()),
                    Err(_) => items.par_iter().map(f).collect(),
                },
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            items.iter().map(f).collect()
        }
    }
}
