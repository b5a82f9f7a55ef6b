//! Execution policy for the data-parallel loops (sieve segments, verifier
//! chunks). With the `parallel` feature disabled every policy runs on the
//! calling thread; results are identical either way because work is split
//! at fixed boundaries and merged in a fixed order.

#[cfg(feature = "parallel")]
use std::sync::Arc;

#[derive(Clone, Debug, Default)]
pub struct Exec {
    parallel: bool,
    #[cfg(feature = "parallel")]
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl Exec {
    pub fn sequential() -> Exec {
        Exec::default()
    }

    /// Data-parallel execution on `threads` workers (0 = rayon's global pool).
    #[cfg(feature = "parallel")]
    pub fn parallel(threads: usize) -> Exec {
        let pool = (threads > 0).then(|| {
            Arc::new(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .expect("failed to build thread pool"),
            )
        });
        Exec {
            parallel: true,
            pool,
        }
    }

    #[cfg(not(feature = "parallel"))]
    pub fn parallel(_threads: usize) -> Exec {
        Exec::default()
    }

    pub fn is_parallel(&self) -> bool {
        self.parallel
    }

    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.parallel && items.len() > 1 {
            use rayon::prelude::*;
            return self.install(|| items.par_iter().map(&f).collect());
        }
        items.iter().map(f).collect()
    }

    pub fn for_each_mut<T, F>(&self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(&mut T) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.parallel && items.len() > 1 {
            use rayon::prelude::*;
            return self.install(|| items.par_iter_mut().for_each(&f));
        }
        items.iter_mut().for_each(f)
    }

    #[cfg(feature = "parallel")]
    fn install<R: Send>(&self, op: impl FnOnce() -> R + Send) -> R {
        match &self.pool {
            Some(pool) => pool.install(op),
            None => op(),
        }
    }
}
