//! Order-preserving data-parallel map.
//!
//! With the `parallel` feature and more than one worker, items are processed
//! on a dedicated rayon pool. Results always come back in input order, so
//! any reduction the caller performs afterwards is deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub struct Workers {
    count: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Workers {
    /// `count` of 0 means one worker per available core.
    pub fn new(count: usize) -> Self {
        let count = if count == 0 {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        } else {
            count
        };
        #[cfg(feature = "parallel")]
        {
            let pool = if count > 1 {
                rayon::ThreadPoolBuilder::new().num_threads(count).build().ok()
            } else {
                None
            };
            let count = if pool.is_some() { count } else { 1 };
            Workers { count, pool }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = count;
            Workers { count: 1 }
        }
    }

    pub fn sequential() -> Self {
        Workers::new(1)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            return pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect());
        }
        items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
}

impl Default for Workers {
    fn default() -> Self {
        Workers::sequential()
    }
}

impl std::fmt::Debug for Workers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Workers").field("count", &self.count).finish()
    }
}
