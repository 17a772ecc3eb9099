use prandtl_core::linear_step::ColumnMap;
use prandtl_core::Result;
use rayon::prelude::*;

/// Column jobs on a dedicated rayon pool. Results come back in column
/// order, so the output does not depend on the number of workers.
pub struct RayonColumns {
    pool: rayon::ThreadPool,
}

impl RayonColumns {
    /// `workers = 0` uses one thread per core.
    pub fn new(workers: usize) -> std::result::Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Runs `f` inside the pool, so nested parallel iterators share it.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

impl ColumnMap for RayonColumns {
    fn map_columns(&self, nx: usize, job: &(dyn Fn(usize) -> Result<Vec<f64>> + Sync)) -> Result<Vec<Vec<f64>>> {
        self.pool.install(|| (0..nx).into_par_iter().map(job).collect())
    }
}
