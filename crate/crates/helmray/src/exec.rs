//! Data-parallel execution policy for per-ray loops.
//!
//! Every per-ray map is a pure function of an immutable front snapshot, so
//! results are identical (and in identical order) on both paths.

/// How per-ray maps are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    /// Parallel for large fronts, sequential below the threshold.
    #[default]
    Auto,
    Sequential,
    /// Rayon data parallelism; falls back to sequential when the crate is
    /// built without the `parallel` feature.
    Parallel,
}

/// Fronts smaller than this run sequentially under `Exec::Auto`.
pub const PAR_THRESHOLD: usize = 4096;

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<R, F>(exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;
    let parallel = match exec {
        Exec::Auto => n >= PAR_THRESHOLD,
        Exec::Sequential => false,
        Exec::Parallel => true,
    };
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<R, F>(_exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}
