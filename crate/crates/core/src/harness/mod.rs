//! Experiment drivers: regret simulations, information-ratio scans, lemma
//! sweeps, bound tables and figure data.

pub mod bounds;
pub mod config;
pub mod csvout;
pub mod experiment;
pub mod figures;
pub mod lemmas;
pub mod scan;

pub use bounds::{regret_bound_main, regret_bound_quantized, BoundsRow};
pub use config::ExperimentConfig;
pub use experiment::{run_experiment, ExperimentReport, RegretTrace, Summary};
pub use lemmas::{LemmaKind, LemmaRow, LemmaSweep};
pub use scan::{info_ratio_scan, ScanSpec};

/// Map `f` over `0..n` on `jobs` worker threads, keeping index order.
pub fn par_map<T, F>(n: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if jobs > 1 && n > 1 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                return pool.install(|| (0..n).into_par_iter().map(&f).collect());
            }
        }
    }
    let _ = jobs;
    (0..n).map(f).collect()
}

/// Default worker count: all available cores.
pub fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_keeps_order() {
        let seq = par_map(1000, 1, |i| i * i);
        let par = par_map(1000, 8, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(par[999], 999 * 999);
    }

    #[test]
    fn mean_stderr_small_cases() {
        assert_eq!(mean_stderr(&[]), (0.0, 0.0));
        assert_eq!(mean_stderr(&[3.0]), (3.0, 0.0));
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
