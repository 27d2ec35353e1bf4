//! Experiment runner around `diffattack_core`: strict TOML configuration,
//! reproducible run directories and the step-count benchmark.

pub mod bench;
pub mod config;
pub mod experiment;
pub mod report;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "DIFFATTACK_THREADS";

/// Sizes the global thread pool from [`THREADS_ENV`], if set. Results never
/// depend on the thread count.
pub fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got `{v}`"))?;
        if n == 0 {
            anyhow::bail!("{THREADS_ENV} must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}
