//! Command implementations behind the `phaselock` binary.

pub mod analyze;
pub mod error;
pub mod report;
pub mod simulate;

pub use analyze::{cmd_analyze, AnalyzeConfig};
pub use error::{CliError, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC, EXIT_OK};
pub use report::cmd_report;
pub use simulate::{cmd_simulate, Manifest, SimulationSpec};

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "PHASELOCK_OUT_DIR";

/// Runs `f` on a dedicated pool of `threads` workers (`None`: rayon's default).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::config(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}
