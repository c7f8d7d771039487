//! Configuration ingestion, experiment orchestration and report emission for the
//! `mcdimers` command-line tool.
//!
//! Every command returns an [`Artifact`] (file name, contents, pass flag) so that
//! reports can be compared byte for byte. Parallel work is mapped over an ordered
//! index set and reduced sequentially afterwards, which keeps results independent of
//! the worker count.

pub mod commands;
pub mod config;
pub mod report;

use std::path::Path;

use mcurve_dimers::Error;

pub use commands::{
    cmd_abel_eval, cmd_degenerate, cmd_series, cmd_theta_eval, cmd_verify, cmd_weights, Suite,
};
pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numeric(e) => match e {
                Error::NonConvergence { .. }
                | Error::Quadrature(_)
                | Error::ThetaConditioning { .. }
                | Error::ThetaNearZero(_)
                | Error::NonUnitFactor(_)
                | Error::AbelInconsistent(_) => 3,
                _ => 2,
            },
        }
    }
}

/// Exit code for a completed run.
pub fn exit_code_for(pass: bool) -> i32 {
    if pass {
        0
    } else {
        1
    }
}

/// A report produced by a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
    pub pass: bool,
}

impl Artifact {
    /// Writes the report into `dir`, creating it if needed. Nothing is written for a
    /// command that failed before producing its artifact.
    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        let io = |e: std::io::Error, p: &Path| CliError::Io {
            path: p.display().to_string(),
            source: e,
        };
        std::fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
        let path = dir.join(&self.file_name);
        std::fs::write(&path, &self.contents).map_err(|e| io(e, &path))
    }
}

/// Runs `f` on a dedicated pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(f))
}
