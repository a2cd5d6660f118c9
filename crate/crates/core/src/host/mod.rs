//! Host side: drive the C toolchain, launch kernels as device processes and
//! serve their dynamic-load requests.

mod build;
mod measure;
pub mod runtime;
mod session;
mod toolchain;

pub use build::{build_kernel, build_native, BuiltKernel, DynamicObject};
pub use measure::{iqr, measure, median, quantile, sizes, Measurement, SizeReport};
pub use session::{run_kernel, Event, RunOptions, RunReport, LOAD_OK, LOAD_UNKNOWN, OP_EXIT, OP_LOAD, OP_OUTPUT, OP_TIMING};
pub use toolchain::{ToolchainProfile, DYNAMIC_FLAGS, RESIDENT_FLAGS};

use crate::elf::ElfError;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HostError {
    #[error("ToolchainError: `{command}` failed ({}):\n{diagnostics}", status.map(|s| s.to_string()).unwrap_or_else(|| "not run".into()))]
    Toolchain { command: String, status: Option<i32>, diagnostics: String },
    #[error("ChannelError: {0}")]
    Channel(String),
    #[error("device timed out after {seconds} s")]
    Timeout { seconds: f64, output: String },
    #[error("device exited with status {status}: {}", stderr.trim())]
    DeviceFailed { status: i32, stderr: String },
    #[error("toolchain profile: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Elf(#[from] ElfError),
}

impl HostError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HostError::Io { path: path.display().to_string(), source }
    }
}
