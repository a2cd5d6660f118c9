#![allow(dead_code)]

use microdyn_core::host::{build_kernel, run_kernel, BuiltKernel, RunOptions, RunReport, ToolchainProfile};
use microdyn_core::{compile_str, CodegenConfig, DispatchMode};
use std::path::{Path, PathBuf};
use std::time::Duration;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn read_corpus(rel: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn build(text: &str, kernel: &str, mode: DispatchMode, dir: &Path) -> BuiltKernel {
    let program = compile_str(text, &CodegenConfig::new(kernel, mode)).unwrap_or_else(|e| panic!("{kernel}: {e}"));
    build_kernel(&program, dir, &ToolchainProfile::default().with_env_overrides()).unwrap_or_else(|e| panic!("{kernel}: {e}"))
}

pub fn run(kernel: &BuiltKernel) -> RunReport {
    run_kernel(kernel, &RunOptions { timeout: Some(Duration::from_secs(60)), ..Default::default() })
        .unwrap_or_else(|e| panic!("{}: {e}", kernel.kernel))
}

pub fn compile_and_run(text: &str, kernel: &str, mode: DispatchMode, dir: &Path) -> RunReport {
    run(&build(text, kernel, mode, dir))
}
