//! Jacobi benchmark harness: builds every variant of one kernel, times it,
//! checks that all variants agree on the residual and reports the results.

mod report;
mod spec;

pub use report::{format_residual, BenchResult, VariantResult, CSV_HEADER};
pub use spec::{BenchmarkSpec, Variant, JACOBI_NATIVE, JACOBI_SOURCE, MIN_REPETITIONS};

use microdyn_core::host::{self, BuiltKernel, HostError, RunOptions, SizeReport, ToolchainProfile};
use microdyn_core::refinterp::{interpret_str, InterpOptions};
use microdyn_core::{compile_str, CodegenConfig, CompileError};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("benchmark spec: {0}")]
    Spec(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Host(#[from] HostError),
    #[error("{variant} failed: {message}")]
    Run { variant: Variant, message: String },
    #[error("{variant} printed no `residual` line")]
    MissingResidual { variant: Variant },
    #[error("VarianceError: {variant} IQR {iqr:.3e} s exceeds {limit:.0}% of median {median:.3e} s after {rounds} rounds")]
    Variance { variant: Variant, median: f64, iqr: f64, limit: f64, rounds: usize },
    #[error("residual mismatch: {variant} gave {got:e}, {reference} gave {want:e}")]
    ResidualMismatch { variant: Variant, got: f64, reference: Variant, want: f64 },
}

/// Where to build and how to drive the toolchain.
#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub toolchain: ToolchainProfile,
    /// Build directory; a temporary one when `None`.
    pub workdir: Option<PathBuf>,
    /// Write `bench.csv` and `bench.txt` here when set.
    pub report_dir: Option<PathBuf>,
    pub timeout: Duration,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { toolchain: ToolchainProfile::default(), workdir: None, report_dir: None, timeout: Duration::from_secs(300) }
    }
}

enum Runner {
    Interp(String),
    Kernel(BuiltKernel),
}

struct Prepared {
    variant: Variant,
    runner: Runner,
    sizes: Option<SizeReport>,
}

/// Final residual from the kernel's last output line.
pub fn parse_residual(output: &str) -> Option<f64> {
    output.lines().rev().find_map(|l| l.strip_prefix("residual"))?.trim().parse().ok()
}

fn residuals_agree(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

impl Prepared {
    /// One timed run: seconds and output.
    fn run(&self, timeout: Duration) -> Result<(f64, String), BenchError> {
        match &self.runner {
            Runner::Interp(text) => {
                let start = Instant::now();
                let r = interpret_str(text, &InterpOptions::default())?;
                let t = start.elapsed().as_secs_f64();
                match r.error {
                    Some(e) => Err(BenchError::Run { variant: self.variant, message: e.to_string() }),
                    None => Ok((t, r.output)),
                }
            }
            Runner::Kernel(k) => {
                let r = host::run_kernel(k, &RunOptions { timeout: Some(timeout), ..Default::default() })?;
                if r.status != 0 {
                    let message = format!("exit status {}: {}", r.status, r.stderr.trim());
                    return Err(BenchError::Run { variant: self.variant, message });
                }
                Ok((r.compute_seconds.unwrap_or(r.wall_seconds), r.output))
            }
        }
    }
}

fn prepare(spec: &BenchmarkSpec, variant: Variant, dir: &Path, tc: &ToolchainProfile) -> Result<Prepared, BenchError> {
    let text = spec.instantiated_program();
    let (runner, sizes) = match variant {
        Variant::Refinterp => (Runner::Interp(text), None),
        Variant::Native => {
            let k = host::build_native(&spec.native_reference, "jacobi_native", dir, tc, &spec.native_defines())?;
            let s = host::sizes(&k)?;
            (Runner::Kernel(k), Some(s))
        }
        _ => {
            let mode = variant.dispatch_mode().expect("compiled variant");
            let program = compile_str(&text, &CodegenConfig::new(format!("jacobi_{variant}"), mode))?;
            let k = host::build_kernel(&program, dir, tc)?;
            let s = host::sizes(&k)?;
            (Runner::Kernel(k), Some(s))
        }
    };
    Ok(Prepared { variant, runner, sizes })
}

/// Build every variant, time it, cross-check residuals and report.
///
/// Repetitions are interleaved across variants so that slow drifts in
/// machine speed affect all of them alike. A variant whose interquartile
/// range exceeds `max_relative_iqr` is measured again, up to `max_rounds`
/// rounds in total.
pub fn run_suite(spec: &BenchmarkSpec, opts: &SuiteOptions) -> Result<BenchResult, BenchError> {
    spec.validate()?;
    let tmp;
    let dir = match &opts.workdir {
        Some(d) => {
            std::fs::create_dir_all(d).map_err(|e| BenchError::Io { path: d.display().to_string(), source: e })?;
            d.clone()
        }
        None => {
            tmp = tempfile_dir()?;
            tmp.path().to_path_buf()
        }
    };
    let prepared = spec.variants.iter().map(|&v| prepare(spec, v, &dir, &opts.toolchain)).collect::<Result<Vec<_>, _>>()?;

    let mut times: Vec<Vec<f64>> = vec![Vec::new(); prepared.len()];
    let mut outputs: Vec<String> = vec![String::new(); prepared.len()];
    let mut pending: Vec<usize> = (0..prepared.len()).collect();
    let mut rounds = vec![0usize; prepared.len()];
    while !pending.is_empty() {
        for &i in &pending {
            times[i].clear();
            rounds[i] += 1;
        }
        for _ in 0..spec.repetitions {
            for &i in &pending {
                let (t, out) = prepared[i].run(opts.timeout)?;
                times[i].push(t);
                outputs[i] = out;
            }
        }
        let mut still = Vec::new();
        for &i in &pending {
            let (m, q) = (host::median(&times[i]), host::iqr(&times[i]));
            if q > spec.max_relative_iqr * m {
                if rounds[i] >= spec.max_rounds {
                    return Err(BenchError::Variance {
                        variant: prepared[i].variant,
                        median: m,
                        iqr: q,
                        limit: spec.max_relative_iqr * 100.0,
                        rounds: rounds[i],
                    });
                }
                still.push(i);
            }
        }
        pending = still;
    }

    let mut rows = Vec::with_capacity(prepared.len());
    for (i, p) in prepared.iter().enumerate() {
        let residual = parse_residual(&outputs[i]).ok_or(BenchError::MissingResidual { variant: p.variant })?;
        rows.push(VariantResult {
            variant: p.variant,
            median_s: host::median(&times[i]),
            iqr_s: host::iqr(&times[i]),
            samples: times[i].clone(),
            rounds: rounds[i],
            sizes: p.sizes.clone(),
            residual,
            output: outputs[i].clone(),
        });
    }
    let reference = rows.iter().find(|r| r.variant == Variant::Refinterp).unwrap_or(&rows[0]);
    for r in &rows {
        if !residuals_agree(r.residual, reference.residual, spec.residual_tolerance) {
            return Err(BenchError::ResidualMismatch {
                variant: r.variant,
                got: r.residual,
                reference: reference.variant,
                want: reference.residual,
            });
        }
    }
    let result = BenchResult { nx: spec.nx, max_iters: spec.max_iters, repetitions: spec.repetitions, rows };
    if let Some(out) = &opts.report_dir {
        result.write(out)?;
    }
    Ok(result)
}

fn tempfile_dir() -> Result<tempfile::TempDir, BenchError> {
    tempfile::Builder::new()
        .prefix("microdyn-bench")
        .tempdir()
        .map_err(|e| BenchError::Io { path: std::env::temp_dir().display().to_string(), source: e })
}

impl From<microdyn_core::FrontendError> for BenchError {
    fn from(e: microdyn_core::FrontendError) -> Self {
        BenchError::Compile(CompileError::Frontend(e))
    }
}
