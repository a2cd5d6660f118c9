use crate::BenchError;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const JACOBI_SOURCE: &str = include_str!("../../core/corpus/bench/jacobi.py");
pub const JACOBI_NATIVE: &str = include_str!("../../core/corpus/bench/jacobi_native.c");

/// One column of the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Tree-walking reference interpreter, timed in process.
    Refinterp,
    Static,
    Dynamic,
    Load,
    /// Hand-written C reference.
    Native,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::Native, Variant::Static, Variant::Dynamic, Variant::Load, Variant::Refinterp];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Refinterp => "refinterp",
            Variant::Static => "static",
            Variant::Dynamic => "dynamic",
            Variant::Load => "load",
            Variant::Native => "native",
        }
    }

    pub fn dispatch_mode(self) -> Option<microdyn_core::DispatchMode> {
        use microdyn_core::DispatchMode;
        match self {
            Variant::Static => Some(DispatchMode::Static),
            Variant::Dynamic => Some(DispatchMode::Dynamic),
            Variant::Load => Some(DispatchMode::Load),
            Variant::Refinterp | Variant::Native => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| BenchError::Spec(format!("unknown variant `{s}` (expected native, static, dynamic, load or refinterp)")))
    }
}

/// What to build, how large a problem to run and how often to time it.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    /// MiniPy source with `NX = `, `MAX_ITERS = ` and `REPORT = ` lines.
    pub program: String,
    /// C source honouring `-DNX`, `-DMAX_ITERS` and `-DREPORT`.
    pub native_reference: String,
    pub nx: u64,
    pub max_iters: u64,
    pub report: u64,
    pub variants: Vec<Variant>,
    pub repetitions: usize,
    /// Measurement rounds tried before giving up on a noisy variant.
    pub max_rounds: usize,
    /// Largest accepted IQR as a fraction of the median.
    pub max_relative_iqr: f64,
    /// Relative residual agreement required across variants.
    pub residual_tolerance: f64,
}

pub const MIN_REPETITIONS: usize = 5;

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            program: JACOBI_SOURCE.to_string(),
            native_reference: JACOBI_NATIVE.to_string(),
            nx: 100,
            max_iters: 10_000,
            report: 1000,
            variants: vec![Variant::Native, Variant::Static, Variant::Dynamic, Variant::Load],
            repetitions: 9,
            max_rounds: 3,
            max_relative_iqr: 0.2,
            residual_tolerance: 1e-9,
        }
    }
}

/// On-disk form; paths are relative to the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct SpecFile {
    program: Option<PathBuf>,
    native_reference: Option<PathBuf>,
    nx: Option<u64>,
    max_iters: Option<u64>,
    report: Option<u64>,
    variants: Option<Vec<Variant>>,
    repetitions: Option<usize>,
    max_rounds: Option<usize>,
    max_relative_iqr: Option<f64>,
    residual_tolerance: Option<f64>,
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        let fail = |m: String| Err(BenchError::Spec(m));
        if self.repetitions < MIN_REPETITIONS {
            return fail(format!("repetitions must be at least {MIN_REPETITIONS}, got {}", self.repetitions));
        }
        if self.nx == 0 || self.max_iters == 0 || self.report == 0 {
            return fail("nx, maxIters and report must be positive".into());
        }
        if self.variants.is_empty() {
            return fail("no variants selected".into());
        }
        if self.max_rounds == 0 {
            return fail("maxRounds must be positive".into());
        }
        for key in ["NX", "MAX_ITERS", "REPORT"] {
            if !self.program.lines().any(|l| parse_assignment(l, key).is_some()) {
                return fail(format!("program has no `{key} = <integer>` line"));
            }
        }
        Ok(())
    }

    /// Program text with the problem parameters substituted.
    pub fn instantiated_program(&self) -> String {
        let mut out = String::with_capacity(self.program.len());
        for line in self.program.split_inclusive('\n') {
            let body = line.trim_end_matches(['\n', '\r']);
            let value = [("NX", self.nx), ("MAX_ITERS", self.max_iters), ("REPORT", self.report)]
                .into_iter()
                .find(|(k, _)| parse_assignment(body, k).is_some());
            match value {
                Some((k, v)) => {
                    out.push_str(&format!("{k} = {v}"));
                    out.push_str(&line[body.len()..]);
                }
                None => out.push_str(line),
            }
        }
        out
    }

    pub fn native_defines(&self) -> Vec<(String, String)> {
        vec![
            ("NX".into(), self.nx.to_string()),
            ("MAX_ITERS".into(), self.max_iters.to_string()),
            ("REPORT".into(), self.report.to_string()),
        ]
    }

    /// Defaults overlaid with the keys present in a TOML document.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, BenchError> {
        let file: SpecFile = toml::from_str(text).map_err(|e| BenchError::Spec(e.to_string()))?;
        let mut spec = BenchmarkSpec::default();
        let read = |p: &Path| {
            let path = base_dir.join(p);
            std::fs::read_to_string(&path).map_err(|e| BenchError::Io { path: path.display().to_string(), source: e })
        };
        if let Some(p) = &file.program {
            spec.program = read(p)?;
        }
        if let Some(p) = &file.native_reference {
            spec.native_reference = read(p)?;
        }
        spec.nx = file.nx.unwrap_or(spec.nx);
        spec.max_iters = file.max_iters.unwrap_or(spec.max_iters);
        spec.report = file.report.unwrap_or(spec.report);
        spec.variants = file.variants.unwrap_or(spec.variants);
        spec.repetitions = file.repetitions.unwrap_or(spec.repetitions);
        spec.max_rounds = file.max_rounds.unwrap_or(spec.max_rounds);
        spec.max_relative_iqr = file.max_relative_iqr.unwrap_or(spec.max_relative_iqr);
        spec.residual_tolerance = file.residual_tolerance.unwrap_or(spec.residual_tolerance);
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io { path: path.display().to_string(), source: e })?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

/// `KEY = 123` at column zero.
fn parse_assignment(line: &str, key: &str) -> Option<u64> {
    let rest = line.strip_prefix(key)?.trim_start().strip_prefix('=')?.trim();
    rest.parse().ok()
}
