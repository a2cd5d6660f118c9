use super::{run_kernel, BuiltKernel, HostError, RunOptions};
use crate::elf;
use serde::Serialize;

/// Code-size split between the resident binary and loadable functions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeReport {
    /// Allocated `PROGBITS` bytes of the linked executable.
    pub resident_bytes: u64,
    /// `(source name, blob bytes)` per loadable function.
    pub dynamic: Vec<(String, u64)>,
    pub dynamic_bytes: u64,
    pub total_bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Measurement {
    pub wall_seconds: Vec<f64>,
    pub compute_seconds: Vec<f64>,
    pub median_wall: f64,
    pub iqr_wall: f64,
    pub median_compute: f64,
    pub iqr_compute: f64,
    pub sizes: SizeReport,
    /// Output of the last run.
    pub output: String,
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

pub fn iqr(values: &[f64]) -> f64 {
    quantile(values, 0.75) - quantile(values, 0.25)
}

pub fn sizes(kernel: &BuiltKernel) -> Result<SizeReport, HostError> {
    let read = |p: &std::path::Path| std::fs::read(p).map_err(|e| HostError::io(p, e));
    let resident_bytes = elf::parse_any(&read(&kernel.executable)?)?.allocated_progbits_size();
    let mut dynamic = Vec::new();
    for obj in &kernel.dynamic_objects {
        let img = elf::parse(&read(&obj.path)?)?;
        let blob = img.extract_unit(&obj.entry, kernel.machine)?;
        dynamic.push((obj.source_name.clone(), blob.size));
    }
    let dynamic_bytes = dynamic.iter().map(|(_, b)| b).sum();
    Ok(SizeReport { resident_bytes, dynamic, dynamic_bytes, total_bytes: resident_bytes + dynamic_bytes })
}

/// Run the kernel `repetitions` times; every run must exit cleanly.
pub fn measure(kernel: &BuiltKernel, repetitions: usize, opts: &RunOptions) -> Result<Measurement, HostError> {
    let mut wall = Vec::with_capacity(repetitions);
    let mut compute = Vec::with_capacity(repetitions);
    let mut output = String::new();
    for _ in 0..repetitions.max(1) {
        let r = run_kernel(kernel, opts)?;
        if r.status != 0 {
            return Err(HostError::DeviceFailed { status: r.status, stderr: r.stderr });
        }
        wall.push(r.wall_seconds);
        compute.push(r.compute_seconds.unwrap_or(r.wall_seconds));
        output = r.output;
    }
    Ok(Measurement {
        median_wall: median(&wall),
        iqr_wall: iqr(&wall),
        median_compute: median(&compute),
        iqr_compute: iqr(&compute),
        wall_seconds: wall,
        compute_seconds: compute,
        sizes: sizes(kernel)?,
        output,
    })
}
