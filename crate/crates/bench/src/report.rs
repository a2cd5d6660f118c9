use crate::{BenchError, Variant};
use microdyn_core::host::SizeReport;
use serde::Serialize;
use std::fmt::Write;
use std::path::Path;

pub const CSV_HEADER: &str = "variant,median_s,iqr_s,resident_bytes,dynamic_bytes,total_bytes,residual";

#[derive(Debug, Clone, Serialize)]
pub struct VariantResult {
    pub variant: Variant,
    pub median_s: f64,
    pub iqr_s: f64,
    pub samples: Vec<f64>,
    /// Measurement rounds needed to meet the variance limit.
    pub rounds: usize,
    /// `None` for the interpreter.
    pub sizes: Option<SizeReport>,
    pub residual: f64,
    pub output: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchResult {
    pub nx: u64,
    pub max_iters: u64,
    pub repetitions: usize,
    pub rows: Vec<VariantResult>,
}

/// Shortest text that parses back to the same value.
pub fn format_residual(r: f64) -> String {
    format!("{r:e}")
}

impl BenchResult {
    pub fn get(&self, v: Variant) -> Option<&VariantResult> {
        self.rows.iter().find(|r| r.variant == v)
    }

    /// Median time of `a` over median time of `b`.
    pub fn ratio(&self, a: Variant, b: Variant) -> Option<f64> {
        Some(self.get(a)?.median_s / self.get(b)?.median_s)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let (res, dy, tot) = match &r.sizes {
                Some(s) => (s.resident_bytes.to_string(), s.dynamic_bytes.to_string(), s.total_bytes.to_string()),
                None => Default::default(),
            };
            let _ = writeln!(out, "{},{:e},{:e},{res},{dy},{tot},{}", r.variant, r.median_s, r.iqr_s, format_residual(r.residual));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let base = self.get(Variant::Native).or(self.rows.first()).map(|r| (r.variant, r.median_s));
        let mut out = format!("Jacobi NX={} maxIters={} repetitions={}\n", self.nx, self.max_iters, self.repetitions);
        let rel_head = base.map(|(v, _)| format!("x {v}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{:<10} {:>12} {:>12} {:>9} {:>10} {:>10} {:>10}  {}",
            "variant", "median (s)", "IQR (s)", rel_head, "resident", "dynamic", "total", "residual"
        );
        for r in &self.rows {
            let rel = base.map(|(_, b)| format!("{:.2}", r.median_s / b)).unwrap_or_default();
            let sz = |f: fn(&SizeReport) -> u64| r.sizes.as_ref().map(|s| f(s).to_string()).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<10} {:>12.6} {:>12.6} {:>9} {:>10} {:>10} {:>10}  {}",
                r.variant.as_str(),
                r.median_s,
                r.iqr_s,
                rel,
                sz(|s| s.resident_bytes),
                sz(|s| s.dynamic_bytes),
                sz(|s| s.total_bytes),
                format_residual(r.residual)
            );
        }
        out
    }

    /// `bench.csv` and `bench.txt` in `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), BenchError> {
        let io = |p: &Path, e| BenchError::Io { path: p.display().to_string(), source: e };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        for (name, body) in [("bench.csv", self.to_csv()), ("bench.txt", self.to_table())] {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| io(&p, e))?;
        }
        Ok(())
    }
}
