use criterion::{black_box, criterion_group, criterion_main, Criterion};
use microdyn_bench::{BenchmarkSpec, JACOBI_SOURCE};
use microdyn_core::host::{build_kernel, ToolchainProfile};
use microdyn_core::refinterp::{interpret_str, InterpOptions};
use microdyn_core::{compile_str, elf, CodegenConfig, DispatchMode};

fn compile(c: &mut Criterion) {
    let mut g = c.benchmark_group("compile_jacobi");
    for mode in [DispatchMode::Static, DispatchMode::Dynamic, DispatchMode::Load] {
        g.bench_function(mode.as_str(), |b| b.iter(|| compile_str(black_box(JACOBI_SOURCE), &CodegenConfig::new("jacobi", mode)).unwrap()));
    }
    g.finish();
}

fn interpret(c: &mut Criterion) {
    let spec = BenchmarkSpec { nx: 16, max_iters: 20, report: 20, ..Default::default() };
    let text = spec.instantiated_program();
    c.bench_function("refinterp_jacobi_16x20", |b| b.iter(|| interpret_str(black_box(&text), &InterpOptions::default()).unwrap()));
}

fn extract(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let program = compile_str(JACOBI_SOURCE, &CodegenConfig::new("jacobi", DispatchMode::Load)).unwrap();
    let kernel = match build_kernel(&program, dir.path(), &ToolchainProfile::default().with_env_overrides()) {
        Ok(k) => k,
        Err(e) => {
            eprintln!("skipping ELF benchmark: {e}");
            return;
        }
    };
    let objects: Vec<(Vec<u8>, String)> =
        kernel.dynamic_objects.iter().map(|o| (std::fs::read(&o.path).unwrap(), o.entry.clone())).collect();
    c.bench_function("elf_extract_jacobi_units", |b| {
        b.iter(|| {
            for (bytes, entry) in &objects {
                let img = elf::parse(black_box(bytes)).unwrap();
                black_box(img.extract_unit(entry, kernel.machine).unwrap());
            }
        })
    });
}

criterion_group!(benches, compile, interpret, extract);
criterion_main!(benches);
