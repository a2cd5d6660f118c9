//! One PASS/FAIL line per primary acceptance criterion. Everything runs in a
//! single test so the timing criterion never shares the machine with
//! another test of this binary.

use microdyn_bench::{run_suite, BenchmarkSpec, SuiteOptions, Variant};
use microdyn_core::elf::{self, ElfError, HOST_MACHINE};
use microdyn_core::frontend::{parse_str, ExprKind, Stmt, StmtKind, Target};
use microdyn_core::host::{build_kernel, run_kernel, sizes, BuiltKernel, RunOptions, ToolchainProfile};
use microdyn_core::refinterp::{interpret, interpret_str, InterpOptions};
use microdyn_core::{analyze_source, compile_str, CodegenConfig, DispatchMode, ProgramAnalysis, SourceProgram};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::BTreeMap;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

type Check = Result<String, String>;

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
}

fn read(rel: &str) -> String {
    std::fs::read_to_string(corpus().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn build(text: &str, kernel: &str, mode: DispatchMode, dir: &Path) -> Result<BuiltKernel, String> {
    let p = compile_str(text, &CodegenConfig::new(kernel, mode)).map_err(|e| format!("{kernel}: {e}"))?;
    build_kernel(&p, &dir.join(kernel), &ToolchainProfile::default().with_env_overrides()).map_err(|e| format!("{kernel}: {e}"))
}

fn run(k: &BuiltKernel) -> Result<microdyn_core::host::RunReport, String> {
    run_kernel(k, &RunOptions { timeout: Some(Duration::from_secs(120)), ..Default::default() }).map_err(|e| format!("{}: {e}", k.kernel))
}

// ---------------------------------------------------------------------------
// Golden codegen.

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn golden() -> Check {
    for n in 1..=5 {
        let src = read(&format!("listings/listing{n}.py"));
        let p =
            compile_str(&src, &CodegenConfig::new(format!("listing{n}"), DispatchMode::Auto)).map_err(|e| format!("listing {n}: {e}"))?;
        let flat = squash(&p.units().map(|u| u.body.as_str()).collect::<Vec<_>>().join("\n"));
        for chunk in read(&format!("listings/listing{n}.expected")).split("\n...\n") {
            ensure(flat.contains(&squash(chunk)), || format!("listing {n} lacks `{}`", chunk.trim()))?;
        }
    }
    Ok("5 listings reproduced".into())
}

// ---------------------------------------------------------------------------
// Oracle equivalence.

fn oracle_equivalence() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut programs: Vec<PathBuf> = std::fs::read_dir(corpus().join("programs"))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "py"))
        .collect();
    programs.sort();
    ensure(programs.len() >= 20, || format!("only {} programs", programs.len()))?;
    let mut runs = 0;
    for path in &programs {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let module = parse_str(&text).map_err(|e| format!("{name}: {e}"))?;
        for mode in [DispatchMode::Static, DispatchMode::Dynamic, DispatchMode::Load] {
            let want = interpret(&module, &InterpOptions { mode, ..Default::default() });
            let got = run(&build(&text, &format!("{name}_{mode}"), mode, dir.path())?)?;
            runs += 1;
            let want_err = want.error.as_ref().map(|e| e.name());
            ensure(got.output == want.output, || format!("{name} [{mode}]: output differs"))?;
            ensure(got.status == want.status && got.error_name() == want_err, || {
                format!("{name} [{mode}]: status {} {:?}, interpreter {} {want_err:?}", got.status, got.error_name(), want.status)
            })?;
            ensure(got.loads() == want.loads, || format!("{name} [{mode}]: loads {:?} vs {:?}", got.loads(), want.loads))?;
        }
    }
    Ok(format!("{} programs, {runs} differential runs identical", programs.len()))
}

// ---------------------------------------------------------------------------
// Jacobi correctness.

fn stencil_residuals(nx: usize, iters: usize) -> Vec<f64> {
    let mut u = vec![0.0f64; nx + 2];
    u[0] = 1.0;
    let mut next = u.clone();
    let h2 = 1.0 / ((nx + 1) as f64).powi(2);
    (0..iters)
        .map(|_| {
            for i in 1..=nx {
                next[i] = 0.5 * (u[i - 1] + u[i + 1] + h2);
            }
            let r = (1..=nx).map(|i| (next[i] - u[i]).powi(2)).sum();
            u[1..=nx].copy_from_slice(&next[1..=nx]);
            r
        })
        .collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

fn progress(output: &str) -> Vec<f64> {
    output.lines().filter(|l| !l.starts_with("residual")).filter_map(|l| l.split_whitespace().nth(1)?.parse().ok()).collect()
}

fn final_residual(output: &str) -> Option<f64> {
    microdyn_bench::parse_residual(output)
}

fn jacobi() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let small = BenchmarkSpec { nx: 16, max_iters: 100, report: 1, ..Default::default() }.instantiated_program();
    let want = stencil_residuals(16, 100);
    let mut outputs = vec![("refinterp".to_string(), interpret_str(&small, &InterpOptions::default()).map_err(|e| e.to_string())?.output)];
    for mode in [DispatchMode::Static, DispatchMode::Dynamic, DispatchMode::Load] {
        outputs.push((mode.to_string(), run(&build(&small, &format!("j16_{mode}"), mode, dir.path())?)?.output));
    }
    for (who, out) in &outputs {
        let got = progress(out);
        ensure(got.len() == 100, || format!("{who}: {} residual lines", got.len()))?;
        for (k, (g, w)) in got.iter().zip(&want).enumerate() {
            ensure(close(*g, *w, 1e-12), || format!("{who}: iteration {} residual {g:e} vs oracle {w:e}", k + 1))?;
        }
    }
    let full = BenchmarkSpec::default().instantiated_program();
    let reference = final_residual(&interpret_str(&full, &InterpOptions::default()).map_err(|e| e.to_string())?.output)
        .ok_or("no interpreter residual")?;
    for mode in [DispatchMode::Static, DispatchMode::Dynamic, DispatchMode::Load] {
        let r = final_residual(&run(&build(&full, &format!("j100_{mode}"), mode, dir.path())?)?.output).ok_or("no residual")?;
        ensure(close(r, reference, 1e-9), || format!("{mode}: {r:e} vs refinterp {reference:e}"))?;
    }
    Ok(format!("NX=16 x100 within 1e-12 of the stencil oracle; NX=100 x10000 residual {reference:e} within 1e-9 in all modes"))
}

// ---------------------------------------------------------------------------
// Performance envelope and size ordering.

fn performance() -> Check {
    let spec = BenchmarkSpec { repetitions: 15, ..Default::default() };
    let r = run_suite(&spec, &SuiteOptions::default()).map_err(|e| e.to_string())?;
    let med = |v| r.get(v).map(|x| x.median_s).unwrap();
    let (native, stat, dynamic, load) = (med(Variant::Native), med(Variant::Static), med(Variant::Dynamic), med(Variant::Load));
    let summary = format!(
        "static/native {:.2}, dynamic/static {:.2}, load/dynamic {:.3} (medians {native:.5} {stat:.5} {dynamic:.5} {load:.5} s)",
        stat / native,
        dynamic / stat,
        load / dynamic
    );
    ensure(stat <= 5.0 * native, || format!("static exceeds 5x native: {summary}"))?;
    ensure(dynamic >= stat, || format!("dynamic faster than static: {summary}"))?;
    ensure((load / dynamic - 1.0).abs() <= 0.15, || format!("load not within 15% of dynamic: {summary}"))?;
    Ok(summary)
}

fn size_ordering() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let text = read("bench/jacobi.py");
    let dynamic = sizes(&build(&text, "size_dynamic", DispatchMode::Dynamic, dir.path())?).map_err(|e| e.to_string())?;
    let load = sizes(&build(&text, "size_load", DispatchMode::Load, dir.path())?).map_err(|e| e.to_string())?;
    ensure(load.resident_bytes < dynamic.total_bytes, || {
        format!("load resident {} >= dynamic {}", load.resident_bytes, dynamic.total_bytes)
    })?;
    ensure(load.dynamic_bytes > 0 && load.dynamic.len() == 4, || format!("dynamic objects {:?}", load.dynamic))?;
    Ok(format!(
        "load resident {} < dynamic binary {} bytes; {} loadable bytes reported separately",
        load.resident_bytes, dynamic.total_bytes, load.dynamic_bytes
    ))
}

// ---------------------------------------------------------------------------
// ELF robustness.

const HAND_C: &str = "extern int ext(int);\n\
static int sq(int x) { return x * x; }\n\
int poly(int x) { return sq(x) + 3 * x + 1; }\n\
int calls_out(int x) { return ext(x) + 1; }\n\
double mix(double a, long b) { return a * (double)b - a; }\n\
int table[4] = {1, 2, 3, 4};\n";

fn tool(cmd: &str, args: &[&str]) -> Result<String, String> {
    let out = Command::new(cmd).args(args).output().map_err(|e| format!("{cmd}: {e}"))?;
    ensure(out.status.success(), || format!("{cmd} {args:?}: {}", String::from_utf8_lossy(&out.stderr)))?;
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn hand_object(dir: &Path, flags: &str) -> Result<PathBuf, String> {
    let c = dir.join("hand.c");
    std::fs::write(&c, HAND_C).map_err(|e| e.to_string())?;
    let o = dir.join(format!("hand{flags}.o"));
    tool("gcc", &[flags, "-fno-pic", "-c", c.to_str().unwrap(), "-o", o.to_str().unwrap()])?;
    Ok(o)
}

fn elf_fidelity(dir: &Path) -> Result<usize, String> {
    let mut objs = Vec::new();
    for name in ["fib_rec", "matmul", "nested_dynamic", "mutual_recursion"] {
        let k = build(&read(&format!("programs/{name}.py")), name, DispatchMode::Load, dir)?;
        objs.extend(k.dynamic_objects.iter().map(|o| o.path.clone()));
        objs.push(k.dir.join("oly_rt.o"));
    }
    objs.push(hand_object(dir, "-O2")?);
    objs.push(hand_object(dir, "-O0")?);
    objs.sort();
    objs.dedup();
    ensure(objs.len() >= 10, || format!("only {} objects", objs.len()))?;
    for obj in &objs {
        let path = obj.to_str().unwrap();
        let bytes = std::fs::read(obj).map_err(|e| e.to_string())?;
        let img = elf::parse(&bytes).map_err(|e| format!("{path}: {e}"))?;
        let nm: BTreeMap<String, (u64, u64)> = tool("nm", &["-S", "--defined-only", path])?
            .lines()
            .filter_map(|l| {
                let f: Vec<&str> = l.split_whitespace().collect();
                if f.len() != 4 || !matches!(f[2], "T" | "t") {
                    return None;
                }
                Some((f[3].to_string(), (u64::from_str_radix(f[0], 16).ok()?, u64::from_str_radix(f[1], 16).ok()?)))
            })
            .collect();
        let ours: BTreeMap<String, (u64, u64)> = img.function_symbols().map(|s| (s.name.clone(), (s.value, s.size))).collect();
        ensure(ours == nm, || format!("{path}: symbols {ours:?} vs nm {nm:?}"))?;
        for sym in img.function_symbols() {
            let sec = &img.sections[sym.shndx as usize];
            let bin = dir.join("section.bin");
            tool("objcopy", &["-O", "binary", &format!("--only-section={}", sec.name), path, bin.to_str().unwrap()])?;
            let whole = std::fs::read(&bin).map_err(|e| e.to_string())?;
            let want = &whole[sym.value as usize..(sym.value + sym.size) as usize];
            match img.extract_function(&sym.name, HOST_MACHINE) {
                Ok(f) => ensure(f.code == want, || format!("{path} {}: bytes differ", sym.name))?,
                Err(ElfError::RelocationUnresolved { .. }) => {}
                Err(e) => return Err(format!("{path} {}: {e}", sym.name)),
            }
        }
    }
    Ok(objs.len())
}

fn elf_fuzz(dir: &Path) -> Result<(usize, usize), String> {
    let original = std::fs::read(hand_object(dir, "-O2")?).map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(0xe1f);
    let (mut typed_errors, mut parsed) = (0, 0);
    for _ in 0..100_000 {
        let mut bytes = original.clone();
        match rng.gen_range(0..3) {
            0 => {
                let i = rng.gen_range(0..bytes.len());
                bytes[i] ^= 1 << rng.gen_range(0..8);
            }
            1 => {
                for _ in 0..rng.gen_range(1..32) {
                    let i = rng.gen_range(0..bytes.len());
                    bytes[i] = rng.gen();
                }
            }
            _ => bytes.truncate(rng.gen_range(0..bytes.len())),
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| match elf::parse(&bytes) {
            Ok(img) => {
                for name in ["poly", "calls_out", "mix", "sq"] {
                    let _ = img.extract_function(name, img.machine);
                }
                true
            }
            Err(_) => false,
        }))
        .map_err(|_| "parser panicked on a mutated object".to_string())?;
        ensure(start.elapsed() < Duration::from_secs(1), || "parser took over a second on one input".into())?;
        if outcome {
            parsed += 1;
        } else {
            typed_errors += 1;
        }
    }
    Ok((typed_errors, parsed))
}

fn elf_robustness() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let objects = elf_fidelity(dir.path())?;
    let (errors, parsed) = elf_fuzz(dir.path())?;
    Ok(format!("{objects} objects match nm/objcopy; 100000 mutants: {errors} typed errors, {parsed} parsed, no panics"))
}

// ---------------------------------------------------------------------------
// Scope resolution against a naive per-use walk.

const NAMES: [&str; 5] = ["a", "b", "c", "d", "e"];

fn gen_body(rng: &mut StdRng, depth: usize, visible: &BTreeMap<&'static str, usize>, out: &mut String, next_fn: &mut usize) {
    let pad = "    ".repeat(depth);
    let mut visible = visible.clone();
    let mut wrote = false;
    for n in NAMES {
        if !rng.gen_bool(0.4) {
            continue;
        }
        match visible.get(n) {
            Some(&0) if depth > 0 && rng.gen_bool(0.4) => out.push_str(&format!("{pad}global {n}\n")),
            Some(&d) if d > 0 && rng.gen_bool(0.5) => out.push_str(&format!("{pad}nonlocal {n}\n")),
            _ => {
                visible.insert(n, depth);
            }
        }
        out.push_str(&format!("{pad}{n} = {}\n", rng.gen_range(0..100)));
        wrote = true;
    }
    let mut children = Vec::new();
    if depth < 5 {
        for _ in 0..rng.gen_range(0..=2) {
            *next_fn += 1;
            let f = format!("f{next_fn}");
            out.push_str(&format!("{pad}def {f}():\n"));
            let before = out.len();
            gen_body(rng, depth + 1, &visible, out, next_fn);
            if out.len() == before {
                out.push_str(&format!("{pad}    pass\n"));
            }
            children.push(f);
            wrote = true;
        }
    }
    let names: Vec<&str> = visible.keys().copied().collect();
    for _ in 0..rng.gen_range(0..=3) {
        if names.is_empty() {
            break;
        }
        out.push_str(&format!("{pad}print({})\n", names[rng.gen_range(0..names.len())]));
        wrote = true;
    }
    for c in children {
        out.push_str(&format!("{pad}{c}()\n"));
    }
    if !wrote && depth == 0 {
        out.push_str("pass\n");
    }
}

/// Per-scope facts the naive walk needs.
struct NaiveScope {
    parent: Option<usize>,
    depth: usize,
    globals: Vec<String>,
    nonlocals: Vec<String>,
    /// Bound names in first-occurrence order.
    bound: Vec<String>,
}

/// Record scopes and, per `print(name)` in source order, the index of the
/// scope it appears in.
fn naive_scopes(body: &[Stmt], parent: Option<usize>, depth: usize, scopes: &mut Vec<NaiveScope>, uses: &mut Vec<(String, usize)>) {
    let me = scopes.len();
    scopes.push(NaiveScope { parent, depth, globals: vec![], nonlocals: vec![], bound: vec![] });
    let bind = |scopes: &mut Vec<NaiveScope>, n: &str| {
        if !scopes[me].bound.iter().any(|b| b == n) {
            scopes[me].bound.push(n.to_string());
        }
    };
    for s in body {
        match &s.kind {
            StmtKind::Global(ns) => scopes[me].globals.extend(ns.iter().map(|n| n.name.clone())),
            StmtKind::Nonlocal(ns) => scopes[me].nonlocals.extend(ns.iter().map(|n| n.name.clone())),
            _ => {}
        }
    }
    for s in body {
        match &s.kind {
            StmtKind::Assign { target: Target::Name(n), .. } => {
                if !scopes[me].globals.contains(&n.name) && !scopes[me].nonlocals.contains(&n.name) {
                    bind(scopes, &n.name);
                }
            }
            StmtKind::FunctionDef(d) => {
                bind(scopes, &d.name.name);
                naive_scopes(&d.body, Some(me), depth + 1, scopes, uses);
            }
            StmtKind::Expr(e) => {
                if let ExprKind::Call { func, args } = &e.kind {
                    if func.name == "print" {
                        if let ExprKind::Name(n) = &args[0].kind {
                            uses.push((n.clone(), me));
                        }
                    }
                }
            }
            _ => {}
        }
    }
}

/// Owning scope of `name` used in `scope`, found by walking outwards.
fn naive_owner(scopes: &[NaiveScope], scope: usize, name: &str) -> Option<usize> {
    let has = |v: &[String]| v.iter().any(|x| x == name);
    let module = || has(&scopes[0].bound).then_some(0);
    let s = &scopes[scope];
    if has(&s.globals) {
        return module();
    }
    if !has(&s.nonlocals) && has(&s.bound) {
        return Some(scope);
    }
    let mut next = s.parent;
    while let Some(i) = next.filter(|&i| i != 0) {
        let t = &scopes[i];
        if has(&t.globals) {
            break;
        }
        if !has(&t.nonlocals) && has(&t.bound) {
            return Some(i);
        }
        next = t.parent;
    }
    module()
}

fn semant_uses(a: &ProgramAnalysis, body: &[Stmt], out: &mut Vec<(String, usize, usize, usize)>) {
    for s in body {
        match &s.kind {
            StmtKind::FunctionDef(d) => semant_uses(a, &d.body, out),
            StmtKind::Expr(e) => {
                if let ExprKind::Call { func, args } = &e.kind {
                    if func.name == "print" {
                        if let ExprKind::Name(n) = &args[0].kind {
                            let slot = a.slots[&args[0].id];
                            let r = a.resolved(args[0].id).unwrap();
                            out.push((n.clone(), a.scopes[slot.scope].depth, r.rel_level, r.offset));
                        }
                    }
                }
            }
            _ => {}
        }
    }
}

fn scope_brute_force() -> Check {
    let mut rng = StdRng::seed_from_u64(0x5c0e);
    let mut uses_checked = 0;
    for case in 0..1000 {
        let mut text = String::new();
        gen_body(&mut rng, 0, &BTreeMap::new(), &mut text, &mut 0);
        let a = analyze_source(&SourceProgram::new("<gen>", &text)).map_err(|e| format!("case {case}: {e}\n{text}"))?;
        let mut scopes = Vec::new();
        let mut uses = Vec::new();
        naive_scopes(&a.module.body, None, 0, &mut scopes, &mut uses);
        let mut got = Vec::new();
        semant_uses(&a, &a.module.body, &mut got);
        ensure(got.len() == uses.len(), || format!("case {case}: use count"))?;
        for ((name, use_scope), (gname, gdepth, grel, goff)) in uses.iter().zip(&got) {
            let owner = naive_owner(&scopes, *use_scope, name).ok_or_else(|| format!("case {case}: `{name}` unbound\n{text}"))?;
            let want = (
                scopes[owner].depth,
                scopes[*use_scope].depth - scopes[owner].depth,
                scopes[owner].bound.iter().position(|b| b == name).unwrap(),
            );
            ensure(name == gname && (*gdepth, *grel, *goff) == want, || {
                format!("case {case}: `{name}` semant (depth {gdepth}, rel {grel}, off {goff}) vs walk {want:?}\n{text}")
            })?;
            uses_checked += 1;
        }
    }
    Ok(format!("1000 random nestings, {uses_checked} uses agree on (relLevel, offset)"))
}

// ---------------------------------------------------------------------------

/// Writes through the stdout handle, which the test harness does not
/// capture, so the lines show up on passing runs too.
fn report(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Check); 7] = [
        ("golden codegen", golden),
        ("oracle equivalence", oracle_equivalence),
        ("jacobi correctness", jacobi),
        ("host performance envelope", performance),
        ("size ordering", size_ordering),
        ("elf robustness", elf_robustness),
        ("scope brute force", scope_brute_force),
    ];
    let mut failed = Vec::new();
    report("");
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => report(&format!("PASS {name}: {detail} [{secs:.1} s]")),
            Err(why) => {
                report(&format!("FAIL {name}: {why} [{secs:.1} s]"));
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
