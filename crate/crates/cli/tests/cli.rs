use microdyn_core::{compile_str, CodegenConfig, DispatchMode};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(rel)
}

fn microdyn(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_microdyn"))
        .args(args)
        .current_dir(cwd)
        .env_remove("MICRODYN_CC")
        .env_remove("MICRODYN_WORKDIR")
        .output()
        .expect("spawn microdyn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().map(|o| o.status.success()).unwrap_or(false)
}

#[test]
fn run_listing6_prints_7() {
    if !have_cc() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let listing = corpus("listings/listing6.py");
    let o = microdyn(&["run", listing.to_str().unwrap(), "--out", "build"], dir.path());
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(&o));
    assert_eq!(stdout(&o), "7\n");
    assert!(dir.path().join("build/listing6").exists());
}

#[test]
fn run_reports_loads_as_events() {
    if !have_cc() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let listing = corpus("listings/listing6.py");
    let o = microdyn(&["run", listing.to_str().unwrap(), "--out", "b", "--events"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let loads = stderr(&o).lines().filter(|l| l.contains("\"event\":\"load\"")).count();
    assert_eq!(loads, 2);
}

#[test]
fn missing_file_is_user_error() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["compile", "run", "interp", "build"] {
        let o = microdyn(&[cmd, "missing.py"], dir.path());
        assert_eq!(o.status.code(), Some(1), "{cmd}");
        assert!(stderr(&o).contains("no such file"), "{cmd}: {}", stderr(&o));
    }
    let o = microdyn(&["elf-dump", "missing.o"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no such file"));
}

#[test]
fn usage_errors_print_synopsis() {
    let dir = tempfile::tempdir().unwrap();
    let o = microdyn(&[], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage: microdyn"));
    let o = microdyn(&["compile", "x.py", "--dispatch", "sideways"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage:"));
    let o = microdyn(&["compile", "x.py", "--max-lex-levels", "many"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compile_and_runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.py"), "def f(:\n").unwrap();
    let o = microdyn(&["compile", "bad.py"], dir.path());
    assert_eq!(o.status.code(), Some(1));

    let listing = corpus("listings/listing6.py");
    let o = microdyn(&["compile", listing.to_str().unwrap(), "--out", "o", "--max-lex-levels", "1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("InsufficientLexLevels"), "{}", stderr(&o));

    let prog = corpus("programs/index_error.py");
    let o = microdyn(&["interp", prog.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("IndexError"));
}

#[test]
fn toolchain_failure_is_internal_error() {
    let dir = tempfile::tempdir().unwrap();
    let listing = corpus("listings/listing6.py");
    let o = Command::new(env!("CARGO_BIN_EXE_microdyn"))
        .args(["run", listing.to_str().unwrap(), "--out", "b"])
        .current_dir(dir.path())
        .env("MICRODYN_CC", "microdyn-no-such-cc")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ToolchainError"));
}

#[test]
fn interp_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let listing = corpus("listings/listing6.py");
    let o = microdyn(&["interp", listing.to_str().unwrap(), "--show-loads"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "7\n");
    assert_eq!(stderr(&o).lines().filter(|l| l.starts_with("load ")).count(), 2);
}

#[test]
fn compile_writes_units_under_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let listing = corpus("listings/listing6.py");
    let o = microdyn(&["compile", listing.to_str().unwrap(), "--out", "gen", "--emit-symtab"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["listing6.c", "listing6_oly_e1.c", "listing6_oly_e2.c", "listing6.symtab", "oly_rt.h"] {
        assert!(dir.path().join("gen").join(f).exists(), "{f}");
    }
}

#[test]
fn workdir_env_sets_default_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let listing = corpus("listings/listing6.py");
    let o = Command::new(env!("CARGO_BIN_EXE_microdyn"))
        .args(["compile", listing.to_str().unwrap()])
        .current_dir(dir.path())
        .env("MICRODYN_WORKDIR", dir.path().join("wd"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("wd/listing6.c").exists());
}

fn unit_files(dir: &Path) -> BTreeMap<String, String> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "c" || x == "symtab"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect()
}

#[test]
fn dispatch_flag_matches_library_classification() {
    let dir = tempfile::tempdir().unwrap();
    let mut programs: Vec<PathBuf> = std::fs::read_dir(corpus("programs")).unwrap().map(|e| e.unwrap().path()).collect();
    programs.push(corpus("listings/listing6.py"));
    programs.sort();
    for prog in &programs {
        let text = std::fs::read_to_string(prog).unwrap();
        let stem = prog.file_stem().unwrap().to_string_lossy().into_owned();
        for mode in [DispatchMode::Auto, DispatchMode::Static, DispatchMode::Dynamic, DispatchMode::Load] {
            let out = dir.path().join(format!("{stem}_{}", mode.as_str()));
            let o = microdyn(
                &["compile", prog.to_str().unwrap(), "--out", out.to_str().unwrap(), "--dispatch", mode.as_str(), "--emit-symtab"],
                dir.path(),
            );
            assert_eq!(o.status.code(), Some(0), "{stem} {mode:?}: {}", stderr(&o));
            let lib = compile_str(&text, &CodegenConfig::new(stem.clone(), mode)).unwrap();
            let mut want: BTreeMap<String, String> = lib.units().map(|u| (u.file_name.clone(), u.body.clone())).collect();
            want.insert(lib.symtab_file_name(), lib.symtab.to_text());
            assert_eq!(unit_files(&out), want, "{stem} {mode:?}");
            if mode == DispatchMode::Static {
                assert!(lib.dynamic.is_empty(), "{stem}: forced static still emits loadable units");
            }
        }
    }
}

fn nm_functions(path: &Path) -> BTreeMap<String, (u64, u64)> {
    let out = Command::new("nm").args(["-S", "--defined-only"]).arg(path).output().expect("nm");
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter_map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 || !matches!(f[2], "T" | "t") {
                return None;
            }
            Some((f[3].to_string(), (u64::from_str_radix(f[0], 16).ok()?, u64::from_str_radix(f[1], 16).ok()?)))
        })
        .collect()
}

fn dumped_functions(text: &str) -> BTreeMap<String, (u64, u64)> {
    text.lines()
        .skip_while(|l| *l != "functions:")
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            assert_eq!((f[1], f[3]), ("value", "size"), "{l}");
            let value = u64::from_str_radix(f[2].trim_start_matches("0x"), 16).unwrap();
            (f[0].to_string(), (value, f[4].parse().unwrap()))
        })
        .collect()
}

#[test]
fn elf_dump_symbols_match_nm() {
    let nm_ok = Command::new("nm").arg("--version").output().map(|o| o.status.success()).unwrap_or(false);
    if !have_cc() || !nm_ok {
        eprintln!("no toolchain; skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let listing = corpus("listings/listing6.py");
    let o = microdyn(&["build", listing.to_str().unwrap(), "--out", "b", "--dispatch", "load"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let objects: Vec<PathBuf> = std::fs::read_dir(dir.path().join("b"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "o"))
        .collect();
    assert!(objects.len() >= 3);
    let mut saw_entry = false;
    for obj in &objects {
        let o = microdyn(&["elf-dump", obj.to_str().unwrap()], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let ours = dumped_functions(&stdout(&o));
        assert_eq!(ours, nm_functions(obj), "{}", obj.display());
        saw_entry |= ours.keys().any(|k| k.starts_with("oly_e"));
    }
    assert!(saw_entry, "no oly_e* entry symbols listed");
}

#[test]
fn elf_dump_rejects_non_elf() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("junk.o"), b"not an object").unwrap();
    let o = microdyn(&["elf-dump", "junk.o"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("BadMagic"));
}

#[test]
fn bench_writes_csv() {
    if !have_cc() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("small.toml"),
        "nx = 8\nmaxIters = 20\nreport = 20\nvariants = [\"refinterp\", \"static\", \"load\"]\nrepetitions = 5\nmaxRelativeIqr = 1e9\n",
    )
    .unwrap();
    let o = microdyn(&["bench", "small.toml", "--out", "res"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("Jacobi NX=8"));
    let csv = std::fs::read_to_string(dir.path().join("res/bench.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], microdyn_bench::CSV_HEADER);
    assert_eq!(lines.len(), 4);

    std::fs::write(dir.path().join("bad.toml"), "repetitions = 2\n").unwrap();
    let o = microdyn(&["bench", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("at least 5"));
}
