mod common;

use microdyn_core::analyze_source;
use microdyn_core::refinterp::{interpret_str, InterpOptions, RuntimeError};
use microdyn_core::{DispatchMode, SourceProgram};
use std::process::Command;

fn corpus_files() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for sub in ["programs", "listings"] {
        for e in std::fs::read_dir(common::corpus_dir().join(sub)).unwrap() {
            let p = e.unwrap().path();
            if p.extension().is_some_and(|x| x == "py") {
                out.push((format!("{sub}/{}", p.file_name().unwrap().to_string_lossy()), std::fs::read_to_string(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn run(text: &str) -> microdyn_core::refinterp::InterpResult {
    interpret_str(text, &InterpOptions::default()).unwrap()
}

/// Programs in the CPython-compatible subset must print exactly what
/// CPython prints, up to the first runtime error.
#[test]
fn agrees_with_cpython_on_the_common_subset() {
    let mut checked = 0;
    for (name, text) in corpus_files() {
        if text.contains("epython") || text.contains(".real =") || text.contains(".imag =") {
            continue;
        }
        let py = Command::new("python3").arg("-c").arg(&text).output().expect("python3 on PATH");
        let ours = run(&text);
        assert_eq!(ours.output, String::from_utf8_lossy(&py.stdout), "{name}");
        assert_eq!(ours.status == 0, py.status.success(), "{name}");
        if let Some(err) = &ours.error {
            let stderr = String::from_utf8_lossy(&py.stderr);
            let py_name = match err {
                RuntimeError::Index => "IndexError",
                RuntimeError::ZeroDivision => "ZeroDivisionError",
                other => other.name(),
            };
            assert!(stderr.contains(py_name), "{name}: {stderr}");
        }
        checked += 1;
    }
    assert!(checked >= 15, "only {checked} programs checked");
}

fn subsumed(observed: &str, inferred: &str) -> bool {
    observed == inferred || (observed == "Int" && inferred == "Real") || (observed == "Vector[Int]" && inferred == "Vector[Real]")
}

/// Every kind a variable takes at run time is covered by the inferred slot
/// kind, and scalar slots get the least such kind.
#[test]
fn observed_kinds_are_covered_by_inferred_kinds() {
    for (name, text) in corpus_files() {
        let table = analyze_source(&SourceProgram::new(&name, &text)).unwrap().kind_table();
        for mode in DispatchMode::ALL {
            let r = interpret_str(&text, &InterpOptions { mode, ..Default::default() }).unwrap();
            for ((scope, var), seen) in &r.kinds {
                let inferred = table.get(&(scope.clone(), var.clone())).unwrap_or_else(|| panic!("{name}: no slot for {scope}.{var}"));
                for k in seen {
                    assert!(subsumed(k, inferred), "{name}: {scope}.{var} observed {k}, inferred {inferred}");
                }
                if seen.iter().all(|k| k == "Int" || k == "Real") {
                    let join = if seen.contains("Real") { "Real" } else { "Int" };
                    assert_eq!(inferred, join, "{name}: {scope}.{var}");
                }
            }
        }
    }
}

#[test]
fn listing6_loads_caller_then_deferred_callee() {
    let r = run(&common::read_corpus("listings/listing6.py"));
    assert_eq!(r.output, "7\n");
    assert_eq!(r.loads, ["add_nums", "add"]);
    let r =
        interpret_str(&common::read_corpus("listings/listing6.py"), &InterpOptions { mode: DispatchMode::Static, ..Default::default() })
            .unwrap();
    assert!(r.loads.is_empty());
}

#[test]
fn runtime_errors_carry_device_status() {
    let cases = [
        ("v = [0] * 2\nprint(v[2])\n", RuntimeError::Index, 15),
        ("v = [0] * 2\nprint(v[-1])\n", RuntimeError::Index, 15),
        ("x = 0\nprint(3 // x)\n", RuntimeError::ZeroDivision, 16),
        ("x = 0.0\nprint(3.0 / x)\n", RuntimeError::ZeroDivision, 16),
        ("from epython import dynamic\n@dynamic(defer=True)\ndef f():\n    return 1\nprint(f())\n", RuntimeError::UnloadedProc, 10),
        ("def f():\n    return 1\ndel(f)\nprint(f())\n", RuntimeError::UnloadedProc, 10),
    ];
    for (text, err, status) in cases {
        let r = run(text);
        assert_eq!(r.error.as_ref(), Some(&err), "{text}");
        assert_eq!(r.status, status);
    }
}

#[test]
fn deep_recursion_overflows_cleanly() {
    let text = "def f(n):\n    return f(n + 1)\nprint(f(0))\n";
    let r = interpret_str(text, &InterpOptions { max_depth: 5000, ..Default::default() }).unwrap();
    assert_eq!(r.error, Some(RuntimeError::FrameOverflow));
}

#[test]
fn integer_arithmetic_wraps_and_floors() {
    let r = run("a = 9223372036854775807\nprint(a + 1)\nprint(-7 // 2, -7 % 2, 7 // -2, 7 % -2)\nprint(-7.5 // 2.0, -7.5 % 2.0)\n");
    assert_eq!(r.output, "-9223372036854775808\n-4 1 -4 -1\n-4.0 0.5\n");
}
