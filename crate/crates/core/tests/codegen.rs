mod common;

use microdyn_core::codegen::{CodegenError, UnitKind};
use microdyn_core::{compile_str, CodegenConfig, CompileError, DispatchMode, DynSymbolTable};
use regex::Regex;
use std::collections::BTreeSet;

const C_KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum", "extern", "float", "for", "goto",
    "if", "inline", "int", "long", "register", "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef",
    "union", "unsigned", "void", "volatile", "while", "_Bool", "NULL",
];

fn strip_literals(c: &str) -> String {
    let strings = Regex::new(r#""(?:[^"\\]|\\.)*""#).unwrap();
    let numbers = Regex::new(r"\b(?:0[xX][0-9a-fA-F]+|[0-9][0-9.eE+\-]*)[uUlL]*\b").unwrap();
    let comments = Regex::new(r"(?s)/\*.*?\*/|//[^\n]*").unwrap();
    let c = comments.replace_all(c, " ");
    let c = strings.replace_all(&c, " ");
    numbers.replace_all(&c, " ").into_owned()
}

fn identifiers(c: &str) -> BTreeSet<String> {
    let ident = Regex::new(r"[A-Za-z_][A-Za-z0-9_]*").unwrap();
    ident.find_iter(&strip_literals(c)).map(|m| m.as_str().to_string()).collect()
}

fn runtime_identifiers() -> BTreeSet<String> {
    identifiers(microdyn_core::host::runtime::HEADER)
}

fn corpus() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for sub in ["programs", "listings"] {
        for e in std::fs::read_dir(common::corpus_dir().join(sub)).unwrap() {
            let p = e.unwrap().path();
            if p.extension().is_some_and(|x| x == "py") {
                out.push((p.file_stem().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn generation_is_deterministic() {
    for (name, text) in corpus() {
        for mode in DispatchMode::ALL {
            let cfg = CodegenConfig::new("k", mode);
            let a = compile_str(&text, &cfg).unwrap();
            let b = compile_str(&text, &cfg).unwrap();
            assert_eq!(a.units().collect::<Vec<_>>(), b.units().collect::<Vec<_>>(), "{name} {mode}");
            assert_eq!(a.symtab, b.symtab);
        }
    }
}

/// Emitted C names only mangled functions, compiler temporaries, runtime
/// ABI identifiers and C keywords; source identifiers never leak.
#[test]
fn emitted_identifiers_stay_within_the_abi() {
    let rt = runtime_identifiers();
    let own = Regex::new(r"^oly_(?:e[0-9]+(?:_slots|_level)?|t[0-9]+)$").unwrap();
    let entry_points = ["main", "oly_main", "oly_dyn_info", "env", "self"];
    for (name, text) in corpus() {
        for mode in DispatchMode::ALL {
            let p = compile_str(&text, &CodegenConfig::new("k", mode)).unwrap();
            for unit in p.units() {
                for id in identifiers(&unit.body) {
                    let ok =
                        C_KEYWORDS.contains(&id.as_str()) || rt.contains(&id) || own.is_match(&id) || entry_points.contains(&id.as_str());
                    assert!(ok, "{name} [{mode}] {}: identifier `{id}` outside the ABI", unit.file_name);
                }
            }
        }
    }
}

#[test]
fn dynamic_units_are_self_contained() {
    let p = compile_str(&common::read_corpus("listings/listing6.py"), &CodegenConfig::new("l6", DispatchMode::Auto)).unwrap();
    assert_eq!(p.dynamic.len(), 2);
    for unit in &p.dynamic {
        let UnitKind::Dynamic { function } = unit.kind else { panic!("resident unit in dynamic list") };
        let entry = &p.symtab.entries.iter().find(|e| e.object_file == unit.object_name()).unwrap().mangled;
        let first_def = unit.body.lines().find(|l| l.starts_with("Int ") && l.contains('(') && !l.ends_with(';')).unwrap();
        assert!(first_def.contains(entry.as_str()), "{first_def} (function {function})");
        let code: String = unit.body.lines().filter(|l| !l.starts_with("#include")).collect();
        assert!(!code.contains('"'), "string literal would need rodata:\n{}", unit.body);
    }
    let names: Vec<_> = p.symtab.entries.iter().map(|e| (e.source_name.as_str(), e.argc, e.defer)).collect();
    assert_eq!(names, [("add", 2, true), ("add_nums", 0, false)]);
}

#[test]
fn too_few_lex_levels_is_rejected() {
    let text = common::read_corpus("listings/listing1.py");
    let mut cfg = CodegenConfig::new("k", DispatchMode::Auto);
    cfg.max_lex_levels = Some(4);
    match compile_str(&text, &cfg) {
        Err(CompileError::Codegen(CodegenError::InsufficientLexLevels { required: 5, configured: 4 })) => {}
        other => panic!("{other:?}"),
    }
    cfg.max_lex_levels = Some(8);
    assert_eq!(compile_str(&text, &cfg).unwrap().max_lex_levels, 8);
}

#[test]
fn kernel_names_must_be_c_identifiers() {
    let err = compile_str("print(1)\n", &CodegenConfig::new("bad-name", DispatchMode::Auto)).unwrap_err();
    assert!(matches!(err, CompileError::Codegen(CodegenError::InvalidKernelName(_))));
}

#[test]
fn symbol_table_round_trips() {
    for (name, text) in corpus() {
        let p = compile_str(&text, &CodegenConfig::new("k", DispatchMode::Load)).unwrap();
        assert_eq!(DynSymbolTable::parse(&p.symtab.to_text()).unwrap(), p.symtab, "{name}");
    }
    for bad in ["add\toly_e1\tk_add.o\t2\n", "add\toly_e1\tk_add.o\tx\t0\n", "add\toly_e1\tk_add.o\t2\tyes\n", "\toly_e1\tk.o\t1\t0\n"] {
        assert!(DynSymbolTable::parse(bad).is_err(), "{bad:?}");
    }
}

/// Statically dispatched callees that call nothing but builtins get a
/// private display; callees that call further functions share the real one.
#[test]
fn leaf_calls_use_a_private_display() {
    let src = "\
def sq(x):
    return x * x

def show(x):
    print(x)

def twice(x):
    return sq(x) + sq(x)

def main():
    show(twice(3))

main()
";
    let p = compile_str(src, &CodegenConfig::new("leaf", DispatchMode::Static)).unwrap();
    let body = &p.resident.body;
    assert!(body.contains("call_leaf_int(env,oly_e1,"), "{body}");
    assert!(body.contains("call_leaf_int(env,oly_e2,"), "{body}");
    assert!(body.contains("call_direct_int(env,oly_e3,"), "{body}");
    assert!(!body.contains("call_leaf_int(env,oly_e3,"), "{body}");
}
