use microdyn_core::{compile_source, CodegenConfig, DispatchMode, SourceProgram};
use std::path::PathBuf;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Every `...`-separated chunk of the expected file must appear, modulo
/// whitespace, in the emitted C.
fn check_listing(n: usize) {
    let src = SourceProgram::from_file(&corpus(&format!("listings/listing{n}.py"))).unwrap();
    let program = compile_source(&src, &CodegenConfig::new(format!("listing{n}"), DispatchMode::Auto)).unwrap();
    let emitted: String = program.units().map(|u| u.body.as_str()).collect::<Vec<_>>().join("\n");
    let flat = squash(&emitted);
    let expected = std::fs::read_to_string(corpus(&format!("listings/listing{n}.expected"))).unwrap();
    for chunk in expected.split("\n...\n") {
        assert!(flat.contains(&squash(chunk)), "listing {n}: missing\n{chunk}\nin\n{emitted}");
    }
}

#[test]
fn listing1_variable_access() {
    check_listing(1);
}

#[test]
fn listing2_generated_function() {
    check_listing(2);
}

#[test]
fn listing3_function_declaration() {
    check_listing(3);
}

#[test]
fn listing4_loaded_declaration() {
    check_listing(4);
}

#[test]
fn listing5_deferred_declaration() {
    check_listing(5);
}
