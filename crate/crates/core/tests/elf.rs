mod common;

use microdyn_core::elf::{self, ElfError, EM_AARCH64, HOST_MACHINE};
use microdyn_core::host::{build_kernel, ToolchainProfile};
use microdyn_core::{compile_str, CodegenConfig, DispatchMode};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

const HANDWRITTEN: &str = "extern int ext(int);\n\
static int sq(int x) { return x * x; }\n\
int poly(int x) { return sq(x) + 3 * x + 1; }\n\
int calls_out(int x) { return ext(x) + 1; }\n\
double mix(double a, long b) { return a * (double)b - a; }\n\
int table[4] = {1, 2, 3, 4};\n";

fn tool(cmd: &str, args: &[&str]) -> String {
    let out = Command::new(cmd).args(args).output().unwrap_or_else(|e| panic!("{cmd}: {e}"));
    assert!(out.status.success(), "{cmd} {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Relocatable objects from the corpus plus a hand-written one.
fn objects(dir: &Path) -> Vec<PathBuf> {
    let tc = ToolchainProfile::default();
    let mut objs = Vec::new();
    for name in ["listing1", "listing6"] {
        let p = compile_str(&common::read_corpus(&format!("listings/{name}.py")), &CodegenConfig::new(name, DispatchMode::Load)).unwrap();
        let k = build_kernel(&p, &dir.join(name), &tc).unwrap();
        objs.extend(k.dynamic_objects.iter().map(|o| o.path.clone()));
        objs.push(k.dir.join("oly_rt.o"));
    }
    for name in ["fib_rec", "matmul", "nested_dynamic"] {
        let p = compile_str(&common::read_corpus(&format!("programs/{name}.py")), &CodegenConfig::new(name, DispatchMode::Load)).unwrap();
        let k = build_kernel(&p, &dir.join(name), &tc).unwrap();
        objs.extend(k.dynamic_objects.iter().map(|o| o.path.clone()));
    }
    let c = dir.join("hand.c");
    std::fs::write(&c, HANDWRITTEN).unwrap();
    for (flags, out) in [("-O2", "hand_o2.o"), ("-O0", "hand_o0.o")] {
        tool("gcc", &[flags, "-fno-pic", "-c", c.to_str().unwrap(), "-o", dir.join(out).to_str().unwrap()]);
        objs.push(dir.join(out));
    }
    objs
}

/// `nm -S` view: defined text symbols with value and size.
fn nm_functions(obj: &Path) -> BTreeMap<String, (u64, u64)> {
    tool("nm", &["-S", "--defined-only", obj.to_str().unwrap()])
        .lines()
        .filter_map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f.len() == 4 && matches!(f[2], "T" | "t"))
                .then(|| (f[3].to_string(), (u64::from_str_radix(f[0], 16).unwrap(), u64::from_str_radix(f[1], 16).unwrap())))
        })
        .collect()
}

/// `readelf -S` view: section name to size.
fn readelf_sections(obj: &Path) -> BTreeMap<String, u64> {
    tool("readelf", &["-S", "-W", obj.to_str().unwrap()])
        .lines()
        .filter_map(|l| {
            let l = l.trim_start();
            let rest = l.strip_prefix('[')?.split_once(']')?.1;
            let f: Vec<&str> = rest.split_whitespace().collect();
            if f.len() < 6 || f[0].is_empty() {
                return None;
            }
            Some((f[0].to_string(), u64::from_str_radix(f[4], 16).ok()?))
        })
        .collect()
}

fn section_bytes(obj: &Path, section: &str, dir: &Path) -> Vec<u8> {
    let out = dir.join("section.bin");
    tool("objcopy", &["-O", "binary", &format!("--only-section={section}"), obj.to_str().unwrap(), out.to_str().unwrap()]);
    std::fs::read(out).unwrap()
}

#[test]
fn function_symbols_match_binutils() {
    let dir = tempfile::tempdir().unwrap();
    let objs = objects(dir.path());
    assert!(objs.len() >= 10, "{} objects", objs.len());
    let mut functions = 0;
    for obj in &objs {
        let bytes = std::fs::read(obj).unwrap();
        let img = elf::parse(&bytes).unwrap();
        assert_eq!(img.machine, HOST_MACHINE);
        let ours: BTreeMap<String, (u64, u64)> = img.function_symbols().map(|s| (s.name.clone(), (s.value, s.size))).collect();
        assert_eq!(ours, nm_functions(obj), "{}", obj.display());
        let sections = readelf_sections(obj);
        for s in img.sections.iter().filter(|s| !s.name.is_empty()) {
            assert_eq!(sections.get(&s.name), Some(&s.size), "{} section {}", obj.display(), s.name);
        }
        for sym in img.function_symbols() {
            let sec = &img.sections[sym.shndx as usize];
            let whole = section_bytes(obj, &sec.name, dir.path());
            let want = &whole[sym.value as usize..(sym.value + sym.size) as usize];
            match img.extract_function(&sym.name, HOST_MACHINE) {
                Ok(f) => assert_eq!(f.code, want, "{} {}", obj.display(), sym.name),
                Err(ElfError::RelocationUnresolved { .. }) => {}
                Err(e) => panic!("{} {}: {e}", obj.display(), sym.name),
            }
            functions += 1;
        }
    }
    assert!(functions >= 20, "{functions} functions");
}

#[test]
fn dynamic_units_extract_without_relocations() {
    let dir = tempfile::tempdir().unwrap();
    let p = compile_str(&common::read_corpus("programs/nested_dynamic.py"), &CodegenConfig::new("nd", DispatchMode::Load)).unwrap();
    let k = build_kernel(&p, dir.path(), &ToolchainProfile::default()).unwrap();
    for o in &k.dynamic_objects {
        let bytes = std::fs::read(&o.path).unwrap();
        let img = elf::parse(&bytes).unwrap();
        let unit = img.extract_unit(&o.entry, HOST_MACHINE).unwrap();
        let text = section_bytes(&o.path, ".text", dir.path());
        assert_eq!(unit.code, text, "{}", o.source_name);
        assert_eq!(img.allocated_progbits_size(), text.len() as u64, "{} has data beside its code", o.source_name);
    }
}

#[test]
fn external_references_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("hand.c");
    std::fs::write(&c, HANDWRITTEN).unwrap();
    let o = dir.path().join("hand.o");
    tool("gcc", &["-O2", "-fno-pic", "-c", c.to_str().unwrap(), "-o", o.to_str().unwrap()]);
    let bytes = std::fs::read(&o).unwrap();
    let img = elf::parse(&bytes).unwrap();
    match img.extract_function("calls_out", HOST_MACHINE) {
        Err(ElfError::RelocationUnresolved { symbol, .. }) => assert_eq!(symbol, "ext"),
        other => panic!("{other:?}"),
    }
    assert!(img.extract_function("poly", HOST_MACHINE).is_ok());
    assert!(matches!(img.extract_function("nope", HOST_MACHINE), Err(ElfError::SymbolNotFound(_))));
    assert!(matches!(img.extract_function("table", HOST_MACHINE), Err(ElfError::SymbolNotFound(_))));
    assert!(matches!(
        img.extract_function("poly", EM_AARCH64),
        Err(ElfError::MachineMismatch { expected: EM_AARCH64, found: HOST_MACHINE })
    ));
}

#[test]
fn non_objects_are_rejected() {
    assert!(matches!(elf::parse(b"not an elf file at all, clearly"), Err(ElfError::BadMagic)));
    assert!(matches!(elf::parse(b"\x7fEL"), Err(ElfError::TruncatedFile { .. } | ElfError::BadMagic)));
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("m.c");
    std::fs::write(&c, "int main(void) { return 0; }\n").unwrap();
    let exe = dir.path().join("m");
    tool("gcc", &[c.to_str().unwrap(), "-o", exe.to_str().unwrap()]);
    let bytes = std::fs::read(&exe).unwrap();
    assert!(matches!(elf::parse(&bytes), Err(ElfError::NotRelocatable(_))));
    let img = elf::parse_any(&bytes).unwrap();
    assert!(img.allocated_progbits_size() > 0);
}

/// Random corruption never panics and never yields a span outside the file.
#[test]
fn mutated_objects_never_panic() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("hand.c");
    std::fs::write(&c, HANDWRITTEN).unwrap();
    let o = dir.path().join("hand.o");
    tool("gcc", &["-O2", "-fno-pic", "-c", c.to_str().unwrap(), "-o", o.to_str().unwrap()]);
    let original = std::fs::read(&o).unwrap();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut parsed = 0;
    for _ in 0..100_000 {
        let mut bytes = original.clone();
        match rng.gen_range(0..4) {
            0 => {
                let i = rng.gen_range(0..bytes.len());
                bytes[i] ^= 1 << rng.gen_range(0..8);
            }
            1 => {
                for _ in 0..rng.gen_range(1..16) {
                    let i = rng.gen_range(0..bytes.len());
                    bytes[i] = rng.gen();
                }
            }
            2 => bytes.truncate(rng.gen_range(0..bytes.len())),
            _ => {
                let i = rng.gen_range(0..64.min(bytes.len()));
                let w: u64 = rng.gen();
                for (k, b) in w.to_le_bytes().iter().enumerate() {
                    if let Some(slot) = bytes.get_mut(i + k) {
                        *slot = *b;
                    }
                }
            }
        }
        if let Ok(img) = elf::parse(&bytes) {
            parsed += 1;
            for s in &img.sections {
                assert!(s.data.len() as u64 <= bytes.len() as u64);
            }
            for name in ["poly", "calls_out", "mix"] {
                if let Ok(f) = img.extract_function(name, img.machine) {
                    assert_eq!(f.code.len() as u64, f.size);
                }
            }
        }
    }
    assert!(parsed > 0);
}
