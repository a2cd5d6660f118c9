use super::{runtime, HostError, ToolchainProfile};
use crate::codegen::{CompiledProgram, DynSymbolTable, UnitKind};
use std::path::{Path, PathBuf};
use std::process::Command;

/// Artifacts of one kernel build.
#[derive(Debug, Clone)]
pub struct BuiltKernel {
    pub kernel: String,
    pub dir: PathBuf,
    pub executable: PathBuf,
    /// `(source name, mangled entry, object path)` per loadable function.
    pub dynamic_objects: Vec<DynamicObject>,
    pub symtab: DynSymbolTable,
    pub machine: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicObject {
    pub source_name: String,
    pub entry: String,
    pub path: PathBuf,
}

impl BuiltKernel {
    pub fn object_for(&self, source_name: &str) -> Option<&DynamicObject> {
        self.dynamic_objects.iter().find(|o| o.source_name == source_name)
    }
}

fn write_if_changed(path: &Path, text: &str) -> Result<bool, HostError> {
    if std::fs::read_to_string(path).ok().as_deref() == Some(text) {
        return Ok(false);
    }
    std::fs::write(path, text).map_err(|e| HostError::io(path, e))?;
    Ok(true)
}

fn run_cc(tc: &ToolchainProfile, args: &[String], cwd: &Path) -> Result<(), HostError> {
    let out = Command::new(&tc.cc).args(args).current_dir(cwd).output().map_err(|e| HostError::Toolchain {
        command: format!("{} {}", tc.cc, args.join(" ")),
        status: None,
        diagnostics: e.to_string(),
    })?;
    if !out.status.success() {
        return Err(HostError::Toolchain {
            command: format!("{} {}", tc.cc, args.join(" ")),
            status: out.status.code(),
            diagnostics: String::from_utf8_lossy(&out.stderr).into_owned(),
        });
    }
    Ok(())
}

/// Compile the runtime once per directory and flag set.
fn runtime_object(dir: &Path, tc: &ToolchainProfile) -> Result<PathBuf, HostError> {
    let header_changed = write_if_changed(&dir.join(runtime::HEADER_NAME), runtime::HEADER)?;
    let source_changed = write_if_changed(&dir.join(runtime::SOURCE_NAME), runtime::SOURCE)?;
    let stamp = format!("{} {}\n", tc.cc, tc.resident_flags.join(" "));
    let stamp_changed = write_if_changed(&dir.join("oly_rt.stamp"), &stamp)?;
    let obj = dir.join("oly_rt.o");
    if header_changed || source_changed || stamp_changed || !obj.exists() {
        let mut args = tc.resident_flags.clone();
        args.extend(["-c".into(), runtime::SOURCE_NAME.into(), "-o".into(), "oly_rt.o".into()]);
        if let Err(e) = run_cc(tc, &args, dir) {
            let _ = std::fs::remove_file(dir.join("oly_rt.stamp"));
            return Err(e);
        }
    }
    Ok(obj)
}

/// Compile and link the resident unit with the runtime, compile each
/// dynamic unit to a relocatable object, and write the symbol table.
pub fn build_kernel(program: &CompiledProgram, dir: &Path, tc: &ToolchainProfile) -> Result<BuiltKernel, HostError> {
    std::fs::create_dir_all(dir).map_err(|e| HostError::io(dir, e))?;
    let dir = dir.canonicalize().map_err(|e| HostError::io(dir, e))?;
    runtime_object(&dir, tc)?;

    let resident = &program.resident;
    write_if_changed(&dir.join(&resident.file_name), &resident.body)?;
    let exe_name = program.kernel.clone();
    let mut args = tc.resident_flags.clone();
    args.extend(["-I".into(), ".".into(), resident.file_name.clone(), "oly_rt.o".into(), "-o".into(), exe_name.clone()]);
    args.extend(tc.link_flags.iter().cloned());
    run_cc(tc, &args, &dir)?;

    let mut dynamic_objects = Vec::new();
    for unit in &program.dynamic {
        let UnitKind::Dynamic { function } = unit.kind else { continue };
        write_if_changed(&dir.join(&unit.file_name), &unit.body)?;
        let obj = unit.object_name();
        let mut args = tc.dynamic_flags.clone();
        args.extend(["-I".into(), ".".into(), "-c".into(), unit.file_name.clone(), "-o".into(), obj.clone()]);
        run_cc(tc, &args, &dir)?;
        let entry = program.symtab.entries.iter().find(|e| e.object_file == obj);
        let source_name = entry.map(|e| e.source_name.clone()).unwrap_or_else(|| format!("#{function}"));
        let mangled = entry.map(|e| e.mangled.clone()).unwrap_or_default();
        dynamic_objects.push(DynamicObject { source_name, entry: mangled, path: dir.join(obj) });
    }
    let symtab_path = dir.join(program.symtab_file_name());
    write_if_changed(&symtab_path, &program.symtab.to_text())?;
    Ok(BuiltKernel {
        kernel: program.kernel.clone(),
        executable: dir.join(exe_name),
        dir,
        dynamic_objects,
        symtab: program.symtab.clone(),
        machine: tc.machine,
    })
}

/// Build a hand-written C kernel against the runtime so that it speaks the
/// same channel protocol and is timed the same way as generated kernels.
/// `defines` become `-D` flags.
pub fn build_native(
    source: &str,
    name: &str,
    dir: &Path,
    tc: &ToolchainProfile,
    defines: &[(String, String)],
) -> Result<BuiltKernel, HostError> {
    std::fs::create_dir_all(dir).map_err(|e| HostError::io(dir, e))?;
    let dir = dir.canonicalize().map_err(|e| HostError::io(dir, e))?;
    runtime_object(&dir, tc)?;
    let file = format!("{name}.c");
    write_if_changed(&dir.join(&file), source)?;
    let mut args = tc.resident_flags.clone();
    args.extend(defines.iter().map(|(k, v)| format!("-D{k}={v}")));
    args.extend(["-I".into(), ".".into(), file, "oly_rt.o".into(), "-o".into(), name.into()]);
    args.extend(tc.link_flags.iter().cloned());
    run_cc(tc, &args, &dir)?;
    Ok(BuiltKernel {
        kernel: name.into(),
        executable: dir.join(name),
        dir,
        dynamic_objects: Vec::new(),
        symtab: DynSymbolTable::default(),
        machine: tc.machine,
    })
}
