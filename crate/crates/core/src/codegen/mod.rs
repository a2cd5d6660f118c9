//! C99 emission targeting the `oly_rt.h` abstract machine.
//!
//! A program becomes one resident translation unit (bootstrap, resident
//! functions, dynamic-function table) plus one translation unit per
//! dynamically loaded top-level function. Dynamic units reach every runtime
//! service through the frame context and materialise constants from
//! immediates, so their `.text` is position independent and relocation free.

mod emit;
mod symtab;

pub use symtab::{DynSymbol, DynSymbolTable, SymtabError};

use crate::frontend::Span;
use crate::semant::{DispatchMode, DispatchPlan, FuncId, ProgramAnalysis};
use thiserror::Error;

pub const DEFAULT_FRAME_BYTES: usize = 1 << 20;
pub const DEFAULT_HEAP_BYTES: usize = 4 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodegenConfig {
    /// Base name for emitted files.
    pub kernel: String,
    pub mode: DispatchMode,
    /// Display size; must cover the program's nesting depth.
    pub max_lex_levels: Option<usize>,
    pub frame_bytes: usize,
    pub heap_bytes: usize,
}

impl Default for CodegenConfig {
    fn default() -> Self {
        CodegenConfig {
            kernel: "kernel".into(),
            mode: DispatchMode::Auto,
            max_lex_levels: None,
            frame_bytes: DEFAULT_FRAME_BYTES,
            heap_bytes: DEFAULT_HEAP_BYTES,
        }
    }
}

impl CodegenConfig {
    pub fn new(kernel: impl Into<String>, mode: DispatchMode) -> Self {
        CodegenConfig { kernel: kernel.into(), mode, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodegenError {
    #[error("InsufficientLexLevelsError: program needs {required} display levels, {configured} configured")]
    InsufficientLexLevels { required: usize, configured: usize },
    #[error("analysis incomplete: run semant::analyze before code generation")]
    NotAnalyzed,
    #[error("invalid kernel name `{0}` (expected [A-Za-z_][A-Za-z0-9_]*)")]
    InvalidKernelName(String),
    #[error("{span}: UnsupportedFeatureError: {message}")]
    Unsupported { message: String, span: Span },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitKind {
    Resident,
    /// Loadable unit whose exported entry is the given function.
    Dynamic {
        function: FuncId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationUnit {
    pub file_name: String,
    pub body: String,
    pub kind: UnitKind,
}

impl TranslationUnit {
    /// Object file the unit compiles to.
    pub fn object_name(&self) -> String {
        let stem = self.file_name.strip_suffix(".c").unwrap_or(&self.file_name);
        format!("{stem}.o")
    }
}

#[derive(Debug, Clone)]
pub struct CompiledProgram {
    pub kernel: String,
    pub plan: DispatchPlan,
    pub max_lex_levels: usize,
    pub resident: TranslationUnit,
    pub dynamic: Vec<TranslationUnit>,
    pub symtab: DynSymbolTable,
}

impl CompiledProgram {
    pub fn units(&self) -> impl Iterator<Item = &TranslationUnit> {
        std::iter::once(&self.resident).chain(self.dynamic.iter())
    }

    pub fn symtab_file_name(&self) -> String {
        format!("{}.symtab", self.kernel)
    }
}

/// Generate every translation unit and the dynamic symbol table.
pub fn generate(a: &ProgramAnalysis, cfg: &CodegenConfig) -> Result<CompiledProgram, CodegenError> {
    if !a.inferred {
        return Err(CodegenError::NotAnalyzed);
    }
    let valid_name = {
        let mut chars = cfg.kernel.chars();
        matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_') && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    };
    if !valid_name {
        return Err(CodegenError::InvalidKernelName(cfg.kernel.clone()));
    }
    let required = a.max_lex_levels;
    let max_lex_levels = match cfg.max_lex_levels {
        Some(n) if n < required => return Err(CodegenError::InsufficientLexLevels { required, configured: n }),
        Some(n) => n,
        None => required,
    };
    let plan = DispatchPlan::new(a, cfg.mode);
    let resident = emit::resident_unit(a, &plan, cfg, max_lex_levels)?;
    let mut dynamic = Vec::new();
    let mut symtab = DynSymbolTable::default();
    for &root in &plan.dynamic_roots {
        let unit = emit::dynamic_unit(a, &plan, cfg, root)?;
        let f = &a.functions[root];
        symtab.entries.push(DynSymbol {
            source_name: f.name.clone(),
            mangled: f.mangled.clone(),
            object_file: unit.object_name(),
            argc: f.arg_count,
            defer: f.is_deferred,
        });
        dynamic.push(unit);
    }
    Ok(CompiledProgram { kernel: cfg.kernel.clone(), plan, max_lex_levels, resident, dynamic, symtab })
}
