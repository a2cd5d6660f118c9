//! MiniPy to C99 compiler targeting a frame/display abstract machine, with
//! an ELF object parser, a host loader and monitor, and a reference
//! interpreter.

pub mod codegen;
pub mod elf;
pub mod frontend;
pub mod host;
pub mod numfmt;
pub mod refinterp;
pub mod semant;

pub use codegen::{generate, CodegenConfig, CodegenError, CompiledProgram, DynSymbolTable, TranslationUnit};
pub use frontend::{FrontendError, SourceProgram};
pub use semant::{analyze, DispatchMode, ProgramAnalysis, SemantError};

use thiserror::Error;

/// Any failure between source text and emitted C.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Semant(#[from] SemantError),
    #[error(transparent)]
    Codegen(#[from] CodegenError),
}

/// Parse and analyse a program.
pub fn analyze_source(src: &SourceProgram) -> Result<ProgramAnalysis, CompileError> {
    Ok(analyze(frontend::parse_source(src)?)?)
}

/// Parse, analyse and emit C for a program.
pub fn compile_source(src: &SourceProgram, cfg: &CodegenConfig) -> Result<CompiledProgram, CompileError> {
    Ok(generate(&analyze_source(src)?, cfg)?)
}

/// In-memory convenience wrapper around [`compile_source`].
pub fn compile_str(text: &str, cfg: &CodegenConfig) -> Result<CompiledProgram, CompileError> {
    compile_source(&SourceProgram::new("<input>", text), cfg)
}
