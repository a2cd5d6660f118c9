//! Scope resolution, kind inference, dispatch classification and the
//! resident/dynamic partition.

mod dispatch;
mod dump;
mod error;
mod kinds;
mod scopes;
mod types;

pub use dispatch::{classify_dispatch, display_leaf, partition_dynamic, recursive_functions, static_eligible, DispatchMode, DispatchPlan};
pub use dump::dump_symbols;
pub use error::SemantError;
pub use kinds::infer_kinds;
pub use scopes::resolve_scopes;
pub use types::*;

use crate::frontend::Module;

/// Run every analysis pass over a parsed module.
pub fn analyze(module: Module) -> Result<ProgramAnalysis, SemantError> {
    let mut a = resolve_scopes(module)?;
    infer_kinds(&mut a)?;
    a.recursive = recursive_functions(&a);
    a.dispatch = (0..a.functions.len()).map(|f| classify_dispatch(f, &a)).collect();
    a.partition = partition_dynamic(&a)?;
    Ok(a)
}

/// Levels the display must hold: one per nesting depth including the module.
pub fn compute_max_lex_levels(a: &ProgramAnalysis) -> usize {
    a.scopes.iter().map(|s| s.depth).max().unwrap_or(0) + 1
}

impl ProgramAnalysis {
    /// Statements of a function body, or of the module when `f` is `None`.
    pub fn body(&self, f: Option<FuncId>) -> &[crate::frontend::Stmt] {
        match f {
            None => &self.module.body,
            Some(f) => scopes::find_def(&self.module.body, self.functions[f].def_stmt).map(|d| d.body.as_slice()).unwrap_or(&[]),
        }
    }
}
