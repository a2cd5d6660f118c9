use super::types::*;
use std::fmt::Write;

/// Line-oriented symbol table dump: a `# scope` header per scope followed by
/// one `name defLevel offset kind dispatch` record per symbol.
pub fn dump_symbols(a: &ProgramAnalysis) -> String {
    let mut out = String::new();
    for s in &a.scopes {
        let label = match s.function {
            Some(f) => a.functions[f].qualified_name.as_str(),
            None => "<module>",
        };
        let _ = writeln!(out, "# {label}");
        for sym in &s.symbols {
            let dispatch = match sym.function {
                Some(f) => a.dispatch[f].to_string(),
                None => "-".to_string(),
            };
            let _ = writeln!(out, "{} {} {} {} {}", sym.name, sym.def_level, sym.offset, sym.kind().label(), dispatch);
        }
    }
    out
}
