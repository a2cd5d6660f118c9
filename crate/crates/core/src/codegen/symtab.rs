use std::fmt::Write;
use thiserror::Error;

/// One loadable function: `sourceName\tmangled\tobjectFile\targc\tdefer`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynSymbol {
    pub source_name: String,
    pub mangled: String,
    pub object_file: String,
    pub argc: usize,
    pub defer: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DynSymbolTable {
    pub entries: Vec<DynSymbol>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymtabError {
    #[error("symbol table line {line}: {message}")]
    Malformed { line: usize, message: String },
}

impl DynSymbolTable {
    pub fn lookup(&self, source_name: &str) -> Option<&DynSymbol> {
        self.entries.iter().find(|e| e.source_name == source_name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", e.source_name, e.mangled, e.object_file, e.argc, u8::from(e.defer));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, SymtabError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: &str| SymtabError::Malformed { line: i + 1, message: message.into() };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 5 {
                return Err(bad("expected 5 tab-separated fields"));
            }
            let argc = fields[3].parse().map_err(|_| bad("argc is not a number"))?;
            let defer = match fields[4] {
                "0" => false,
                "1" => true,
                _ => return Err(bad("defer must be 0 or 1")),
            };
            if fields[..3].iter().any(|f| f.is_empty()) {
                return Err(bad("empty field"));
            }
            entries.push(DynSymbol {
                source_name: fields[0].into(),
                mangled: fields[1].into(),
                object_file: fields[2].into(),
                argc,
                defer,
            });
        }
        Ok(DynSymbolTable { entries })
    }
}
