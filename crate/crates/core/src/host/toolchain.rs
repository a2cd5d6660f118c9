use super::HostError;
use crate::elf::HOST_MACHINE;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Flags for dynamically loaded units: size-optimised, position independent,
/// and free of anything that would need relocation or read-only data.
pub const DYNAMIC_FLAGS: &[&str] = &[
    "-std=c99",
    "-Os",
    "-fPIC",
    "-fwrapv",
    "-fno-stack-protector",
    "-fno-jump-tables",
    "-fno-tree-loop-distribute-patterns",
    "-fno-builtin",
    "-fno-asynchronous-unwind-tables",
    "-fno-toplevel-reorder",
    "-fno-reorder-blocks-and-partition",
    "-fcf-protection=none",
    "-DOLY_DYNAMIC_UNIT",
];

pub const RESIDENT_FLAGS: &[&str] = &["-std=c99", "-O3", "-fwrapv", "-fno-stack-protector"];

/// How to drive the external C compiler.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolchainProfile {
    pub cc: String,
    pub resident_flags: Vec<String>,
    pub dynamic_flags: Vec<String>,
    pub link_flags: Vec<String>,
    /// ELF machine tag dynamic objects must carry.
    pub machine: u16,
    /// Build directory used when the caller does not pick one.
    pub workdir: Option<PathBuf>,
}

impl Default for ToolchainProfile {
    fn default() -> Self {
        let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        ToolchainProfile {
            cc: "gcc".into(),
            resident_flags: own(RESIDENT_FLAGS),
            dynamic_flags: own(DYNAMIC_FLAGS),
            link_flags: vec![],
            machine: HOST_MACHINE,
            workdir: None,
        }
    }
}

impl ToolchainProfile {
    pub fn from_toml_str(text: &str) -> Result<Self, HostError> {
        toml::from_str(text).map_err(|e| HostError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, HostError> {
        let text = std::fs::read_to_string(path).map_err(|e| HostError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Apply `MICRODYN_CC` and `MICRODYN_WORKDIR`.
    pub fn with_env_overrides(mut self) -> Self {
        if let Some(cc) = std::env::var_os("MICRODYN_CC").filter(|v| !v.is_empty()) {
            self.cc = cc.to_string_lossy().into_owned();
        }
        if let Some(dir) = std::env::var_os("MICRODYN_WORKDIR").filter(|v| !v.is_empty()) {
            self.workdir = Some(PathBuf::from(dir));
        }
        self
    }

    /// Defaults, then the optional TOML file, then the environment.
    pub fn load(path: Option<&Path>) -> Result<Self, HostError> {
        let base = match path {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        Ok(base.with_env_overrides())
    }
}
