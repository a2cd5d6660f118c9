use super::error::SemantError;
use super::types::*;
use crate::frontend::{walk_block, ExprKind, StmtKind};
use std::fmt;
use std::str::FromStr;

/// Functions that lie on a call-graph cycle, found with Tarjan's algorithm.
pub fn recursive_functions(a: &ProgramAnalysis) -> Vec<bool> {
    let n = a.functions.len();
    let succ: Vec<Vec<FuncId>> = (0..n).map(|f| a.calls.get(&Some(f)).cloned().unwrap_or_default()).collect();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut out = vec![false; n];

    // Iterative Tarjan: frames of (node, next successor position).
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work = vec![(root, 0usize)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = work.last_mut() {
            if *pos < succ[v].len() {
                let w = succ[v][*pos];
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(u, _)) = work.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut members = Vec::new();
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        members.push(w);
                        if w == v {
                            break;
                        }
                    }
                    let cyclic = members.len() > 1 || succ[v].contains(&v);
                    for m in members {
                        out[m] = cyclic;
                    }
                }
            }
        }
    }
    out
}

/// Static-simplicity predicate, ignoring any `@dynamic` flag: no locals
/// beyond arguments, not recursive, and no references to enclosing
/// function scopes.
pub fn static_eligible(a: &ProgramAnalysis, f: FuncId) -> bool {
    let info = &a.functions[f];
    let scope = &a.scopes[info.scope];
    if scope.symbols.len() != info.arg_count || a.recursive[f] {
        return false;
    }
    !a.slots.values().any(|r| r.use_scope == info.scope && r.scope != info.scope && r.scope != MODULE_SCOPE)
}

/// Whether `f` can run against a private copy of the display: its body
/// performs no call other than `print`, `len` and `complex`, deletes
/// nothing and defines nothing, so no code that reads the shared display
/// runs while it is active.
pub fn display_leaf(a: &ProgramAnalysis, f: FuncId) -> bool {
    let mut leaf = true;
    walk_block(a.body(Some(f)), &mut |s| {
        if matches!(s.kind, StmtKind::Delete(_) | StmtKind::FunctionDef(_)) {
            leaf = false;
        }
        for e in s.exprs() {
            e.walk(&mut |e| {
                if let ExprKind::Call { func, .. } = &e.kind {
                    leaf &= matches!(func.name.as_str(), "print" | "len" | "complex");
                }
            });
        }
    });
    leaf
}

pub fn classify_dispatch(f: FuncId, a: &ProgramAnalysis) -> DispatchClass {
    if a.functions[f].is_dynamic {
        DispatchClass::DynamicLoad
    } else if static_eligible(a, f) {
        DispatchClass::StaticDispatch
    } else {
        DispatchClass::DynamicDispatch
    }
}

/// Split functions into the resident binary and dynamically loaded units.
/// Nested functions travel with their outermost enclosing function.
pub fn partition_dynamic(a: &ProgramAnalysis) -> Result<DynamicPartition, SemantError> {
    let mut p = DynamicPartition::default();
    for f in &a.functions {
        if f.is_dynamic {
            if f.depth >= 2 {
                return Err(SemantError::NestedDynamic { name: f.qualified_name.clone(), span: f.span });
            }
            if !f.top_level {
                return Err(SemantError::NonTopLevelDynamic { name: f.qualified_name.clone(), span: f.span });
            }
            p.dynamic.push(f.id);
        } else if !a.functions[f.root].is_dynamic {
            p.resident.push(f.id);
        }
    }
    Ok(p)
}

/// Dispatch policy requested by the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DispatchMode {
    /// Follow the per-function classification.
    #[default]
    Auto,
    /// Static dispatch wherever the predicate holds, dynamic dispatch
    /// elsewhere; `@dynamic` is ignored.
    Static,
    /// Every call goes through a proc value; everything is resident.
    Dynamic,
    /// Every top-level function is loaded from the host.
    Load,
}

impl DispatchMode {
    pub const ALL: [DispatchMode; 4] = [DispatchMode::Auto, DispatchMode::Static, DispatchMode::Dynamic, DispatchMode::Load];

    pub fn as_str(self) -> &'static str {
        match self {
            DispatchMode::Auto => "auto",
            DispatchMode::Static => "static",
            DispatchMode::Dynamic => "dynamic",
            DispatchMode::Load => "load",
        }
    }
}

impl fmt::Display for DispatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DispatchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(DispatchMode::Auto),
            "static" => Ok(DispatchMode::Static),
            "dynamic" => Ok(DispatchMode::Dynamic),
            "load" => Ok(DispatchMode::Load),
            other => Err(format!("unknown dispatch mode `{other}` (expected static, dynamic, load or auto)")),
        }
    }
}

/// Effective per-function dispatch after applying a [`DispatchMode`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DispatchPlan {
    pub mode: DispatchMode,
    pub class: Vec<DispatchClass>,
    /// Top-level functions emitted as separate loadable units.
    pub dynamic_roots: Vec<FuncId>,
    /// Loadable unit holding each function, `None` for the resident unit.
    pub unit_of: Vec<Option<FuncId>>,
}

impl DispatchPlan {
    pub fn new(a: &ProgramAnalysis, mode: DispatchMode) -> Self {
        let n = a.functions.len();
        let (class, dynamic_roots): (Vec<DispatchClass>, Vec<FuncId>) = match mode {
            DispatchMode::Auto => (a.dispatch.clone(), a.partition.dynamic.clone()),
            DispatchMode::Static => (
                (0..n)
                    .map(|f| if static_eligible(a, f) { DispatchClass::StaticDispatch } else { DispatchClass::DynamicDispatch })
                    .collect(),
                vec![],
            ),
            DispatchMode::Dynamic => (vec![DispatchClass::DynamicDispatch; n], vec![]),
            DispatchMode::Load => {
                let roots: Vec<FuncId> = a.functions.iter().filter(|f| f.top_level).map(|f| f.id).collect();
                let class = a
                    .functions
                    .iter()
                    .map(|f| if f.top_level { DispatchClass::DynamicLoad } else { DispatchClass::DynamicDispatch })
                    .collect();
                (class, roots)
            }
        };
        let unit_of = a.functions.iter().map(|f| dynamic_roots.contains(&f.root).then_some(f.root)).collect();
        DispatchPlan { mode, class, dynamic_roots, unit_of }
    }

    pub fn is_loaded(&self, f: FuncId) -> bool {
        self.dynamic_roots.contains(&f)
    }
}
