use crate::frontend::{Module, NodeId, Span};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

pub type FuncId = usize;
pub type ScopeId = usize;

/// Element kind of a one-dimensional vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElemKind {
    Int,
    Real,
}

/// Slot kind of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Int,
    Real,
    Complex,
    Vector(ElemKind),
    Proc(FuncId),
    Object,
}

impl Kind {
    /// Accessor suffix used by the runtime macros (`lookup_<suffix>`).
    pub fn accessor(self) -> &'static str {
        match self {
            Kind::Int => "int",
            Kind::Real => "real",
            Kind::Complex => "complex",
            Kind::Vector(_) => "vector",
            Kind::Proc(_) => "proc",
            Kind::Object => "object",
        }
    }

    /// C type spelled by the runtime header.
    pub fn c_type(self) -> &'static str {
        match self {
            Kind::Int => "Int",
            Kind::Real => "Real",
            Kind::Complex => "Complex",
            Kind::Vector(_) => "Vector",
            Kind::Proc(_) => "Proc",
            Kind::Object => "Object",
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, Kind::Int | Kind::Real)
    }

    pub fn is_pointer(self) -> bool {
        matches!(self, Kind::Complex | Kind::Vector(_) | Kind::Proc(_) | Kind::Object)
    }

    /// Name without parameters, as used in dumps and kind traces.
    pub fn label(self) -> String {
        match self {
            Kind::Vector(ElemKind::Int) => "Vector[Int]".into(),
            Kind::Vector(ElemKind::Real) => "Vector[Real]".into(),
            Kind::Proc(_) => "Proc".into(),
            other => format!("{other:?}"),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Type of an expression occurrence: a value kind or one of the
/// context-restricted forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    Val(Kind),
    /// Result of a comparison or boolean connective; only valid as a test.
    Cond,
    /// Result of a call to a function without value returns.
    Unit,
    /// String literal; only valid as a `print` or `load_function` argument.
    Str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolEntry {
    pub name: String,
    /// `None` until kinds are inferred.
    pub kind: Option<Kind>,
    pub def_level: usize,
    pub offset: usize,
    pub is_dynamic: bool,
    pub is_deferred: bool,
    pub is_argument: bool,
    /// Set when the slot is bound by a `def`.
    pub function: Option<FuncId>,
    pub span: Span,
}

impl SymbolEntry {
    pub fn kind(&self) -> Kind {
        self.kind.unwrap_or(Kind::Object)
    }
}

#[derive(Debug, Clone)]
pub struct Scope {
    pub id: ScopeId,
    pub parent: Option<ScopeId>,
    pub depth: usize,
    pub function: Option<FuncId>,
    pub symbols: Vec<SymbolEntry>,
    pub by_name: HashMap<String, usize>,
    pub globals: HashSet<String>,
    pub nonlocals: HashSet<String>,
}

impl Scope {
    pub fn lookup(&self, name: &str) -> Option<&SymbolEntry> {
        self.by_name.get(name).map(|&i| &self.symbols[i])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameLayout {
    pub slot_count: usize,
    pub arg_count: usize,
    pub function_name: String,
}

#[derive(Debug, Clone)]
pub struct FunctionInfo {
    pub id: FuncId,
    pub name: String,
    /// Dotted path from the outermost enclosing function, e.g. `outer.inner`.
    pub qualified_name: String,
    pub mangled: String,
    pub scope: ScopeId,
    pub parent_scope: ScopeId,
    pub depth: usize,
    pub def_stmt: NodeId,
    pub span: Span,
    pub arg_count: usize,
    pub is_dynamic: bool,
    pub is_deferred: bool,
    /// Direct child of the module body.
    pub top_level: bool,
    /// Outermost enclosing function (itself when depth is 1).
    pub root: FuncId,
    /// `None` when no `return` carries a value.
    pub return_kind: Option<Kind>,
    /// Slot in the parent scope bound by the `def`.
    pub binding: (ScopeId, usize),
}

/// Address of a variable occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResolvedRef {
    pub rel_level: usize,
    pub offset: usize,
    pub kind: Kind,
}

/// Internal form of a resolved occurrence before kinds are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SlotRef {
    pub scope: ScopeId,
    pub index: usize,
    pub use_scope: ScopeId,
    pub use_depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DispatchClass {
    StaticDispatch,
    DynamicDispatch,
    DynamicLoad,
}

impl fmt::Display for DispatchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DynamicPartition {
    pub resident: Vec<FuncId>,
    pub dynamic: Vec<FuncId>,
}

#[derive(Debug, Clone)]
pub struct ProgramAnalysis {
    pub module: Module,
    pub scopes: Vec<Scope>,
    pub functions: Vec<FunctionInfo>,
    pub func_by_stmt: HashMap<NodeId, FuncId>,
    /// Every name occurrence (reads, writes, declarations by `def`, loop
    /// variables, parameters) keyed by the node id of the identifier.
    pub slots: HashMap<NodeId, SlotRef>,
    pub types: HashMap<NodeId, Ty>,
    /// Caller (None = module body) to callee edges, by static kind.
    pub calls: BTreeMap<Option<FuncId>, Vec<FuncId>>,
    pub max_lex_levels: usize,
    pub dispatch: Vec<DispatchClass>,
    /// Functions on a call-graph cycle (direct or mutual recursion).
    pub recursive: Vec<bool>,
    pub partition: DynamicPartition,
    /// Slots written anywhere other than their own `def`, or deleted.
    pub rebound: HashSet<(ScopeId, usize)>,
    pub(crate) inferred: bool,
}

pub const MODULE_SCOPE: ScopeId = 0;

impl ProgramAnalysis {
    pub fn symbol(&self, r: SlotRef) -> &SymbolEntry {
        &self.scopes[r.scope].symbols[r.index]
    }

    /// Resolved reference for an identifier node.
    pub fn resolved(&self, id: NodeId) -> Option<ResolvedRef> {
        let r = *self.slots.get(&id)?;
        let scope = &self.scopes[r.scope];
        Some(ResolvedRef { rel_level: r.use_depth - scope.depth, offset: r.index, kind: scope.symbols[r.index].kind() })
    }

    pub fn frame_layout(&self, scope: ScopeId) -> FrameLayout {
        let s = &self.scopes[scope];
        let (name, args) = match s.function {
            Some(f) => (self.functions[f].qualified_name.clone(), self.functions[f].arg_count),
            None => ("<module>".to_string(), 0),
        };
        FrameLayout { slot_count: s.symbols.len(), arg_count: args, function_name: name }
    }

    pub fn function_named(&self, qualified: &str) -> Option<&FunctionInfo> {
        self.functions.iter().find(|f| f.qualified_name == qualified)
    }

    /// Top-level function eligible for `load_function` by source name.
    pub fn top_level_function(&self, name: &str) -> Option<&FunctionInfo> {
        self.functions.iter().find(|f| f.top_level && f.name == name)
    }

    pub fn ty(&self, id: NodeId) -> Option<Ty> {
        self.types.get(&id).copied()
    }

    pub fn kind_of(&self, id: NodeId) -> Option<Kind> {
        match self.types.get(&id) {
            Some(Ty::Val(k)) => Some(*k),
            _ => None,
        }
    }

    /// Whether the static-simplicity predicate holds, ignoring `@dynamic`.
    pub fn static_eligible(&self, f: FuncId) -> bool {
        crate::semant::dispatch::static_eligible(self, f)
    }

    /// Per-scope variable kinds keyed by `(scope label, name)`.
    pub fn kind_table(&self) -> BTreeMap<(String, String), String> {
        let mut out = BTreeMap::new();
        for s in &self.scopes {
            let label = match s.function {
                Some(f) => self.functions[f].qualified_name.clone(),
                None => "<module>".to_string(),
            };
            for sym in &s.symbols {
                out.insert((label.clone(), sym.name.clone()), sym.kind().label());
            }
        }
        out
    }
}
