use super::source::Span;

pub type NodeId = u32;

#[derive(Debug, Clone)]
pub struct Module {
    pub id: NodeId,
    pub span: Span,
    /// Whether the program carried `from epython import dynamic`.
    pub imports_dynamic: bool,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone)]
pub struct Ident {
    pub id: NodeId,
    pub span: Span,
    pub name: String,
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub id: NodeId,
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Debug, Clone)]
pub enum StmtKind {
    FunctionDef(FunctionDef),
    Assign { target: Target, value: Expr },
    AugAssign { target: Target, op: BinOp, value: Expr },
    Return(Option<Expr>),
    If { test: Expr, body: Vec<Stmt>, orelse: Vec<Stmt> },
    While { test: Expr, body: Vec<Stmt> },
    For { var: Ident, range: RangeSpec, body: Vec<Stmt> },
    Expr(Expr),
    Global(Vec<Ident>),
    Nonlocal(Vec<Ident>),
    Delete(Ident),
    Pass,
    Break,
    Continue,
}

#[derive(Debug, Clone)]
pub struct FunctionDef {
    pub name: Ident,
    pub params: Vec<Ident>,
    pub decorator: Option<Decorator>,
    pub body: Vec<Stmt>,
}

impl FunctionDef {
    pub fn is_dynamic(&self) -> bool {
        self.decorator.is_some()
    }

    pub fn is_deferred(&self) -> bool {
        self.decorator.as_ref().is_some_and(|d| d.defer)
    }
}

/// `@dynamic` or `@dynamic(defer=True|False)`.
#[derive(Debug, Clone)]
pub struct Decorator {
    pub span: Span,
    pub defer: bool,
}

/// `range(stop)`, `range(start, stop)` or `range(start, stop, step)` with a
/// nonzero constant step.
#[derive(Debug, Clone)]
pub struct RangeSpec {
    pub start: Option<Expr>,
    pub stop: Expr,
    pub step: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComplexField {
    Real,
    Imag,
}

impl ComplexField {
    pub fn as_str(self) -> &'static str {
        match self {
            ComplexField::Real => "real",
            ComplexField::Imag => "imag",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Target {
    Name(Ident),
    Index { base: Expr, index: Expr },
    Field { base: Ident, field: ComplexField },
}

impl Target {
    pub fn span(&self) -> Span {
        match self {
            Target::Name(id) => id.span,
            Target::Index { base, index } => base.span.to(index.span),
            Target::Field { base, .. } => base.span,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub id: NodeId,
    pub span: Span,
    pub kind: ExprKind,
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Name(String),
    Int(i64),
    Real(f64),
    Str(String),
    List(Vec<Expr>),
    Call { func: Ident, args: Vec<Expr> },
    BinOp { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Unary { op: UnaryOp, operand: Box<Expr> },
    Compare { op: CmpOp, lhs: Box<Expr>, rhs: Box<Expr> },
    BoolOp { op: BoolOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Index { base: Box<Expr>, index: Box<Expr> },
    Field { base: Box<Expr>, field: ComplexField },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    FloorDiv,
    Mod,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::FloorDiv => "//",
            BinOp::Mod => "%",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Pos,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoolOp {
    And,
    Or,
}

impl Expr {
    /// Direct children in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Name(_) | ExprKind::Int(_) | ExprKind::Real(_) | ExprKind::Str(_) => vec![],
            ExprKind::List(items) => items.iter().collect(),
            ExprKind::Call { args, .. } => args.iter().collect(),
            ExprKind::BinOp { lhs, rhs, .. } | ExprKind::Compare { lhs, rhs, .. } | ExprKind::BoolOp { lhs, rhs, .. } => {
                vec![lhs, rhs]
            }
            ExprKind::Unary { operand, .. } => vec![operand],
            ExprKind::Index { base, index } => vec![base, index],
            ExprKind::Field { base, .. } => vec![base],
        }
    }

    /// Visit this expression and all sub-expressions, parents first.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn contains_call(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e.kind, ExprKind::Call { .. }));
        found
    }
}

/// Visit every statement in a body, descending into nested blocks but not
/// into nested function bodies.
pub fn walk_block<'a>(body: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt)) {
    for s in body {
        f(s);
        match &s.kind {
            StmtKind::If { body, orelse, .. } => {
                walk_block(body, f);
                walk_block(orelse, f);
            }
            StmtKind::While { body, .. } | StmtKind::For { body, .. } => walk_block(body, f),
            _ => {}
        }
    }
}

impl Stmt {
    /// Expressions appearing directly in this statement (not in nested blocks).
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Assign { target, value } | StmtKind::AugAssign { target, value, .. } => {
                let mut v = target_exprs(target);
                v.push(value);
                v
            }
            StmtKind::Return(Some(e)) | StmtKind::Expr(e) => vec![e],
            StmtKind::If { test, .. } | StmtKind::While { test, .. } => vec![test],
            StmtKind::For { range, .. } => {
                let mut v: Vec<&Expr> = range.start.iter().collect();
                v.push(&range.stop);
                v
            }
            _ => vec![],
        }
    }
}

fn target_exprs(t: &Target) -> Vec<&Expr> {
    match t {
        Target::Name(_) | Target::Field { .. } => vec![],
        Target::Index { base, index } => vec![base, index],
    }
}
