use super::ast::*;
use super::error::FrontendError;
use super::lexer::{Tok, Token};
use super::source::{Pos, Span};

/// The fixed MiniPy surface profile.
#[derive(Debug, Clone, Copy)]
pub struct GrammarProfile {
    pub statements: &'static [&'static str],
    pub builtins: &'static [&'static str],
    pub numeric_literals: &'static [&'static str],
}

pub const MINIPY: GrammarProfile = GrammarProfile {
    statements: &[
        "def",
        "assign",
        "augassign",
        "return",
        "if",
        "elif",
        "else",
        "while",
        "for-range",
        "expr",
        "global",
        "nonlocal",
        "del",
        "pass",
        "break",
        "continue",
        "from epython import dynamic",
    ],
    builtins: &["print", "len", "load_function", "complex", "range"],
    numeric_literals: &["decimal int", "hex/octal/binary int", "decimal real with optional exponent"],
};

impl GrammarProfile {
    pub fn is_builtin(&self, name: &str) -> bool {
        self.builtins.contains(&name)
    }
}

const REJECTED_KEYWORDS: &[&str] = &[
    "class", "lambda", "try", "except", "finally", "with", "yield", "async", "await", "raise", "assert", "import", "is", "in", "True",
    "False", "None",
];

/// Parse a token stream produced by [`super::tokenize`] into a module.
pub fn parse(tokens: &[Token]) -> Result<Module, FrontendError> {
    match tokens.last() {
        Some(Token { tok: Tok::EndMarker, .. }) => {}
        _ => {
            return Err(FrontendError::Syntax {
                span: tokens.last().map(|t| t.span).unwrap_or_default(),
                expected: vec!["ENDMARKER".into()],
                found: "end of token stream".into(),
            })
        }
    }
    let mut p = Parser { toks: tokens, at: 0, next_id: 1, imports_dynamic: false };
    let mut body = Vec::new();
    while !p.check(&Tok::EndMarker) {
        if p.eat(&Tok::Newline) {
            continue;
        }
        body.extend(p.statement(true)?);
    }
    let end = tokens.last().map(|t| t.span.end).unwrap_or_default();
    let start = Pos::new(1, 1);
    Ok(Module { id: 0, span: Span::new(start, end.max(start)), imports_dynamic: p.imports_dynamic, body })
}

struct Parser<'t> {
    toks: &'t [Token],
    at: usize,
    next_id: NodeId,
    imports_dynamic: bool,
}

type PResult<T> = Result<T, FrontendError>;

impl<'t> Parser<'t> {
    fn id(&mut self) -> NodeId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn peek(&self) -> &'t Token {
        &self.toks[self.at.min(self.toks.len() - 1)]
    }

    fn peek_at(&self, k: usize) -> &'t Token {
        &self.toks[(self.at + k).min(self.toks.len() - 1)]
    }

    fn advance(&mut self) -> &'t Token {
        let t = self.peek();
        if self.at < self.toks.len() - 1 {
            self.at += 1;
        }
        t
    }

    fn check(&self, t: &Tok) -> bool {
        &self.peek().tok == t
    }

    fn check_op(&self, op: &str) -> bool {
        matches!(self.peek().tok, Tok::Op(o) if o == op)
    }

    fn check_name(&self, name: &str) -> bool {
        matches!(&self.peek().tok, Tok::Name(n) if n == name)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.check(t) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.check_op(op) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = self.peek();
        Err(FrontendError::Syntax { span: t.span, expected: expected.iter().map(|s| s.to_string()).collect(), found: t.tok.to_string() })
    }

    fn unsupported<T>(&self, span: Span, feature: impl Into<String>) -> PResult<T> {
        Err(FrontendError::UnsupportedFeature { span, feature: feature.into() })
    }

    fn expect_op(&mut self, op: &str) -> PResult<Span> {
        if self.check_op(op) {
            Ok(self.advance().span)
        } else {
            self.error(&[&format!("'{op}'")])
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<Span> {
        if self.check(&t) {
            Ok(self.advance().span)
        } else {
            self.error(&[what])
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match &self.peek().tok {
            Tok::Name(n) if !is_keyword(n) => {
                let n = n.clone();
                let span = self.advance().span;
                Ok(Ident { id: self.id(), span, name: n })
            }
            _ => self.error(&["identifier"]),
        }
    }

    /// One logical statement. Simple statements separated by `;` expand to
    /// several entries.
    fn statement(&mut self, module_level: bool) -> PResult<Vec<Stmt>> {
        let t = self.peek();
        match &t.tok {
            Tok::Op("@") => Ok(vec![self.decorated()?]),
            Tok::Name(n) => match n.as_str() {
                "def" => Ok(vec![self.funcdef(None, t.span.start)?]),
                "if" => Ok(vec![self.if_stmt()?]),
                "while" => Ok(vec![self.while_stmt()?]),
                "for" => Ok(vec![self.for_stmt()?]),
                "from" => {
                    self.import(module_level)?;
                    Ok(vec![])
                }
                "else" | "elif" => self.error(&["statement"]),
                _ => self.simple_line(),
            },
            Tok::Indent => Err(FrontendError::Indentation { pos: t.span.start, message: "unexpected indent".into() }),
            _ => self.simple_line(),
        }
    }

    fn import(&mut self, module_level: bool) -> PResult<()> {
        let start = self.advance().span;
        let ok = self.check_name("epython")
            && matches!(&self.peek_at(1).tok, Tok::Name(n) if n == "import")
            && matches!(&self.peek_at(2).tok, Tok::Name(n) if n == "dynamic")
            && matches!(self.peek_at(3).tok, Tok::Newline);
        if !ok || !module_level {
            return self.unsupported(start.to(self.peek().span), "imports other than `from epython import dynamic`");
        }
        for _ in 0..4 {
            self.advance();
        }
        self.imports_dynamic = true;
        Ok(())
    }

    fn simple_line(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = vec![self.small_stmt()?];
        while self.eat_op(";") {
            if self.check(&Tok::Newline) {
                break;
            }
            out.push(self.small_stmt()?);
        }
        self.expect(Tok::Newline, "NEWLINE")?;
        Ok(out)
    }

    fn small_stmt(&mut self) -> PResult<Stmt> {
        let t = self.peek();
        let start = t.span;
        if let Tok::Name(n) = &t.tok {
            match n.as_str() {
                "pass" | "break" | "continue" => {
                    self.advance();
                    let kind = match n.as_str() {
                        "pass" => StmtKind::Pass,
                        "break" => StmtKind::Break,
                        _ => StmtKind::Continue,
                    };
                    return Ok(Stmt { id: self.id(), span: start, kind });
                }
                "return" => {
                    self.advance();
                    let value = if self.check(&Tok::Newline) || self.check_op(";") { None } else { Some(self.expr()?) };
                    let span = start.to(value.as_ref().map(|e| e.span).unwrap_or(start));
                    return Ok(Stmt { id: self.id(), span, kind: StmtKind::Return(value) });
                }
                "global" | "nonlocal" => {
                    let is_global = n == "global";
                    self.advance();
                    let mut names = vec![self.ident()?];
                    while self.eat_op(",") {
                        names.push(self.ident()?);
                    }
                    let span = start.to(names.last().map(|i| i.span).unwrap_or(start));
                    let kind = if is_global { StmtKind::Global(names) } else { StmtKind::Nonlocal(names) };
                    return Ok(Stmt { id: self.id(), span, kind });
                }
                "del" => {
                    self.advance();
                    let paren = self.eat_op("(");
                    let name = self.ident()?;
                    let mut end = name.span;
                    if paren {
                        end = self.expect_op(")")?;
                    }
                    if self.check_op(",") || self.check_op("[") || self.check_op(".") {
                        return self.unsupported(self.peek().span, "`del` of anything but a single function name");
                    }
                    return Ok(Stmt { id: self.id(), span: start.to(end), kind: StmtKind::Delete(name) });
                }
                kw if REJECTED_KEYWORDS.contains(&kw) && !matches!(kw, "True" | "False" | "None") => {
                    return self.unsupported(start, format!("`{kw}` statement"));
                }
                _ => {}
            }
        }
        let lhs = self.expr()?;
        if self.check_op(",") {
            return self.unsupported(self.peek().span, "tuple expressions");
        }
        if self.check_op("=") {
            self.advance();
            let target = self.to_target(lhs)?;
            let value = self.expr()?;
            if self.check_op("=") {
                return self.unsupported(self.peek().span, "chained assignment");
            }
            if self.check_op(",") {
                return self.unsupported(self.peek().span, "tuple expressions");
            }
            let span = target.span().to(value.span);
            return Ok(Stmt { id: self.id(), span, kind: StmtKind::Assign { target, value } });
        }
        let aug = match self.peek().tok {
            Tok::Op("+=") => Some(BinOp::Add),
            Tok::Op("-=") => Some(BinOp::Sub),
            Tok::Op("*=") => Some(BinOp::Mul),
            Tok::Op("/=") => Some(BinOp::Div),
            Tok::Op("//=") => Some(BinOp::FloorDiv),
            Tok::Op("%=") => Some(BinOp::Mod),
            Tok::Op(op @ ("**=" | "&=" | "|=" | "^=" | "<<=" | ">>=")) => {
                return self.unsupported(self.peek().span, format!("operator `{op}`"));
            }
            _ => None,
        };
        if let Some(op) = aug {
            self.advance();
            let target = self.to_target(lhs)?;
            let value = self.expr()?;
            let span = target.span().to(value.span);
            return Ok(Stmt { id: self.id(), span, kind: StmtKind::AugAssign { target, op, value } });
        }
        if self.check_op(":") {
            return self.unsupported(self.peek().span, "annotations");
        }
        Ok(Stmt { id: self.id(), span: lhs.span, kind: StmtKind::Expr(lhs) })
    }

    fn to_target(&mut self, e: Expr) -> PResult<Target> {
        match e.kind {
            ExprKind::Name(name) => Ok(Target::Name(Ident { id: e.id, span: e.span, name })),
            ExprKind::Index { base, index } => Ok(Target::Index { base: *base, index: *index }),
            ExprKind::Field { base, field } => match base.kind {
                ExprKind::Name(name) => Ok(Target::Field { base: Ident { id: base.id, span: base.span, name }, field }),
                _ => self.unsupported(e.span, "field assignment through a non-name"),
            },
            _ => Err(FrontendError::Syntax { span: e.span, expected: vec!["assignable target".into()], found: "expression".into() }),
        }
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_op(":")?;
        if !self.check(&Tok::Newline) {
            return self.simple_line();
        }
        self.advance();
        if !self.check(&Tok::Indent) {
            return Err(FrontendError::Indentation { pos: self.peek().span.start, message: "expected an indented block".into() });
        }
        self.advance();
        let mut body = Vec::new();
        while !self.check(&Tok::Dedent) && !self.check(&Tok::EndMarker) {
            if self.eat(&Tok::Newline) {
                continue;
            }
            body.extend(self.statement(false)?);
        }
        self.eat(&Tok::Dedent);
        Ok(body)
    }

    fn block_span(start: Span, body: &[Stmt]) -> Span {
        body.iter().fold(start, |s, b| s.to(b.span))
    }

    fn decorated(&mut self) -> PResult<Stmt> {
        let at = self.advance().span;
        let name = self.ident()?;
        if name.name != "dynamic" {
            return self.unsupported(at.to(name.span), format!("decorator `{}`", name.name));
        }
        let mut defer = false;
        let mut end = name.span;
        if self.eat_op("(") {
            let kw = self.ident()?;
            if kw.name != "defer" {
                return self.unsupported(kw.span, format!("decorator keyword `{}`", kw.name));
            }
            self.expect_op("=")?;
            defer = match &self.peek().tok {
                Tok::Name(v) if v == "True" => true,
                Tok::Name(v) if v == "False" => false,
                _ => return self.error(&["True", "False"]),
            };
            self.advance();
            end = self.expect_op(")")?;
        }
        self.expect(Tok::Newline, "NEWLINE")?;
        if self.check_op("@") {
            return self.unsupported(self.peek().span, "multiple decorators");
        }
        if !self.check_name("def") {
            return self.error(&["def"]);
        }
        self.funcdef(Some(Decorator { span: at.to(end), defer }), at.start)
    }

    fn funcdef(&mut self, decorator: Option<Decorator>, start: Pos) -> PResult<Stmt> {
        let def = self.advance().span;
        let name = self.ident()?;
        self.expect_op("(")?;
        let mut params = Vec::new();
        while !self.check_op(")") {
            if self.check_op("*") || self.check_op("**") {
                return self.unsupported(self.peek().span, "variadic parameters");
            }
            let p = self.ident()?;
            if self.check_op("=") {
                return self.unsupported(self.peek().span, "default parameter values");
            }
            if self.check_op(":") {
                return self.unsupported(self.peek().span, "annotations");
            }
            params.push(p);
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(")")?;
        if self.check_op("->") {
            return self.unsupported(self.peek().span, "annotations");
        }
        let body = self.block()?;
        let span = Self::block_span(Span::new(start, def.end), &body);
        let f = FunctionDef { name, params, decorator, body };
        Ok(Stmt { id: self.id(), span, kind: StmtKind::FunctionDef(f) })
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let start = self.advance().span;
        let test = self.expr()?;
        let body = self.block()?;
        let mut span = Self::block_span(start, &body);
        let orelse = if self.check_name("elif") {
            let nested = self.if_stmt()?;
            span = span.to(nested.span);
            vec![nested]
        } else if self.check_name("else") {
            self.advance();
            let b = self.block()?;
            span = Self::block_span(span, &b);
            b
        } else {
            vec![]
        };
        Ok(Stmt { id: self.id(), span, kind: StmtKind::If { test, body, orelse } })
    }

    fn while_stmt(&mut self) -> PResult<Stmt> {
        let start = self.advance().span;
        let test = self.expr()?;
        let body = self.block()?;
        if self.check_name("else") {
            return self.unsupported(self.peek().span, "`else` on loops");
        }
        let span = Self::block_span(start, &body);
        Ok(Stmt { id: self.id(), span, kind: StmtKind::While { test, body } })
    }

    fn for_stmt(&mut self) -> PResult<Stmt> {
        let start = self.advance().span;
        let var = self.ident()?;
        if self.check_op(",") {
            return self.unsupported(self.peek().span, "tuple unpacking");
        }
        if !self.check_name("in") {
            return self.error(&["in"]);
        }
        self.advance();
        let call_start = self.peek().span;
        if !self.check_name("range") || !matches!(self.peek_at(1).tok, Tok::Op("(")) {
            return self.unsupported(call_start, "`for` over anything but range()");
        }
        self.advance();
        self.advance();
        let mut args = Vec::new();
        while !self.check_op(")") {
            args.push(self.expr()?);
            if !self.eat_op(",") {
                break;
            }
        }
        let close = self.expect_op(")")?;
        let mut args = args.into_iter();
        let range = match (args.next(), args.next(), args.next(), args.next()) {
            (Some(stop), None, None, None) => RangeSpec { start: None, stop, step: 1 },
            (Some(a), Some(b), None, None) => RangeSpec { start: Some(a), stop: b, step: 1 },
            (Some(a), Some(b), Some(step), None) => {
                let Some(step) = const_int(&step).filter(|s| *s != 0) else {
                    return self.unsupported(step.span, "range() step must be a nonzero integer constant");
                };
                RangeSpec { start: Some(a), stop: b, step }
            }
            _ => {
                return Err(FrontendError::Syntax {
                    span: call_start.to(close),
                    expected: vec!["1 to 3 range() arguments".into()],
                    found: "other arity".into(),
                })
            }
        };
        let body = self.block()?;
        if self.check_name("else") {
            return self.unsupported(self.peek().span, "`else` on loops");
        }
        let span = Self::block_span(start, &body);
        Ok(Stmt { id: self.id(), span, kind: StmtKind::For { var, range, body } })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let e = self.or_expr()?;
        if self.check_name("if") {
            return self.unsupported(self.peek().span, "conditional expressions");
        }
        Ok(e)
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.check_name("or") {
            self.advance();
            let rhs = self.and_expr()?;
            lhs = self.bool_node(BoolOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while self.check_name("and") {
            self.advance();
            let rhs = self.not_expr()?;
            lhs = self.bool_node(BoolOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn bool_node(&mut self, op: BoolOp, lhs: Expr, rhs: Expr) -> Expr {
        let span = lhs.span.to(rhs.span);
        Expr { id: self.id(), span, kind: ExprKind::BoolOp { op, lhs: Box::new(lhs), rhs: Box::new(rhs) } }
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.check_name("not") {
            let start = self.advance().span;
            let operand = self.not_expr()?;
            let span = start.to(operand.span);
            return Ok(Expr { id: self.id(), span, kind: ExprKind::Unary { op: UnaryOp::Not, operand: Box::new(operand) } });
        }
        self.comparison()
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        match self.peek().tok {
            Tok::Op("<") => Some(CmpOp::Lt),
            Tok::Op("<=") => Some(CmpOp::Le),
            Tok::Op(">") => Some(CmpOp::Gt),
            Tok::Op(">=") => Some(CmpOp::Ge),
            Tok::Op("==") => Some(CmpOp::Eq),
            Tok::Op("!=") => Some(CmpOp::Ne),
            _ => None,
        }
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let lhs = self.arith()?;
        if self.check_name("in")
            || self.check_name("is")
            || (self.check_name("not") && matches!(&self.peek_at(1).tok, Tok::Name(n) if n == "in"))
        {
            return self.unsupported(self.peek().span, "`in`/`is` comparisons");
        }
        let Some(op) = self.cmp_op() else { return Ok(lhs) };
        self.advance();
        let rhs = self.arith()?;
        if self.cmp_op().is_some() {
            return self.unsupported(self.peek().span, "chained comparisons");
        }
        let span = lhs.span.to(rhs.span);
        Ok(Expr { id: self.id(), span, kind: ExprKind::Compare { op, lhs: Box::new(lhs), rhs: Box::new(rhs) } })
    }

    fn arith(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op("+") => BinOp::Add,
                Tok::Op("-") => BinOp::Sub,
                Tok::Op(o @ ("<<" | ">>" | "&" | "|" | "^")) => return self.unsupported(self.peek().span, format!("operator `{o}`")),
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.term()?;
            lhs = self.bin_node(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op("*") => BinOp::Mul,
                Tok::Op("/") => BinOp::Div,
                Tok::Op("//") => BinOp::FloorDiv,
                Tok::Op("%") => BinOp::Mod,
                Tok::Op("@") => return self.unsupported(self.peek().span, "operator `@`"),
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.factor()?;
            lhs = self.bin_node(op, lhs, rhs);
        }
    }

    fn bin_node(&mut self, op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        let span = lhs.span.to(rhs.span);
        Expr { id: self.id(), span, kind: ExprKind::BinOp { op, lhs: Box::new(lhs), rhs: Box::new(rhs) } }
    }

    fn factor(&mut self) -> PResult<Expr> {
        let op = match self.peek().tok {
            Tok::Op("-") => Some(UnaryOp::Neg),
            Tok::Op("+") => Some(UnaryOp::Pos),
            Tok::Op("~") => return self.unsupported(self.peek().span, "operator `~`"),
            _ => None,
        };
        if let Some(op) = op {
            let start = self.advance().span;
            let operand = self.factor()?;
            let span = start.to(operand.span);
            return Ok(Expr { id: self.id(), span, kind: ExprKind::Unary { op, operand: Box::new(operand) } });
        }
        let base = self.postfix()?;
        if self.check_op("**") {
            return self.unsupported(self.peek().span, "operator `**`");
        }
        Ok(base)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        loop {
            if self.check_op("(") {
                let ExprKind::Name(name) = &e.kind else {
                    return self.unsupported(self.peek().span, "calling anything but a name");
                };
                let func = Ident { id: e.id, span: e.span, name: name.clone() };
                self.advance();
                let mut args = Vec::new();
                while !self.check_op(")") {
                    if self.check_op("*") || self.check_op("**") {
                        return self.unsupported(self.peek().span, "argument unpacking");
                    }
                    if matches!(self.peek().tok, Tok::Name(_)) && matches!(self.peek_at(1).tok, Tok::Op("=")) {
                        return self.unsupported(self.peek().span, "keyword arguments");
                    }
                    args.push(self.expr()?);
                    if self.check_name("for") {
                        return self.unsupported(self.peek().span, "generator expressions");
                    }
                    if !self.eat_op(",") {
                        break;
                    }
                }
                let close = self.expect_op(")")?;
                let span = e.span.to(close);
                e = Expr { id: self.id(), span, kind: ExprKind::Call { func, args } };
            } else if self.check_op("[") {
                self.advance();
                if self.check_op(":") {
                    return self.unsupported(self.peek().span, "slices");
                }
                let index = self.expr()?;
                if self.check_op(":") {
                    return self.unsupported(self.peek().span, "slices");
                }
                let close = self.expect_op("]")?;
                let span = e.span.to(close);
                e = Expr { id: self.id(), span, kind: ExprKind::Index { base: Box::new(e), index: Box::new(index) } };
            } else if self.check_op(".") {
                self.advance();
                let field = self.ident()?;
                let f = match field.name.as_str() {
                    "real" => ComplexField::Real,
                    "imag" => ComplexField::Imag,
                    other => return self.unsupported(field.span, format!("attribute `{other}`")),
                };
                let span = e.span.to(field.span);
                e = Expr { id: self.id(), span, kind: ExprKind::Field { base: Box::new(e), field: f } };
            } else {
                return Ok(e);
            }
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        let t = self.peek();
        let span = t.span;
        let kind = match &t.tok {
            Tok::Int(v) => ExprKind::Int(*v),
            Tok::Real(v) => ExprKind::Real(*v),
            Tok::Str(s) => {
                let mut s = s.clone();
                self.advance();
                let mut end = span;
                while let Tok::Str(more) = &self.peek().tok {
                    s.push_str(more);
                    end = self.advance().span;
                }
                return Ok(Expr { id: self.id(), span: span.to(end), kind: ExprKind::Str(s) });
            }
            Tok::Name(n) if REJECTED_KEYWORDS.contains(&n.as_str()) => {
                return self.unsupported(span, format!("`{n}`"));
            }
            Tok::Name(n) if !is_keyword(n) => ExprKind::Name(n.clone()),
            Tok::Op("(") => {
                self.advance();
                if self.check_op(")") {
                    return self.unsupported(span, "tuples");
                }
                let inner = self.expr()?;
                if self.check_op(",") {
                    return self.unsupported(self.peek().span, "tuples");
                }
                if self.check_name("for") {
                    return self.unsupported(self.peek().span, "generator expressions");
                }
                let close = self.expect_op(")")?;
                // Parentheses do not create nodes, but the span widens to cover them.
                return Ok(Expr { span: span.to(close), ..inner });
            }
            Tok::Op("[") => {
                self.advance();
                let mut items = Vec::new();
                while !self.check_op("]") {
                    items.push(self.expr()?);
                    if self.check_name("for") {
                        return self.unsupported(self.peek().span, "list comprehensions");
                    }
                    if !self.eat_op(",") {
                        break;
                    }
                }
                let close = self.expect_op("]")?;
                return Ok(Expr { id: self.id(), span: span.to(close), kind: ExprKind::List(items) });
            }
            Tok::Op("{") => return self.unsupported(span, "dict and set displays"),
            _ => return self.error(&["expression"]),
        };
        self.advance();
        Ok(Expr { id: self.id(), span, kind })
    }
}

fn const_int(e: &Expr) -> Option<i64> {
    match &e.kind {
        ExprKind::Int(v) => Some(*v),
        ExprKind::Unary { op: UnaryOp::Neg, operand } => const_int(operand).and_then(i64::checked_neg),
        ExprKind::Unary { op: UnaryOp::Pos, operand } => const_int(operand),
        _ => None,
    }
}

pub(crate) fn is_keyword(n: &str) -> bool {
    matches!(
        n,
        "def"
            | "return"
            | "if"
            | "elif"
            | "else"
            | "while"
            | "for"
            | "in"
            | "global"
            | "nonlocal"
            | "del"
            | "pass"
            | "break"
            | "continue"
            | "and"
            | "or"
            | "not"
            | "from"
            | "import"
            | "is"
            | "class"
            | "lambda"
            | "try"
            | "except"
            | "finally"
            | "with"
            | "yield"
            | "async"
            | "await"
            | "raise"
            | "assert"
            | "True"
            | "False"
            | "None"
            | "as"
    )
}
