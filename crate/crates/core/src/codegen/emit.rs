use super::{CodegenConfig, CodegenError, TranslationUnit, UnitKind};
use crate::frontend::{BinOp, BoolOp, CmpOp, ComplexField, Expr, ExprKind, Ident, NodeId, Span, Stmt, StmtKind, Target, UnaryOp};
use crate::numfmt::real_repr;
use crate::semant::{display_leaf, DispatchClass, DispatchPlan, ElemKind, FuncId, Kind, ProgramAnalysis, Ty};
use std::fmt::Write;

type Result<T> = std::result::Result<T, CodegenError>;

fn unsupported(span: Span, message: impl Into<String>) -> CodegenError {
    CodegenError::Unsupported { message: message.into(), span }
}

/// C return type of a generated function.
fn ret_type(a: &ProgramAnalysis, f: FuncId) -> &'static str {
    a.functions[f].return_kind.map(Kind::c_type).unwrap_or("Int")
}

fn signature(a: &ProgramAnalysis, f: FuncId) -> String {
    format!("{} {}(Env env, Object self)", ret_type(a, f), a.functions[f].mangled)
}

/// Resident functions have internal linkage; statically dispatched ones are
/// offered to the C compiler for inlining at their direct call sites.
fn resident_linkage(plan: &DispatchPlan, f: FuncId) -> &'static str {
    if plan.class[f] == DispatchClass::StaticDispatch {
        "static inline "
    } else {
        "static "
    }
}

fn functions_in(a: &ProgramAnalysis, plan: &DispatchPlan, unit: Option<FuncId>) -> Vec<FuncId> {
    (0..a.functions.len()).filter(|&f| plan.unit_of[f] == unit).collect()
}

fn enum_lines(out: &mut String, a: &ProgramAnalysis, funcs: &[FuncId]) {
    for &f in funcs {
        let info = &a.functions[f];
        let slots = a.scopes[info.scope].symbols.len();
        let _ = writeln!(out, "enum {{ {m}_slots = {slots}, {m}_level = {} }};", info.depth, m = info.mangled);
    }
}

fn c_string(s: &str) -> String {
    let mut out = String::from("\"");
    for b in s.bytes() {
        match b {
            b'"' => out.push_str("\\\""),
            b'\\' => out.push_str("\\\\"),
            b'\n' => out.push_str("\\n"),
            b'\t' => out.push_str("\\t"),
            0x20..=0x7e => out.push(b as char),
            _ => {
                let _ = write!(out, "\\{b:03o}");
            }
        }
    }
    out.push('"');
    out
}

pub(super) fn resident_unit(a: &ProgramAnalysis, plan: &DispatchPlan, cfg: &CodegenConfig, max_lex: usize) -> Result<TranslationUnit> {
    let funcs = functions_in(a, plan, None);
    let mut out = String::from("#include \"oly_rt.h\"\n\n");
    enum_lines(&mut out, a, &funcs);
    if !funcs.is_empty() {
        out.push('\n');
    }
    for &f in &funcs {
        let _ = writeln!(out, "{}{};", resident_linkage(plan, f), signature(a, f));
    }
    out.push_str("Int oly_main(Env env, Object self);\n\n");

    let mut main = FnEmitter::new(a, plan, None, None);
    main.block(&a.module.body)?;
    let _ = writeln!(out, "Int oly_main(Env env, Object self) {{\n{}  return 0;\n}}\n", main.out);
    for &f in &funcs {
        out.push_str(resident_linkage(plan, f));
        out.push_str(&function_def(a, plan, None, f)?);
        out.push('\n');
    }

    let dyn_count = plan.dynamic_roots.len();
    if dyn_count > 0 {
        out.push_str("static const OlyDynInfo oly_dyn_info[] = {\n");
        for &r in &plan.dynamic_roots {
            let info = &a.functions[r];
            let slots = a.scopes[info.scope].symbols.len();
            let _ = writeln!(out, "  {{{}, {}, {}, {}}},", c_string(&info.name), info.arg_count, slots, info.depth);
        }
        out.push_str("};\n\n");
    }
    let flags = if dyn_count > 0 { "OLY_RT_DYNAMIC" } else { "0u" };
    let globals = a.scopes[crate::semant::MODULE_SCOPE].symbols.len();
    let _ = writeln!(out, "int main(void) {{");
    let _ = writeln!(out, "  Env env = rt_init({max_lex}, {}u, {}u, {globals}, {flags});", cfg.frame_bytes, cfg.heap_bytes);
    if dyn_count > 0 {
        let _ = writeln!(out, "  rt_set_dyn_table(env, oly_dyn_info, {dyn_count});");
    } else {
        let _ = writeln!(out, "  rt_set_dyn_table(env, 0, 0);");
    }
    out.push_str("  oly_main(env, 0);\n  return rt_finish(env);\n}\n");
    Ok(TranslationUnit { file_name: format!("{}.c", cfg.kernel), body: out, kind: UnitKind::Resident })
}

pub(super) fn dynamic_unit(a: &ProgramAnalysis, plan: &DispatchPlan, cfg: &CodegenConfig, root: FuncId) -> Result<TranslationUnit> {
    let funcs = functions_in(a, plan, Some(root));
    let mut out = String::from("#include \"oly_rt.h\"\n\n");
    enum_lines(&mut out, a, &funcs);
    out.push('\n');
    let nested: Vec<FuncId> = funcs.iter().copied().filter(|&f| f != root).collect();
    for &f in &nested {
        let _ = writeln!(out, "static {};", signature(a, f));
    }
    if !nested.is_empty() {
        out.push('\n');
    }
    // The exported entry must come first: the loader copies `.text` from
    // its symbol onwards.
    out.push_str(&function_def(a, plan, Some(root), root)?);
    for &f in &nested {
        out.push('\n');
        out.push_str("static ");
        out.push_str(&function_def(a, plan, Some(root), f)?);
    }
    let file_name = format!("{}_{}.c", cfg.kernel, a.functions[root].mangled);
    Ok(TranslationUnit { file_name, body: out, kind: UnitKind::Dynamic { function: root } })
}

fn function_def(a: &ProgramAnalysis, plan: &DispatchPlan, unit: Option<FuncId>, f: FuncId) -> Result<String> {
    let mut e = FnEmitter::new(a, plan, unit, Some(f));
    let body = a.body(Some(f));
    e.block(body)?;
    let mut out = format!("{} {{\n{}", signature(a, f), e.out);
    if !matches!(body.last(), Some(Stmt { kind: StmtKind::Return(_), .. })) {
        out.push_str("  return 0;\n");
    }
    out.push_str("}\n");
    Ok(out)
}

/// Wrap in parentheses unless `s` is already one parenthesised group.
fn paren(s: &str) -> String {
    if s.starts_with('(') {
        let mut depth = 0usize;
        for (i, c) in s.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        if i == s.len() - 1 {
                            return s.to_string();
                        }
                        break;
                    }
                }
                _ => {}
            }
        }
    }
    format!("({s})")
}

struct FnEmitter<'a> {
    a: &'a ProgramAnalysis,
    plan: &'a DispatchPlan,
    unit: Option<FuncId>,
    func: Option<FuncId>,
    depth: usize,
    dynamic: bool,
    temps: usize,
    indent: usize,
    out: String,
}

impl<'a> FnEmitter<'a> {
    fn new(a: &'a ProgramAnalysis, plan: &'a DispatchPlan, unit: Option<FuncId>, func: Option<FuncId>) -> Self {
        FnEmitter {
            a,
            plan,
            unit,
            func,
            depth: func.map(|f| a.functions[f].depth).unwrap_or(0),
            dynamic: unit.is_some(),
            temps: 0,
            indent: 1,
            out: String::new(),
        }
    }

    fn line(&mut self, text: &str) {
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn kind(&self, e: &Expr) -> Result<Kind> {
        self.a.kind_of(e.id).ok_or_else(|| unsupported(e.span, "expression has no value kind"))
    }

    fn int_lit(&self, n: i64) -> String {
        if self.dynamic {
            format!("OLY_INT({n})")
        } else {
            n.to_string()
        }
    }

    fn real_lit(&self, x: f64) -> String {
        let bits = x.to_bits();
        if self.dynamic {
            let lit = if x.is_finite() { real_repr(x) } else { "0.0".into() };
            format!("OLY_REAL(0x{bits:016X}ULL,{lit})")
        } else if x.is_finite() {
            real_repr(x)
        } else {
            format!("oly_real_bits((Int)0x{bits:016X}ULL)")
        }
    }

    fn str_lit(&self, s: &str) -> String {
        if !self.dynamic {
            return c_string(s);
        }
        // Pack into little-endian words so no read-only data is needed.
        let mut bytes = s.as_bytes().to_vec();
        bytes.push(0);
        while bytes.len() % 8 != 0 {
            bytes.push(0);
        }
        let words: Vec<String> = bytes
            .chunks(8)
            .map(|c| format!("{{.i=OLY_INT(0x{:016X}ULL)}}", u64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
            .collect();
        format!("(Str)((const Word[]){{{}}})", words.join(","))
    }

    /// `(level, offset)` of an identifier occurrence.
    fn addr(&self, id: NodeId, span: Span) -> Result<(usize, usize, Kind)> {
        let r = self.a.resolved(id).ok_or_else(|| unsupported(span, "unresolved name"))?;
        Ok((r.rel_level, r.offset, r.kind))
    }

    fn read(&self, id: NodeId, span: Span) -> Result<String> {
        let (l, o, k) = self.addr(id, span)?;
        Ok(format!("lookup_{}(env,{l},{o})", k.accessor()))
    }

    fn store(&self, id: NodeId, span: Span, value: &str) -> Result<String> {
        let (l, o, k) = self.addr(id, span)?;
        Ok(match k {
            Kind::Proc(_) if l == 0 => format!("update_proc(env,{o},{value});"),
            Kind::Proc(_) => format!("update_proc_at(env,{l},{o},{value});"),
            _ => format!("update_{}(env,{l},{o},{value});", k.accessor()),
        })
    }

    /// Expression converted for storage into a slot of kind `target`;
    /// complex values are copied so that slots never alias.
    fn value_into(&mut self, e: &Expr, target: Kind) -> Result<String> {
        let s = self.expr(e)?;
        if target == Kind::Complex && matches!(e.kind, ExprKind::Name(_)) {
            return Ok(format!("complex_copy(env,{s})"));
        }
        Ok(s)
    }

    fn block(&mut self, body: &[Stmt]) -> Result<()> {
        for s in body {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn nested_block(&mut self, body: &[Stmt]) -> Result<()> {
        self.indent += 1;
        let r = self.block(body);
        self.indent -= 1;
        r
    }

    fn stmt(&mut self, s: &Stmt) -> Result<()> {
        match &s.kind {
            StmtKind::FunctionDef(def) => {
                let g = self.a.func_by_stmt[&s.id];
                let info = &self.a.functions[g];
                let value = if info.is_deferred {
                    "NULL".to_string()
                } else if self.plan.is_loaded(g) && self.unit != Some(g) {
                    self.load_call(&info.name, info.arg_count)
                } else {
                    format!("mk_proc({},env,{})", info.mangled, info.arg_count)
                };
                let (l, o, _) = self.addr(def.name.id, def.name.span)?;
                let text = if l == 0 {
                    format!("declare_proc(env,{o},{},{value});", c_string(&info.name))
                } else {
                    format!("update_proc_at(env,{l},{o},{value});")
                };
                self.line(&text);
            }
            StmtKind::Assign { target, value } => self.assign(target, value, None)?,
            StmtKind::AugAssign { target, op, value } => self.assign(target, value, Some(*op))?,
            StmtKind::Return(v) => {
                let text = match v {
                    Some(v) => {
                        let f = self.func.ok_or_else(|| unsupported(s.span, "return outside function"))?;
                        let k = self.a.functions[f].return_kind.unwrap_or(Kind::Int);
                        format!("return{};", paren(&self.value_into(v, k)?))
                    }
                    None => "return 0;".to_string(),
                };
                self.line(&text);
            }
            StmtKind::If { test, body, orelse } => {
                let c = self.cond(test)?;
                self.line(&format!("if {} {{", paren(&c)));
                self.nested_block(body)?;
                if orelse.is_empty() {
                    self.line("}");
                } else {
                    self.line("} else {");
                    self.nested_block(orelse)?;
                    self.line("}");
                }
            }
            StmtKind::While { test, body } => {
                let c = self.cond(test)?;
                self.line(&format!("while {} {{", paren(&c)));
                self.nested_block(body)?;
                self.line("}");
            }
            StmtKind::For { var, range, body } => {
                let start = match &range.start {
                    Some(e) => self.expr(e)?,
                    None => self.int_lit(0),
                };
                let stop = self.expr(&range.stop)?;
                self.temps += 2;
                let (i, n) = (format!("oly_t{}", self.temps - 1), format!("oly_t{}", self.temps));
                let cmp = if range.step > 0 { "<" } else { ">" };
                self.line("{");
                self.indent += 1;
                self.line(&format!("Int {i} = {start};"));
                self.line(&format!("Int {n} = {stop};"));
                self.line(&format!("for (; {i} {cmp} {n}; {i} += {}) {{", range.step));
                let store = self.store(var.id, var.span, &i)?;
                self.indent += 1;
                self.line(&store);
                self.indent -= 1;
                self.nested_block(body)?;
                self.line("}");
                self.indent -= 1;
                self.line("}");
            }
            StmtKind::Expr(e) => {
                if let ExprKind::Call { func, args } = &e.kind {
                    if func.name == "print" {
                        return self.print(args);
                    }
                }
                let text = self.expr(e)?;
                self.line(&format!("{text};"));
            }
            StmtKind::Delete(n) => {
                let (l, o, _) = self.addr(n.id, n.span)?;
                self.line(&format!("delete_proc(env,{l},{o});"));
            }
            StmtKind::Break => self.line("break;"),
            StmtKind::Continue => self.line("continue;"),
            StmtKind::Global(_) | StmtKind::Nonlocal(_) | StmtKind::Pass => {}
        }
        Ok(())
    }

    fn print(&mut self, args: &[Expr]) -> Result<()> {
        for (i, arg) in args.iter().enumerate() {
            if i > 0 {
                self.line("print_sep(env);");
            }
            let text = match self.a.ty(arg.id) {
                Some(Ty::Str) => {
                    let ExprKind::Str(s) = &arg.kind else { unreachable!("string type on a non-literal") };
                    format!("print_str(env,{});", self.str_lit(s))
                }
                Some(Ty::Val(k)) => {
                    let v = self.expr(arg)?;
                    match k {
                        Kind::Int => format!("print_int(env,{v});"),
                        Kind::Real => format!("print_real(env,{v});"),
                        Kind::Complex => format!("print_complex(env,{v});"),
                        Kind::Vector(ElemKind::Int) => format!("print_vector_int(env,{v});"),
                        Kind::Vector(ElemKind::Real) => format!("print_vector_real(env,{v});"),
                        Kind::Proc(_) | Kind::Object => return Err(unsupported(arg.span, "cannot print this value")),
                    }
                }
                _ => return Err(unsupported(arg.span, "cannot print this value")),
            };
            self.line(&text);
        }
        self.line("print_nl(env);");
        Ok(())
    }

    fn assign(&mut self, target: &Target, value: &Expr, op: Option<BinOp>) -> Result<()> {
        let text = match target {
            Target::Name(n) => {
                let (_, _, k) = self.addr(n.id, n.span)?;
                let v = match op {
                    None => self.value_into(value, k)?,
                    Some(op) => {
                        let cur = self.read(n.id, n.span)?;
                        let rhs = self.expr(value)?;
                        self.binop(op, &cur, k, &rhs, self.kind(value)?, value.span)?.0
                    }
                };
                self.store(n.id, n.span, &v)?
            }
            Target::Index { base, index } => {
                let Kind::Vector(ek) = self.kind(base)? else {
                    return Err(unsupported(base.span, "indexing a non-vector"));
                };
                let b = self.expr(base)?;
                let i = self.expr(index)?;
                let acc = if ek == ElemKind::Int { "int" } else { "real" };
                let v = match op {
                    None => self.expr(value)?,
                    Some(op) => {
                        let cur = format!("vector_lookup_{acc}({b},{i})");
                        let rhs = self.expr(value)?;
                        let ck = if ek == ElemKind::Int { Kind::Int } else { Kind::Real };
                        self.binop(op, &cur, ck, &rhs, self.kind(value)?, value.span)?.0
                    }
                };
                format!("vector_update_{acc}({b},{i},{v});")
            }
            Target::Field { base, field } => {
                let c = self.read(base.id, base.span)?;
                let f = match field {
                    ComplexField::Real => "real",
                    ComplexField::Imag => "imag",
                };
                let v = match op {
                    None => self.expr(value)?,
                    Some(op) => {
                        let cur = format!("complex_{f}({c})");
                        let rhs = self.expr(value)?;
                        self.binop(op, &cur, Kind::Real, &rhs, self.kind(value)?, value.span)?.0
                    }
                };
                format!("update_complex_{f}({c},{v});")
            }
        };
        self.line(&text);
        Ok(())
    }

    fn zero(&self) -> String {
        self.real_lit(0.0)
    }

    fn binop(&mut self, op: BinOp, l: &str, lk: Kind, r: &str, rk: Kind, span: Span) -> Result<(String, Kind)> {
        if lk == Kind::Complex || rk == Kind::Complex {
            let lift = |s: &str, k: Kind, z: &str| if k == Kind::Complex { s.to_string() } else { format!("complex_new(env,{s},{z})") };
            let z = self.zero();
            let (a, b) = (lift(l, lk, &z), lift(r, rk, &z));
            let f = match op {
                BinOp::Add => "complex_add",
                BinOp::Sub => "complex_sub",
                BinOp::Mul => "complex_mul",
                _ => return Err(unsupported(span, format!("operator `{}` on complex values", op.symbol()))),
            };
            return Ok((format!("{f}(env,{a},{b})"), Kind::Complex));
        }
        if !lk.is_numeric() || !rk.is_numeric() {
            return Err(unsupported(span, format!("operator `{}` on {lk} and {rk}", op.symbol())));
        }
        let ints = lk == Kind::Int && rk == Kind::Int;
        let k = if ints && op != BinOp::Div { Kind::Int } else { Kind::Real };
        let sfx = if ints { "int" } else { "real" };
        let text = match op {
            BinOp::Add => format!("({l} + {r})"),
            BinOp::Sub => format!("({l} - {r})"),
            BinOp::Mul => format!("({l} * {r})"),
            BinOp::Div => format!("oly_truediv(env,{l},{r})"),
            BinOp::FloorDiv => format!("oly_floordiv_{sfx}(env,{l},{r})"),
            BinOp::Mod => format!("oly_mod_{sfx}(env,{l},{r})"),
        };
        Ok((text, k))
    }

    fn cond(&mut self, e: &Expr) -> Result<String> {
        match &e.kind {
            ExprKind::Compare { op, lhs, rhs } => {
                let lk = self.kind(lhs)?;
                let (l, r) = (self.expr(lhs)?, self.expr(rhs)?);
                if lk == Kind::Complex {
                    let eq = format!("complex_eq({l},{r})");
                    return Ok(if *op == CmpOp::Ne { format!("(!{eq})") } else { eq });
                }
                Ok(format!("({l} {} {r})", op.symbol()))
            }
            ExprKind::BoolOp { op, lhs, rhs } => {
                let (l, r) = (self.cond(lhs)?, self.cond(rhs)?);
                let sym = if *op == BoolOp::And { "&&" } else { "||" };
                Ok(format!("({l} {sym} {r})"))
            }
            ExprKind::Unary { op: UnaryOp::Not, operand } => Ok(format!("(!{})", paren(&self.cond(operand)?))),
            _ => self.expr(e),
        }
    }

    fn expr(&mut self, e: &Expr) -> Result<String> {
        Ok(match &e.kind {
            ExprKind::Name(_) => self.read(e.id, e.span)?,
            ExprKind::Int(n) => self.int_lit(*n),
            ExprKind::Real(x) => self.real_lit(*x),
            ExprKind::Str(_) => return Err(unsupported(e.span, "string values outside print() and load_function()")),
            ExprKind::List(items) => {
                let Kind::Vector(ek) = self.kind(e)? else { unreachable!("list display typed as vector") };
                if items.is_empty() {
                    "vector_lit(env,0,0)".to_string()
                } else {
                    let field = if ek == ElemKind::Int { "i" } else { "r" };
                    let mut elems = Vec::with_capacity(items.len());
                    for it in items {
                        elems.push(format!("{{.{field}={}}}", self.expr(it)?));
                    }
                    format!("vector_lit(env,{},((const Word[]){{{}}}))", items.len(), elems.join(","))
                }
            }
            ExprKind::BinOp { op: BinOp::Mul, lhs, rhs }
                if matches!(lhs.kind, ExprKind::List(_)) || matches!(rhs.kind, ExprKind::List(_)) =>
            {
                let (list, count) = if matches!(lhs.kind, ExprKind::List(_)) { (lhs, rhs) } else { (rhs, lhs) };
                let ExprKind::List(items) = &list.kind else { unreachable!() };
                let Kind::Vector(ek) = self.kind(e)? else { unreachable!("repetition typed as vector") };
                let field = if ek == ElemKind::Int { "i" } else { "r" };
                let n = self.expr(count)?;
                let fill = self.expr(&items[0])?;
                format!("vector_new(env,{n},((Word){{.{field}={fill}}}))")
            }
            ExprKind::BinOp { op, lhs, rhs } => {
                let (lk, rk) = (self.kind(lhs)?, self.kind(rhs)?);
                let (l, r) = (self.expr(lhs)?, self.expr(rhs)?);
                self.binop(*op, &l, lk, &r, rk, e.span)?.0
            }
            ExprKind::Unary { op: UnaryOp::Not, .. } | ExprKind::Compare { .. } | ExprKind::BoolOp { .. } => self.cond(e)?,
            ExprKind::Unary { op, operand } => {
                let v = self.expr(operand)?;
                match (op, self.kind(operand)?) {
                    (UnaryOp::Pos, _) => format!("(+{})", paren(&v)),
                    // Sign flips of reals use a subtraction so no mask
                    // constant is needed in dynamic units.
                    (_, Kind::Real) if self.dynamic => format!("({} - {})", self.real_lit(-0.0), paren(&v)),
                    _ => format!("(-{})", paren(&v)),
                }
            }
            ExprKind::Index { base, index } => {
                let Kind::Vector(ek) = self.kind(base)? else {
                    return Err(unsupported(base.span, "indexing a non-vector"));
                };
                let acc = if ek == ElemKind::Int { "int" } else { "real" };
                format!("vector_lookup_{acc}({},{})", self.expr(base)?, self.expr(index)?)
            }
            ExprKind::Field { base, field } => {
                let f = match field {
                    ComplexField::Real => "real",
                    ComplexField::Imag => "imag",
                };
                format!("complex_{f}({})", self.expr(base)?)
            }
            ExprKind::Call { func, args } => self.call(e, func, args)?,
        })
    }

    /// Runtime load of a top-level function into a proc value.
    fn load_call(&self, name: &str, argc: usize) -> String {
        let n = self.str_lit(name);
        if self.depth == 0 {
            format!("load_proc({n},env,{argc})")
        } else {
            format!("load_proc_at({n},env,{},{argc})", self.depth)
        }
    }

    fn call(&mut self, e: &Expr, func: &Ident, args: &[Expr]) -> Result<String> {
        match func.name.as_str() {
            "len" => return Ok(format!("vector_len({})", self.expr(&args[0])?)),
            "complex" => {
                let (re, im) = (self.expr(&args[0])?, self.expr(&args[1])?);
                return Ok(format!("complex_new(env,{re},{im})"));
            }
            "load_function" => {
                let Some(Kind::Proc(g)) = self.a.kind_of(e.id) else {
                    return Err(unsupported(e.span, "load_function() target is not a function"));
                };
                let info = &self.a.functions[g];
                if self.plan.is_loaded(g) {
                    return Ok(self.load_call(&info.name, info.arg_count));
                }
                if self.dynamic {
                    // Resident code is not addressable from a loaded unit;
                    // use the proc bound by the top-level declaration.
                    return Ok(format!("lookup_proc(env,{},{})", self.depth, info.binding.1));
                }
                return Ok(if self.depth == 0 {
                    format!("mk_proc({},env,{})", info.mangled, info.arg_count)
                } else {
                    format!("mk_proc_at({},env,{},{})", info.mangled, self.depth, info.arg_count)
                });
            }
            "print" | "range" => return Err(unsupported(e.span, format!("{}() used as a value", func.name))),
            _ => {}
        }
        let slot = *self.a.slots.get(&func.id).ok_or_else(|| unsupported(func.span, "unresolved callee"))?;
        let Kind::Proc(g) = self.a.symbol(slot).kind() else {
            return Err(unsupported(func.span, format!("`{}` is not a function", func.name)));
        };
        let info = &self.a.functions[g];
        let mut elems = Vec::with_capacity(args.len());
        for (i, arg) in args.iter().enumerate() {
            let pk = self.a.scopes[info.scope].symbols[i].kind();
            let field = match pk {
                Kind::Int => "i",
                Kind::Real => "r",
                _ => "p",
            };
            elems.push(format!("{{.{field}={}}}", self.value_into(arg, pk)?));
        }
        let argv = if elems.is_empty() { "0".to_string() } else { format!("((const Word[]){{{}}})", elems.join(",")) };
        let (acc, cast) = match info.return_kind {
            None | Some(Kind::Int) => ("int", None),
            Some(Kind::Real) => ("real", None),
            Some(k) => ("ptr", Some(k.c_type())),
        };
        let direct = self.plan.class[g] == DispatchClass::StaticDispatch
            && self.plan.unit_of[g] == self.unit
            && !info.is_deferred
            && (slot.scope, slot.index) == info.binding
            && !self.a.rebound.contains(&info.binding);
        let text = if direct {
            let caller_depth = self.depth as i64;
            let delta = caller_depth - info.depth as i64;
            let how = if display_leaf(self.a, g) { "leaf" } else { "direct" };
            format!("call_{how}_{acc}(env,{},{delta},{},{argv})", info.mangled, args.len())
        } else {
            let p = self.read(func.id, func.span)?;
            format!("call_proc_{acc}(env,{p},{argv})")
        };
        Ok(match cast {
            Some(c) => format!("(({c}){text})"),
            None => text,
        })
    }
}
