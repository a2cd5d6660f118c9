//! Tree-walking reference interpreter.
//!
//! Works directly on the AST with its own Python-style name resolution
//! (dictionaries per activation, lexical parent links) so that it shares no
//! scope or kind machinery with the compiler it is used to check. Integer
//! arithmetic wraps at 64 bits and division follows the runtime's
//! definitions, mirroring the compiled semantics.

use crate::frontend::{
    walk_block, BinOp, BoolOp, CmpOp, ComplexField, Expr, ExprKind, FunctionDef, Module, NodeId, Stmt, StmtKind, Target, UnaryOp,
};
use crate::numfmt::{complex_repr, real_repr};
use crate::semant::DispatchMode;
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::rc::Rc;
use thiserror::Error;

/// Failure raised while running a program, named like the runtime's.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("UnloadedProcError: call of a deleted function")]
    UnloadedProc,
    #[error("UnknownFunctionError: {0}")]
    UnknownFunction(String),
    #[error("IndexError: vector index out of range")]
    Index,
    #[error("ZeroDivisionError: division by zero")]
    ZeroDivision,
    #[error("FrameOverflow: call depth limit exceeded")]
    FrameOverflow,
    /// Read of a name with no binding.
    #[error("NameError: {0}")]
    Name(String),
    /// Operation outside the interpreter's value model.
    #[error("TypeError: {0}")]
    Type(String),
}

impl RuntimeError {
    pub fn name(&self) -> &'static str {
        match self {
            RuntimeError::UnloadedProc => "UnloadedProcError",
            RuntimeError::UnknownFunction(_) => "UnknownFunctionError",
            RuntimeError::Index => "IndexError",
            RuntimeError::ZeroDivision => "ZeroDivisionError",
            RuntimeError::FrameOverflow => "FrameOverflow",
            RuntimeError::Name(_) => "NameError",
            RuntimeError::Type(_) => "TypeError",
        }
    }

    /// Device exit status for the same failure.
    pub fn status(&self) -> i32 {
        match self {
            RuntimeError::UnloadedProc => 10,
            RuntimeError::UnknownFunction(_) => 11,
            RuntimeError::FrameOverflow => 13,
            RuntimeError::Index => 15,
            RuntimeError::ZeroDivision => 16,
            RuntimeError::Name(_) | RuntimeError::Type(_) => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterpOptions {
    /// Decides which functions count as loaded from the host.
    pub mode: DispatchMode,
    pub max_depth: usize,
}

impl Default for InterpOptions {
    fn default() -> Self {
        InterpOptions { mode: DispatchMode::Auto, max_depth: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterpResult {
    pub output: String,
    /// 0 on success, otherwise the runtime status of `error`.
    pub status: i32,
    pub error: Option<RuntimeError>,
    /// Function names in the order their code would be fetched.
    pub loads: Vec<String>,
    /// Kinds observed per `(scope, variable)`.
    pub kinds: BTreeMap<(String, String), BTreeSet<String>>,
}

/// Run a parsed program on a thread with a large stack.
pub fn interpret(module: &Module, opts: &InterpOptions) -> InterpResult {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .name("refinterp".into())
            .stack_size(1 << 30)
            .spawn_scoped(s, || Interp::new(module, opts.clone()).run())
            .expect("spawn interpreter thread")
            .join()
            .expect("interpreter thread panicked")
    })
}

#[derive(Debug)]
struct FnInfo {
    qualified: String,
    locals: HashSet<String>,
    globals: HashSet<String>,
    top_level: bool,
}

struct Closure<'m> {
    def: &'m FunctionDef,
    info: Rc<FnInfo>,
    env: Rc<Frame<'m>>,
}

struct Frame<'m> {
    vars: RefCell<HashMap<String, Value<'m>>>,
    info: Option<Rc<FnInfo>>,
    parent: Option<Rc<Frame<'m>>>,
}

#[derive(Clone)]
enum Value<'m> {
    Int(i64),
    Real(f64),
    Complex(f64, f64),
    Vector(Rc<RefCell<Vec<Value<'m>>>>),
    Func(Rc<Closure<'m>>),
    /// Declared but not loaded, or deleted.
    NullProc,
    None,
    Bool(bool),
    Str(String),
}

impl Value<'_> {
    fn label(&self) -> String {
        match self {
            Value::Int(_) => "Int".into(),
            Value::Real(_) => "Real".into(),
            Value::Complex(..) => "Complex".into(),
            Value::Vector(v) => {
                if v.borrow().iter().any(|x| matches!(x, Value::Real(_))) {
                    "Vector[Real]".into()
                } else {
                    "Vector[Int]".into()
                }
            }
            Value::Func(_) | Value::NullProc => "Proc".into(),
            Value::None => "None".into(),
            Value::Bool(_) => "Bool".into(),
            Value::Str(_) => "Str".into(),
        }
    }
}

enum Flow<'m> {
    Normal,
    Break,
    Continue,
    Return(Value<'m>),
}

type R<T> = Result<T, RuntimeError>;

struct Interp<'m> {
    module: &'m Module,
    opts: InterpOptions,
    infos: HashMap<NodeId, Rc<FnInfo>>,
    top_defs: HashMap<String, (&'m FunctionDef, Rc<FnInfo>)>,
    globals: Rc<Frame<'m>>,
    out: String,
    loads: Vec<String>,
    kinds: BTreeMap<(String, String), BTreeSet<String>>,
    depth: usize,
}

fn collect_infos<'m>(
    body: &'m [Stmt],
    prefix: &str,
    top: bool,
    infos: &mut HashMap<NodeId, Rc<FnInfo>>,
    defs: &mut Vec<(NodeId, &'m FunctionDef)>,
) {
    for s in body_defs(body) {
        let StmtKind::FunctionDef(def) = &s.kind else { continue };
        let qualified = if prefix.is_empty() { def.name.name.clone() } else { format!("{prefix}.{}", def.name.name) };
        let mut locals: HashSet<String> = def.params.iter().map(|p| p.name.clone()).collect();
        let (mut globals, mut nonlocals) = (HashSet::new(), HashSet::new());
        walk_block(&def.body, &mut |st| match &st.kind {
            StmtKind::Global(ns) => globals.extend(ns.iter().map(|n| n.name.clone())),
            StmtKind::Nonlocal(ns) => nonlocals.extend(ns.iter().map(|n| n.name.clone())),
            StmtKind::FunctionDef(d) => {
                locals.insert(d.name.name.clone());
            }
            StmtKind::Assign { target: Target::Name(n), .. } | StmtKind::AugAssign { target: Target::Name(n), .. } => {
                locals.insert(n.name.clone());
            }
            StmtKind::For { var, .. } => {
                locals.insert(var.name.clone());
            }
            StmtKind::Delete(n) => {
                locals.insert(n.name.clone());
            }
            _ => {}
        });
        locals.retain(|n| !globals.contains(n) && !nonlocals.contains(n));
        infos.insert(s.id, Rc::new(FnInfo { qualified: qualified.clone(), locals, globals, top_level: top }));
        defs.push((s.id, def));
        collect_infos(&def.body, &qualified, false, infos, defs);
    }
}

/// Function definitions directly in `body`, including inside control flow
/// but not inside other functions.
fn body_defs(body: &[Stmt]) -> Vec<&Stmt> {
    let mut out = Vec::new();
    walk_block(body, &mut |s| {
        if matches!(s.kind, StmtKind::FunctionDef(_)) {
            out.push(s);
        }
    });
    out
}

fn truthy(v: &Value) -> R<bool> {
    match v {
        Value::Bool(b) => Ok(*b),
        Value::Int(i) => Ok(*i != 0),
        Value::Real(x) => Ok(*x != 0.0),
        _ => Err(RuntimeError::Type(format!("truth value of {}", v.label()))),
    }
}

fn as_real(v: &Value) -> R<f64> {
    match v {
        Value::Int(i) => Ok(*i as f64),
        Value::Real(x) => Ok(*x),
        _ => Err(RuntimeError::Type(format!("expected a number, got {}", v.label()))),
    }
}

fn as_complex(v: &Value) -> R<(f64, f64)> {
    match v {
        Value::Complex(re, im) => Ok((*re, *im)),
        other => Ok((as_real(other)?, 0.0)),
    }
}

fn floordiv_int(a: i64, b: i64) -> R<i64> {
    if b == 0 {
        return Err(RuntimeError::ZeroDivision);
    }
    let q = a.wrapping_div(b);
    Ok(if a.wrapping_rem(b) != 0 && ((a < 0) != (b < 0)) { q - 1 } else { q })
}

fn mod_int(a: i64, b: i64) -> R<i64> {
    if b == 0 {
        return Err(RuntimeError::ZeroDivision);
    }
    let r = a.wrapping_rem(b);
    Ok(if r != 0 && ((r < 0) != (b < 0)) { r + b } else { r })
}

fn truediv(a: f64, b: f64) -> R<f64> {
    if b == 0.0 {
        return Err(RuntimeError::ZeroDivision);
    }
    Ok(a / b)
}

fn arith<'m>(op: BinOp, l: &Value<'m>, r: &Value<'m>) -> R<Value<'m>> {
    use Value::*;
    Ok(match (l, r) {
        (Complex(..), _) | (_, Complex(..)) => {
            let ((a, b), (c, d)) = (as_complex(l)?, as_complex(r)?);
            match op {
                BinOp::Add => Complex(a + c, b + d),
                BinOp::Sub => Complex(a - c, b - d),
                BinOp::Mul => Complex(a * c - b * d, a * d + b * c),
                _ => return Err(RuntimeError::Type(format!("operator {} on complex", op.symbol()))),
            }
        }
        (Int(a), Int(b)) => match op {
            BinOp::Add => Int(a.wrapping_add(*b)),
            BinOp::Sub => Int(a.wrapping_sub(*b)),
            BinOp::Mul => Int(a.wrapping_mul(*b)),
            BinOp::Div => Real(truediv(*a as f64, *b as f64)?),
            BinOp::FloorDiv => Int(floordiv_int(*a, *b)?),
            BinOp::Mod => Int(mod_int(*a, *b)?),
        },
        _ => {
            let (a, b) = (as_real(l)?, as_real(r)?);
            match op {
                BinOp::Add => Real(a + b),
                BinOp::Sub => Real(a - b),
                BinOp::Mul => Real(a * b),
                BinOp::Div => Real(truediv(a, b)?),
                BinOp::FloorDiv => Real(truediv(a, b)?.floor()),
                BinOp::Mod => Real(a - b * truediv(a, b)?.floor()),
            }
        }
    })
}

fn format_value(v: &Value) -> R<String> {
    Ok(match v {
        Value::Int(i) => i.to_string(),
        Value::Real(x) => real_repr(*x),
        Value::Complex(re, im) => complex_repr(*re, *im),
        Value::Str(s) => s.clone(),
        Value::Vector(items) => {
            let parts: R<Vec<String>> = items.borrow().iter().map(format_value).collect();
            format!("[{}]", parts?.join(", "))
        }
        Value::Bool(b) => if *b { "True" } else { "False" }.into(),
        other => return Err(RuntimeError::Type(format!("cannot print {}", other.label()))),
    })
}

impl<'m> Interp<'m> {
    fn new(module: &'m Module, opts: InterpOptions) -> Self {
        let mut infos = HashMap::new();
        let mut defs = Vec::new();
        collect_infos(&module.body, "", true, &mut infos, &mut defs);
        let top_defs = module
            .body
            .iter()
            .filter_map(|s| match &s.kind {
                StmtKind::FunctionDef(d) => Some((d.name.name.clone(), (d, Rc::clone(&infos[&s.id])))),
                _ => None,
            })
            .collect();
        let globals = Rc::new(Frame { vars: RefCell::new(HashMap::new()), info: None, parent: None });
        Interp { module, opts, infos, top_defs, globals, out: String::new(), loads: Vec::new(), kinds: BTreeMap::new(), depth: 0 }
    }

    fn run(mut self) -> InterpResult {
        let globals = Rc::clone(&self.globals);
        let result = self.block(&self.module.body, &globals);
        let error = match result {
            Ok(_) => None,
            Err(e) => Some(e),
        };
        InterpResult {
            status: error.as_ref().map(RuntimeError::status).unwrap_or(0),
            output: self.out,
            error,
            loads: self.loads,
            kinds: self.kinds,
        }
    }

    fn is_loaded(&self, def: &FunctionDef, info: &FnInfo) -> bool {
        match self.opts.mode {
            DispatchMode::Auto => def.is_dynamic(),
            DispatchMode::Load => info.top_level,
            DispatchMode::Static | DispatchMode::Dynamic => false,
        }
    }

    /// Frame holding `name` as seen from `frame`.
    fn owner(&self, frame: &Rc<Frame<'m>>, name: &str) -> Rc<Frame<'m>> {
        let Some(info) = &frame.info else { return Rc::clone(frame) };
        if info.globals.contains(name) {
            return Rc::clone(&self.globals);
        }
        if info.locals.contains(name) {
            return Rc::clone(frame);
        }
        let mut cur = frame.parent.clone();
        while let Some(f) = cur {
            match &f.info {
                None => return f,
                Some(i) if i.locals.contains(name) => return f,
                Some(_) => cur = f.parent.clone(),
            }
        }
        Rc::clone(&self.globals)
    }

    fn scope_label(frame: &Frame) -> String {
        frame.info.as_ref().map(|i| i.qualified.clone()).unwrap_or_else(|| "<module>".into())
    }

    fn set(&mut self, frame: &Rc<Frame<'m>>, name: &str, v: Value<'m>) {
        let owner = self.owner(frame, name);
        if !matches!(v, Value::NullProc) {
            self.kinds.entry((Self::scope_label(&owner), name.to_string())).or_default().insert(v.label());
        }
        owner.vars.borrow_mut().insert(name.to_string(), v);
    }

    fn get(&self, frame: &Rc<Frame<'m>>, name: &str) -> R<Value<'m>> {
        let owner = self.owner(frame, name);
        let v = owner.vars.borrow().get(name).cloned();
        v.ok_or_else(|| RuntimeError::Name(name.to_string()))
    }

    fn block(&mut self, body: &'m [Stmt], frame: &Rc<Frame<'m>>) -> R<Flow<'m>> {
        for s in body {
            match self.stmt(s, frame)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, s: &'m Stmt, frame: &Rc<Frame<'m>>) -> R<Flow<'m>> {
        match &s.kind {
            StmtKind::FunctionDef(def) => {
                let info = Rc::clone(&self.infos[&s.id]);
                let v = if def.is_deferred() {
                    Value::NullProc
                } else {
                    if self.is_loaded(def, &info) {
                        self.loads.push(def.name.name.clone());
                    }
                    Value::Func(Rc::new(Closure { def, info, env: Rc::clone(frame) }))
                };
                self.set(frame, &def.name.name, v);
            }
            StmtKind::Assign { target, value } => {
                let v = self.expr(value, frame)?;
                self.assign(target, v, frame)?;
            }
            StmtKind::AugAssign { target, op, value } => {
                let cur = match target {
                    Target::Name(n) => self.get(frame, &n.name)?,
                    Target::Index { base, index } => {
                        let (vec, i) = self.element(base, index, frame)?;
                        let item = vec.borrow()[i].clone();
                        item
                    }
                    Target::Field { base, field } => {
                        let (re, im) = as_complex(&self.get(frame, &base.name)?)?;
                        Value::Real(if *field == ComplexField::Real { re } else { im })
                    }
                };
                let rhs = self.expr(value, frame)?;
                let v = arith(*op, &cur, &rhs)?;
                self.assign(target, v, frame)?;
            }
            StmtKind::Return(v) => {
                let v = match v {
                    Some(e) => self.expr(e, frame)?,
                    None => Value::None,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::If { test, body, orelse } => {
                let c = self.expr(test, frame)?;
                return if truthy(&c)? { self.block(body, frame) } else { self.block(orelse, frame) };
            }
            StmtKind::While { test, body } => loop {
                let c = self.expr(test, frame)?;
                if !truthy(&c)? {
                    break;
                }
                match self.block(body, frame)? {
                    Flow::Break => break,
                    Flow::Return(v) => return Ok(Flow::Return(v)),
                    Flow::Normal | Flow::Continue => {}
                }
            },
            StmtKind::For { var, range, body } => {
                let start = match &range.start {
                    Some(e) => self.int(e, frame)?,
                    None => 0,
                };
                let stop = self.int(&range.stop, frame)?;
                let mut i = start;
                while (range.step > 0 && i < stop) || (range.step < 0 && i > stop) {
                    self.set(frame, &var.name, Value::Int(i));
                    match self.block(body, frame)? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        Flow::Normal | Flow::Continue => {}
                    }
                    i = i.wrapping_add(range.step);
                }
            }
            StmtKind::Expr(e) => {
                self.expr(e, frame)?;
            }
            StmtKind::Delete(n) => {
                self.get(frame, &n.name)?;
                let owner = self.owner(frame, &n.name);
                owner.vars.borrow_mut().insert(n.name.clone(), Value::NullProc);
            }
            StmtKind::Break => return Ok(Flow::Break),
            StmtKind::Continue => return Ok(Flow::Continue),
            StmtKind::Global(_) | StmtKind::Nonlocal(_) | StmtKind::Pass => {}
        }
        Ok(Flow::Normal)
    }

    fn int(&mut self, e: &'m Expr, frame: &Rc<Frame<'m>>) -> R<i64> {
        match self.expr(e, frame)? {
            Value::Int(i) => Ok(i),
            other => Err(RuntimeError::Type(format!("expected Int, got {}", other.label()))),
        }
    }

    fn element(&mut self, base: &'m Expr, index: &'m Expr, frame: &Rc<Frame<'m>>) -> R<(Rc<RefCell<Vec<Value<'m>>>>, usize)> {
        let b = self.expr(base, frame)?;
        let i = self.int(index, frame)?;
        let Value::Vector(v) = b else {
            return Err(RuntimeError::Type(format!("indexing {}", b.label())));
        };
        let len = v.borrow().len();
        if i < 0 || i as u64 >= len as u64 {
            return Err(RuntimeError::Index);
        }
        Ok((v, i as usize))
    }

    fn assign(&mut self, target: &'m Target, v: Value<'m>, frame: &Rc<Frame<'m>>) -> R<()> {
        match target {
            Target::Name(n) => self.set(frame, &n.name, v),
            Target::Index { base, index } => {
                let (vec, i) = self.element(base, index, frame)?;
                vec.borrow_mut()[i] = v;
            }
            Target::Field { base, field } => {
                let (re, im) = as_complex(&self.get(frame, &base.name)?)?;
                let x = as_real(&v)?;
                let updated = if *field == ComplexField::Real { Value::Complex(x, im) } else { Value::Complex(re, x) };
                self.set(frame, &base.name, updated);
            }
        }
        Ok(())
    }

    fn expr(&mut self, e: &'m Expr, frame: &Rc<Frame<'m>>) -> R<Value<'m>> {
        Ok(match &e.kind {
            ExprKind::Name(n) => self.get(frame, n)?,
            ExprKind::Int(i) => Value::Int(*i),
            ExprKind::Real(x) => Value::Real(*x),
            ExprKind::Str(s) => Value::Str(s.clone()),
            ExprKind::List(items) => {
                let mut vals = Vec::with_capacity(items.len());
                for it in items {
                    vals.push(self.expr(it, frame)?);
                }
                Value::Vector(Rc::new(RefCell::new(vals)))
            }
            ExprKind::BinOp { op: BinOp::Mul, lhs, rhs }
                if matches!(lhs.kind, ExprKind::List(_)) || matches!(rhs.kind, ExprKind::List(_)) =>
            {
                let (l, r) = (self.expr(lhs, frame)?, self.expr(rhs, frame)?);
                let (list, n) = match (l, r) {
                    (Value::Vector(v), Value::Int(n)) | (Value::Int(n), Value::Vector(v)) => (v, n),
                    _ => return Err(RuntimeError::Type("list repetition needs an Int count".into())),
                };
                let items = list.borrow();
                let mut out = Vec::new();
                for _ in 0..n.max(0) {
                    out.extend(items.iter().cloned());
                }
                Value::Vector(Rc::new(RefCell::new(out)))
            }
            ExprKind::BinOp { op, lhs, rhs } => {
                let l = self.expr(lhs, frame)?;
                let r = self.expr(rhs, frame)?;
                arith(*op, &l, &r)?
            }
            ExprKind::Unary { op, operand } => {
                let v = self.expr(operand, frame)?;
                match (op, v) {
                    (UnaryOp::Not, v) => Value::Bool(!truthy(&v)?),
                    (UnaryOp::Pos, v @ (Value::Int(_) | Value::Real(_))) => v,
                    (UnaryOp::Neg, Value::Int(i)) => Value::Int(i.wrapping_neg()),
                    (UnaryOp::Neg, Value::Real(x)) => Value::Real(-x),
                    (_, v) => return Err(RuntimeError::Type(format!("unary sign on {}", v.label()))),
                }
            }
            ExprKind::Compare { op, lhs, rhs } => {
                let l = self.expr(lhs, frame)?;
                let r = self.expr(rhs, frame)?;
                Value::Bool(self.compare(*op, &l, &r)?)
            }
            ExprKind::BoolOp { op, lhs, rhs } => {
                let l = truthy(&self.expr(lhs, frame)?)?;
                let short = match op {
                    BoolOp::And => !l,
                    BoolOp::Or => l,
                };
                if short {
                    Value::Bool(l)
                } else {
                    Value::Bool(truthy(&self.expr(rhs, frame)?)?)
                }
            }
            ExprKind::Index { base, index } => {
                let (vec, i) = self.element(base, index, frame)?;
                let v = vec.borrow()[i].clone();
                v
            }
            ExprKind::Field { base, field } => {
                let (re, im) = as_complex(&self.expr(base, frame)?)?;
                Value::Real(if *field == ComplexField::Real { re } else { im })
            }
            ExprKind::Call { func, args } => self.call(&func.name, args, frame)?,
        })
    }

    fn compare(&self, op: CmpOp, l: &Value, r: &Value) -> R<bool> {
        if let (Value::Int(a), Value::Int(b)) = (l, r) {
            return Ok(match op {
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Gt => a > b,
                CmpOp::Ge => a >= b,
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
            });
        }
        if matches!(l, Value::Complex(..)) || matches!(r, Value::Complex(..)) {
            let eq = as_complex(l)? == as_complex(r)?;
            return match op {
                CmpOp::Eq => Ok(eq),
                CmpOp::Ne => Ok(!eq),
                _ => Err(RuntimeError::Type("ordering comparison of complex values".into())),
            };
        }
        let (a, b) = (as_real(l)?, as_real(r)?);
        Ok(match op {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        })
    }

    fn call(&mut self, name: &str, args: &'m [Expr], frame: &Rc<Frame<'m>>) -> R<Value<'m>> {
        let builtin = !self.owner(frame, name).vars.borrow().contains_key(name);
        if builtin {
            match name {
                "print" => {
                    let mut parts = Vec::with_capacity(args.len());
                    for a in args {
                        let v = self.expr(a, frame)?;
                        parts.push(format_value(&v)?);
                    }
                    self.out.push_str(&parts.join(" "));
                    self.out.push('\n');
                    return Ok(Value::None);
                }
                "len" => {
                    return match self.expr(&args[0], frame)? {
                        Value::Vector(v) => Ok(Value::Int(v.borrow().len() as i64)),
                        other => Err(RuntimeError::Type(format!("len() of {}", other.label()))),
                    }
                }
                "complex" => {
                    let re = as_real(&self.expr(&args[0], frame)?)?;
                    let im = as_real(&self.expr(&args[1], frame)?)?;
                    return Ok(Value::Complex(re, im));
                }
                "load_function" => {
                    let ExprKind::Str(target) = &args[0].kind else {
                        return Err(RuntimeError::Type("load_function() needs a string literal".into()));
                    };
                    let Some((def, info)) = self.top_defs.get(target).map(|(d, i)| (*d, Rc::clone(i))) else {
                        return Err(RuntimeError::UnknownFunction(target.clone()));
                    };
                    if self.is_loaded(def, &info) {
                        self.loads.push(target.clone());
                    }
                    return Ok(Value::Func(Rc::new(Closure { def, info, env: Rc::clone(&self.globals) })));
                }
                _ => {}
            }
        }
        let callee = self.get(frame, name)?;
        let closure = match callee {
            Value::Func(c) => c,
            Value::NullProc => return Err(RuntimeError::UnloadedProc),
            other => return Err(RuntimeError::Type(format!("`{name}` holds {}, not a function", other.label()))),
        };
        if closure.def.params.len() != args.len() {
            return Err(RuntimeError::Type(format!("`{name}` takes {} arguments", closure.def.params.len())));
        }
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(self.expr(a, frame)?);
        }
        if self.depth >= self.opts.max_depth {
            return Err(RuntimeError::FrameOverflow);
        }
        let callee_frame = Rc::new(Frame {
            vars: RefCell::new(HashMap::new()),
            info: Some(Rc::clone(&closure.info)),
            parent: Some(Rc::clone(&closure.env)),
        });
        for (p, v) in closure.def.params.iter().zip(vals) {
            self.set(&callee_frame, &p.name, v);
        }
        self.depth += 1;
        let flow = self.block(&closure.def.body, &callee_frame);
        self.depth -= 1;
        Ok(match flow? {
            Flow::Return(v) => v,
            _ => Value::None,
        })
    }
}

/// Parse and run source text.
pub fn interpret_str(text: &str, opts: &InterpOptions) -> Result<InterpResult, crate::FrontendError> {
    Ok(interpret(&crate::frontend::parse_str(text)?, opts))
}
