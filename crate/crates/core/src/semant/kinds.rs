//! Whole-program kind inference.
//!
//! Every variable gets one kind: the join over all values flowing into it
//! (assignments, call arguments, loop variables). Integers promote to reals.
//! Vectors share an element-kind variable across aliases so that storing a
//! real anywhere promotes every alias. Iteration runs to a fixpoint, then a
//! final pass records expression types and checks context rules.

use super::error::SemantError;
use super::scopes::find_def;
use super::types::*;
use crate::frontend::{BinOp, CmpOp, Expr, ExprKind, Ident, NodeId, Span, Stmt, StmtKind, Target, UnaryOp};
use std::collections::{BTreeMap, BTreeSet, HashMap};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tk {
    Int,
    Real,
    Complex,
    Vec(usize),
    Proc(FuncId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum T {
    K(Tk),
    Cond,
    Unit,
    Str,
}

struct Infer<'a> {
    a: &'a ProgramAnalysis,
    sym: Vec<Vec<Option<Tk>>>,
    ret: Vec<Option<Tk>>,
    value_return: Vec<bool>,
    parent: Vec<usize>,
    elem: Vec<Option<ElemKind>>,
    list_var: HashMap<NodeId, usize>,
    changed: bool,
    final_pass: bool,
    types: HashMap<NodeId, Ty>,
    calls: BTreeMap<Option<FuncId>, BTreeSet<FuncId>>,
    loop_depth: usize,
}

/// Infer slot kinds, return kinds and expression types; fills in the
/// analysis in place.
pub fn infer_kinds(a: &mut ProgramAnalysis) -> Result<(), SemantError> {
    let ro: &ProgramAnalysis = a;
    let mut inf = Infer {
        a: ro,
        sym: ro.scopes.iter().map(|s| vec![None; s.symbols.len()]).collect(),
        ret: vec![None; ro.functions.len()],
        value_return: vec![false; ro.functions.len()],
        parent: Vec::new(),
        elem: Vec::new(),
        list_var: HashMap::new(),
        changed: true,
        final_pass: false,
        types: HashMap::new(),
        calls: BTreeMap::new(),
        loop_depth: 0,
    };
    inf.scan_returns()?;
    while inf.changed {
        inf.changed = false;
        inf.program()?;
    }
    for (sid, scope) in ro.scopes.iter().enumerate() {
        for (i, s) in scope.symbols.iter().enumerate() {
            if inf.sym[sid][i].is_none() {
                return Err(SemantError::AmbiguousKind { name: s.name.clone(), span: s.span });
            }
        }
    }
    inf.final_pass = true;
    inf.program()?;
    debug_assert!(!inf.changed, "final pass must not change kinds");

    let sym_kinds: Vec<Vec<Kind>> = inf.sym.iter().map(|v| v.iter().map(|t| inf.kind(t.unwrap_or(Tk::Int)))).map(|i| i.collect()).collect();
    let ret_kinds: Vec<Option<Kind>> =
        (0..ro.functions.len()).map(|f| if inf.value_return[f] { inf.ret[f].map(|t| inf.kind(t)) } else { None }).collect();
    let types = std::mem::take(&mut inf.types);
    let calls: BTreeMap<Option<FuncId>, Vec<FuncId>> = inf.calls.iter().map(|(k, v)| (*k, v.iter().copied().collect())).collect();
    drop(inf);

    for (sid, kinds) in sym_kinds.into_iter().enumerate() {
        for (i, k) in kinds.into_iter().enumerate() {
            a.scopes[sid].symbols[i].kind = Some(k);
        }
    }
    for (f, k) in ret_kinds.into_iter().enumerate() {
        a.functions[f].return_kind = k;
    }
    a.types = types;
    a.calls = calls;
    a.inferred = true;
    Ok(())
}

fn describe(t: Tk) -> &'static str {
    match t {
        Tk::Int => "Int",
        Tk::Real => "Real",
        Tk::Complex => "Complex",
        Tk::Vec(_) => "Vector",
        Tk::Proc(_) => "Proc",
    }
}

impl<'a> Infer<'a> {
    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn new_var(&mut self) -> usize {
        let v = self.parent.len();
        self.parent.push(v);
        self.elem.push(None);
        v
    }

    fn join_elem_kind(a: Option<ElemKind>, b: Option<ElemKind>) -> Option<ElemKind> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(x), Some(y)) => Some(x.max(y)),
        }
    }

    fn join_elem(&mut self, v: usize, k: ElemKind) {
        let r = self.find(v);
        let joined = Self::join_elem_kind(self.elem[r], Some(k));
        if joined != self.elem[r] {
            self.elem[r] = joined;
            self.changed = true;
        }
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let joined = Self::join_elem_kind(self.elem[ra], self.elem[rb]);
            self.parent[rb] = ra;
            self.elem[ra] = joined;
            self.changed = true;
        }
    }

    fn elem_of(&mut self, v: usize) -> Option<ElemKind> {
        let r = self.find(v);
        self.elem[r]
    }

    fn kind(&self, t: Tk) -> Kind {
        match t {
            Tk::Int => Kind::Int,
            Tk::Real => Kind::Real,
            Tk::Complex => Kind::Complex,
            Tk::Proc(f) => Kind::Proc(f),
            Tk::Vec(v) => {
                let mut r = v;
                while self.parent[r] != r {
                    r = self.parent[r];
                }
                Kind::Vector(self.elem[r].unwrap_or(ElemKind::Int))
            }
        }
    }

    /// Join `incoming` into `cur`. Returns the new value or a description of
    /// the conflict.
    fn join(&mut self, cur: Option<Tk>, incoming: Tk) -> Result<Tk, (Tk, Tk)> {
        let Some(cur) = cur else {
            self.changed = true;
            return Ok(incoming);
        };
        match (cur, incoming) {
            (Tk::Int, Tk::Int) => Ok(Tk::Int),
            (Tk::Int, Tk::Real) => {
                self.changed = true;
                Ok(Tk::Real)
            }
            (Tk::Real, Tk::Int | Tk::Real) => Ok(Tk::Real),
            (Tk::Complex, Tk::Complex) => Ok(Tk::Complex),
            (Tk::Vec(a), Tk::Vec(b)) => {
                self.union(a, b);
                Ok(Tk::Vec(a))
            }
            (Tk::Proc(f), Tk::Proc(g)) if f == g => Ok(cur),
            (c, i) => Err((c, i)),
        }
    }

    fn join_sym(&mut self, scope: ScopeId, idx: usize, incoming: Tk, span: Span) -> Result<(), SemantError> {
        let cur = self.sym[scope][idx];
        match self.join(cur, incoming) {
            Ok(t) => {
                self.sym[scope][idx] = Some(t);
                Ok(())
            }
            Err((c, i)) => {
                let sym = &self.a.scopes[scope].symbols[idx];
                if sym.function.is_some() || matches!((c, i), (Tk::Proc(_), Tk::Proc(_))) {
                    Err(SemantError::RedeclarationKind {
                        name: sym.name.clone(),
                        span,
                        first: describe(c).into(),
                        second: describe(i).into(),
                    })
                } else {
                    Err(SemantError::KindConflict {
                        name: sym.name.clone(),
                        span,
                        existing: describe(c).into(),
                        incoming: describe(i).into(),
                    })
                }
            }
        }
    }

    fn slot(&self, id: NodeId) -> SlotRef {
        self.a.slots[&id]
    }

    fn scan_returns(&mut self) -> Result<(), SemantError> {
        for f in 0..self.a.functions.len() {
            let body = self.body(Some(f));
            let (mut value, mut bare) = (None, None);
            crate::frontend::walk_block(body, &mut |s| {
                if let StmtKind::Return(v) = &s.kind {
                    if v.is_some() {
                        value.get_or_insert(s.span);
                    } else {
                        bare.get_or_insert(s.span);
                    }
                }
            });
            if let (Some(_), Some(span)) = (value, bare) {
                return Err(SemantError::ty(span, "function mixes `return` with and without a value"));
            }
            self.value_return[f] = value.is_some();
        }
        Ok(())
    }

    fn body(&self, f: Option<FuncId>) -> &'a [Stmt] {
        match f {
            None => &self.a.module.body,
            Some(f) => find_def(&self.a.module.body, self.a.functions[f].def_stmt).map(|d| d.body.as_slice()).unwrap_or(&[]),
        }
    }

    fn program(&mut self) -> Result<(), SemantError> {
        let n = self.a.functions.len();
        for f in std::iter::once(None).chain((0..n).map(Some)) {
            self.loop_depth = 0;
            let body = self.body(f);
            self.block(body, f)?;
        }
        Ok(())
    }

    fn block(&mut self, body: &'a [Stmt], f: Option<FuncId>) -> Result<(), SemantError> {
        for s in body {
            self.stmt(s, f)?;
        }
        Ok(())
    }

    fn record(&mut self, id: NodeId, t: T) {
        if self.final_pass {
            let ty = match t {
                T::K(k) => Ty::Val(self.kind(k)),
                T::Cond => Ty::Cond,
                T::Unit => Ty::Unit,
                T::Str => Ty::Str,
            };
            self.types.insert(id, ty);
        }
    }

    /// Require a value kind; `None` while still unknown.
    fn value(&mut self, e: &'a Expr, f: Option<FuncId>) -> Result<Option<Tk>, SemantError> {
        match self.expr(e, f)? {
            None => Ok(None),
            Some(T::K(k)) => Ok(Some(k)),
            Some(T::Cond) => Err(SemantError::unsupported(e.span, "comparison or boolean result used as a value")),
            Some(T::Unit) => Err(SemantError::ty(e.span, "function without a return value used as a value")),
            Some(T::Str) => Err(SemantError::unsupported(e.span, "string values outside print() and load_function()")),
        }
    }

    fn numeric(&mut self, e: &'a Expr, f: Option<FuncId>, what: &str) -> Result<Option<Tk>, SemantError> {
        let k = self.value(e, f)?;
        match k {
            None | Some(Tk::Int | Tk::Real) => Ok(k),
            Some(other) => Err(SemantError::ty(e.span, format!("{what} must be numeric, not {}", describe(other)))),
        }
    }

    fn int(&mut self, e: &'a Expr, f: Option<FuncId>, what: &str) -> Result<(), SemantError> {
        match self.value(e, f)? {
            None | Some(Tk::Int) => Ok(()),
            Some(other) => Err(SemantError::ty(e.span, format!("{what} must be Int, not {}", describe(other)))),
        }
    }

    fn stmt(&mut self, s: &'a Stmt, f: Option<FuncId>) -> Result<(), SemantError> {
        match &s.kind {
            StmtKind::FunctionDef(_) => {
                let g = self.a.func_by_stmt[&s.id];
                let (scope, idx) = self.a.functions[g].binding;
                self.join_sym(scope, idx, Tk::Proc(g), s.span)?;
            }
            StmtKind::Assign { target, value } => {
                let k = self.value(value, f)?;
                self.assign(target, k, value.span, f)?;
            }
            StmtKind::AugAssign { target, op, value } => {
                let cur = match target {
                    Target::Name(n) => {
                        let r = self.slot(n.id);
                        self.sym[r.scope][r.index]
                    }
                    Target::Index { base, index } => {
                        if base.contains_call() || index.contains_call() {
                            return Err(SemantError::unsupported(s.span, "augmented assignment to an element selected by a call"));
                        }
                        self.index_kind(base, index, f)?
                    }
                    Target::Field { base, .. } => {
                        self.complex_name(base)?;
                        Some(Tk::Real)
                    }
                };
                let rhs = self.value(value, f)?;
                let k = match (cur, rhs) {
                    (Some(l), Some(r)) => Some(self.arith(*op, l, r, s.span)?),
                    _ => None,
                };
                self.assign(target, k, value.span, f)?;
            }
            StmtKind::Return(v) => {
                let Some(fun) = f else {
                    return Err(SemantError::ty(s.span, "`return` outside function"));
                };
                if let Some(v) = v {
                    if let Some(k) = self.value(v, f)? {
                        if let Tk::Proc(_) = k {
                            return Err(SemantError::unsupported(v.span, "returning a function (escaping closure)"));
                        }
                        match self.join(self.ret[fun], k) {
                            Ok(t) => self.ret[fun] = Some(t),
                            Err((c, i)) => {
                                return Err(SemantError::KindConflict {
                                    name: format!("return value of {}", self.a.functions[fun].qualified_name),
                                    span: v.span,
                                    existing: describe(c).into(),
                                    incoming: describe(i).into(),
                                })
                            }
                        }
                    }
                }
            }
            StmtKind::If { test, body, orelse } => {
                self.cond(test, f)?;
                self.block(body, f)?;
                self.block(orelse, f)?;
            }
            StmtKind::While { test, body } => {
                self.cond(test, f)?;
                self.loop_depth += 1;
                self.block(body, f)?;
                self.loop_depth -= 1;
            }
            StmtKind::For { var, range, body } => {
                if let Some(start) = &range.start {
                    self.int(start, f, "range() bound")?;
                }
                self.int(&range.stop, f, "range() bound")?;
                let r = self.slot(var.id);
                self.join_sym(r.scope, r.index, Tk::Int, var.span)?;
                self.loop_depth += 1;
                self.block(body, f)?;
                self.loop_depth -= 1;
            }
            StmtKind::Expr(e) => {
                let t = self.expr(e, f)?;
                if self.final_pass && matches!(t, Some(T::Str)) {
                    return Err(SemantError::unsupported(e.span, "string values outside print() and load_function()"));
                }
            }
            StmtKind::Delete(n) => {
                if self.final_pass {
                    let r = self.slot(n.id);
                    if !matches!(self.sym[r.scope][r.index], Some(Tk::Proc(_))) {
                        return Err(SemantError::DeleteNonProc { name: n.name.clone(), span: n.span });
                    }
                }
            }
            StmtKind::Break | StmtKind::Continue => {
                if self.final_pass && self.loop_depth == 0 {
                    return Err(SemantError::ty(s.span, "`break`/`continue` outside loop"));
                }
            }
            StmtKind::Global(_) | StmtKind::Nonlocal(_) | StmtKind::Pass => {}
        }
        Ok(())
    }

    fn complex_name(&mut self, base: &Ident) -> Result<(), SemantError> {
        let r = self.slot(base.id);
        match self.sym[r.scope][r.index] {
            None | Some(Tk::Complex) => Ok(()),
            Some(other) => Err(SemantError::ty(base.span, format!("`.real`/`.imag` on {}", describe(other)))),
        }
    }

    fn index_kind(&mut self, base: &'a Expr, index: &'a Expr, f: Option<FuncId>) -> Result<Option<Tk>, SemantError> {
        let b = self.value(base, f)?;
        self.int(index, f, "index")?;
        match b {
            None => Ok(None),
            Some(Tk::Vec(v)) => Ok(self.elem_of(v).map(|e| match e {
                ElemKind::Int => Tk::Int,
                ElemKind::Real => Tk::Real,
            })),
            Some(other) => Err(SemantError::ty(base.span, format!("indexing a {}", describe(other)))),
        }
    }

    fn assign(&mut self, target: &'a Target, k: Option<Tk>, span: Span, f: Option<FuncId>) -> Result<(), SemantError> {
        match target {
            Target::Name(n) => {
                let r = self.slot(n.id);
                if let Some(k) = k {
                    if let Tk::Proc(g) = k {
                        let info = &self.a.functions[g];
                        let holder_depth = self.a.scopes[r.scope].depth;
                        if info.depth >= 2 && holder_depth + 1 < info.depth {
                            return Err(SemantError::unsupported(
                                span,
                                format!("nested function `{}` escapes its defining scope", info.name),
                            ));
                        }
                    }
                    self.join_sym(r.scope, r.index, k, span)?;
                }
            }
            Target::Index { base, index } => {
                let b = self.value(base, f)?;
                self.int(index, f, "index")?;
                match (b, k) {
                    (Some(Tk::Vec(v)), Some(Tk::Int)) => self.join_elem(v, ElemKind::Int),
                    (Some(Tk::Vec(v)), Some(Tk::Real)) => self.join_elem(v, ElemKind::Real),
                    (Some(Tk::Vec(_)) | None, None) => {}
                    (Some(Tk::Vec(_)) | None, Some(other)) => {
                        if !matches!(other, Tk::Int | Tk::Real) {
                            return Err(SemantError::ty(span, format!("vector elements must be Int or Real, not {}", describe(other))));
                        }
                    }
                    (Some(other), _) => return Err(SemantError::ty(base.span, format!("indexing a {}", describe(other)))),
                }
            }
            Target::Field { base, .. } => {
                self.complex_name(base)?;
                if let Some(k) = k {
                    if !matches!(k, Tk::Int | Tk::Real) {
                        return Err(SemantError::ty(span, "complex components must be numeric"));
                    }
                }
            }
        }
        Ok(())
    }

    fn cond(&mut self, e: &'a Expr, f: Option<FuncId>) -> Result<(), SemantError> {
        match self.expr(e, f)? {
            None | Some(T::Cond) | Some(T::K(Tk::Int | Tk::Real)) => Ok(()),
            Some(other) => Err(SemantError::ty(e.span, format!("condition of type {other:?}"))),
        }
    }

    fn arith(&mut self, op: BinOp, l: Tk, r: Tk, span: Span) -> Result<Tk, SemantError> {
        use Tk::*;
        match (l, r) {
            (Int, Int) => Ok(if op == BinOp::Div { Real } else { Int }),
            (Int | Real, Int | Real) => Ok(Real),
            (Complex, Int | Real | Complex) | (Int | Real, Complex) => match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul => Ok(Complex),
                _ => Err(SemantError::unsupported(span, format!("operator `{}` on complex values", op.symbol()))),
            },
            (a, b) => Err(SemantError::ty(span, format!("operator `{}` on {} and {}", op.symbol(), describe(a), describe(b)))),
        }
    }

    fn expr(&mut self, e: &'a Expr, f: Option<FuncId>) -> Result<Option<T>, SemantError> {
        let t = self.expr_inner(e, f)?;
        if let Some(t) = t {
            self.record(e.id, t);
        } else if self.final_pass {
            return Err(SemantError::ty(e.span, "expression kind could not be determined"));
        }
        Ok(t)
    }

    fn expr_inner(&mut self, e: &'a Expr, f: Option<FuncId>) -> Result<Option<T>, SemantError> {
        Ok(match &e.kind {
            ExprKind::Name(_) => {
                let r = self.slot(e.id);
                self.sym[r.scope][r.index].map(T::K)
            }
            ExprKind::Int(_) => Some(T::K(Tk::Int)),
            ExprKind::Real(_) => Some(T::K(Tk::Real)),
            ExprKind::Str(_) => Some(T::Str),
            ExprKind::List(items) => {
                let v = match self.list_var.get(&e.id) {
                    Some(&v) => v,
                    None => {
                        let v = self.new_var();
                        self.list_var.insert(e.id, v);
                        v
                    }
                };
                for it in items {
                    match self.numeric(it, f, "vector element")? {
                        Some(Tk::Int) => self.join_elem(v, ElemKind::Int),
                        Some(Tk::Real) => self.join_elem(v, ElemKind::Real),
                        _ => {}
                    }
                }
                Some(T::K(Tk::Vec(v)))
            }
            ExprKind::BinOp { op, lhs, rhs } => {
                let is_list = |x: &Expr| matches!(x.kind, ExprKind::List(_));
                if *op == BinOp::Mul && (is_list(lhs) || is_list(rhs)) {
                    let (list, count) = if is_list(lhs) { (lhs, rhs) } else { (rhs, lhs) };
                    if !matches!(&list.kind, ExprKind::List(items) if items.len() == 1) {
                        return Err(SemantError::unsupported(list.span, "repetition of a list display with other than one element"));
                    }
                    self.int(count, f, "repetition count")?;
                    return Ok(self.value(list, f)?.map(T::K));
                }
                let l = self.value(lhs, f)?;
                let r = self.value(rhs, f)?;
                for (k, side) in [(l, lhs), (r, rhs)] {
                    if let Some(Tk::Vec(_) | Tk::Proc(_)) = k {
                        return Err(SemantError::unsupported(side.span, format!("operator `{}` on {}", op.symbol(), describe(k.unwrap()))));
                    }
                }
                match (l, r) {
                    (Some(l), Some(r)) => Some(T::K(self.arith(*op, l, r, e.span)?)),
                    _ => None,
                }
            }
            ExprKind::Unary { op: UnaryOp::Not, operand } => {
                self.cond(operand, f)?;
                Some(T::Cond)
            }
            ExprKind::Unary { operand, .. } => match self.value(operand, f)? {
                None => None,
                Some(k @ (Tk::Int | Tk::Real)) => Some(T::K(k)),
                Some(other) => return Err(SemantError::unsupported(e.span, format!("unary sign on {}", describe(other)))),
            },
            ExprKind::Compare { op, lhs, rhs } => {
                let l = self.value(lhs, f)?;
                let r = self.value(rhs, f)?;
                if let (Some(l), Some(r)) = (l, r) {
                    let ok = match (l, r) {
                        (Tk::Int | Tk::Real, Tk::Int | Tk::Real) => true,
                        (Tk::Complex, Tk::Complex) => matches!(op, CmpOp::Eq | CmpOp::Ne),
                        _ => false,
                    };
                    if !ok {
                        return Err(SemantError::ty(
                            e.span,
                            format!("comparison `{}` of {} and {}", op.symbol(), describe(l), describe(r)),
                        ));
                    }
                }
                Some(T::Cond)
            }
            ExprKind::BoolOp { lhs, rhs, .. } => {
                self.cond(lhs, f)?;
                self.cond(rhs, f)?;
                Some(T::Cond)
            }
            ExprKind::Index { base, index } => self.index_kind(base, index, f)?.map(T::K),
            ExprKind::Field { base, .. } => match self.value(base, f)? {
                None => None,
                Some(Tk::Complex) => Some(T::K(Tk::Real)),
                Some(other) => return Err(SemantError::ty(e.span, format!("`.real`/`.imag` on {}", describe(other)))),
            },
            ExprKind::Call { func, args } => self.call(e, func, args, f)?,
        })
    }

    fn call(&mut self, e: &'a Expr, func: &'a Ident, args: &'a [Expr], f: Option<FuncId>) -> Result<Option<T>, SemantError> {
        let arity = |n: usize| -> Result<(), SemantError> {
            if args.len() != n {
                return Err(SemantError::Arity { name: func.name.clone(), expected: n, found: args.len(), span: e.span });
            }
            Ok(())
        };
        match func.name.as_str() {
            "print" => {
                for a in args {
                    match self.expr(a, f)? {
                        Some(T::K(Tk::Proc(_))) => return Err(SemantError::ty(a.span, "cannot print a function")),
                        Some(T::Cond) => return Err(SemantError::unsupported(a.span, "printing a comparison result")),
                        Some(T::Unit) => return Err(SemantError::ty(a.span, "function without a return value used as a value")),
                        _ => {}
                    }
                }
                Ok(Some(T::Unit))
            }
            "len" => {
                arity(1)?;
                match self.value(&args[0], f)? {
                    None | Some(Tk::Vec(_)) => Ok(Some(T::K(Tk::Int))),
                    Some(other) => Err(SemantError::ty(args[0].span, format!("len() of {}", describe(other)))),
                }
            }
            "complex" => {
                arity(2)?;
                self.numeric(&args[0], f, "complex() argument")?;
                self.numeric(&args[1], f, "complex() argument")?;
                Ok(Some(T::K(Tk::Complex)))
            }
            "load_function" => {
                arity(1)?;
                let ExprKind::Str(name) = &args[0].kind else {
                    return Err(SemantError::unsupported(args[0].span, "load_function() needs a string literal"));
                };
                self.record(args[0].id, T::Str);
                let Some(target) = self.a.top_level_function(name) else {
                    return Err(SemantError::UnknownFunction { name: name.clone(), span: args[0].span });
                };
                Ok(Some(T::K(Tk::Proc(target.id))))
            }
            "range" => Err(SemantError::unsupported(e.span, "range() outside a for loop")),
            _ => {
                let r = self.slot(func.id);
                let callee = self.sym[r.scope][r.index];
                let mut kinds = Vec::with_capacity(args.len());
                for a in args {
                    kinds.push(self.value(a, f)?);
                }
                match callee {
                    None => Ok(None),
                    Some(Tk::Proc(g)) => {
                        let info = &self.a.functions[g];
                        if info.arg_count != args.len() {
                            return Err(SemantError::Arity {
                                name: func.name.clone(),
                                expected: info.arg_count,
                                found: args.len(),
                                span: e.span,
                            });
                        }
                        let scope = info.scope;
                        for (i, (k, a)) in kinds.into_iter().zip(args).enumerate() {
                            if let Some(k) = k {
                                self.join_sym(scope, i, k, a.span)?;
                            }
                        }
                        if self.final_pass {
                            self.calls.entry(f).or_default().insert(g);
                        }
                        if !self.value_return[g] {
                            Ok(Some(T::Unit))
                        } else {
                            Ok(self.ret[g].map(T::K))
                        }
                    }
                    Some(other) => Err(SemantError::ty(func.span, format!("`{}` holds {}, not a function", func.name, describe(other)))),
                }
            }
        }
    }
}
