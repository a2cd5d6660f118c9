//! Span-free structural views of a tree, used for equality checks and dumps.

use super::ast::*;
use super::source::Span;
use std::fmt::Write;

/// S-expression rendering that ignores node ids and spans. Two trees are
/// structurally identical exactly when their shapes are equal.
pub fn shape(m: &Module) -> String {
    let mut out = String::new();
    let _ = write!(out, "(module {}", m.imports_dynamic);
    for s in &m.body {
        out.push(' ');
        stmt(&mut out, s);
    }
    out.push(')');
    out
}

fn stmts(out: &mut String, body: &[Stmt]) {
    out.push('[');
    for (i, s) in body.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        stmt(out, s);
    }
    out.push(']');
}

fn stmt(out: &mut String, s: &Stmt) {
    match &s.kind {
        StmtKind::FunctionDef(f) => {
            let deco = match &f.decorator {
                None => "plain",
                Some(d) if d.defer => "dynamic-defer",
                Some(_) => "dynamic",
            };
            let params: Vec<&str> = f.params.iter().map(|p| p.name.as_str()).collect();
            let _ = write!(out, "(def {} {deco} ({}) ", f.name.name, params.join(" "));
            stmts(out, &f.body);
            out.push(')');
        }
        StmtKind::Assign { target, value } => {
            out.push_str("(assign ");
            target_shape(out, target);
            out.push(' ');
            expr(out, value);
            out.push(')');
        }
        StmtKind::AugAssign { target, op, value } => {
            let _ = write!(out, "(augassign {} ", op.symbol());
            target_shape(out, target);
            out.push(' ');
            expr(out, value);
            out.push(')');
        }
        StmtKind::Return(v) => {
            out.push_str("(return");
            if let Some(v) = v {
                out.push(' ');
                expr(out, v);
            }
            out.push(')');
        }
        StmtKind::If { test, body, orelse } => {
            out.push_str("(if ");
            expr(out, test);
            out.push(' ');
            stmts(out, body);
            out.push(' ');
            stmts(out, orelse);
            out.push(')');
        }
        StmtKind::While { test, body } => {
            out.push_str("(while ");
            expr(out, test);
            out.push(' ');
            stmts(out, body);
            out.push(')');
        }
        StmtKind::For { var, range, body } => {
            let _ = write!(out, "(for {} ", var.name);
            match &range.start {
                Some(s) => expr(out, s),
                None => out.push('_'),
            }
            out.push(' ');
            expr(out, &range.stop);
            let _ = write!(out, " {} ", range.step);
            stmts(out, body);
            out.push(')');
        }
        StmtKind::Expr(e) => {
            out.push_str("(expr ");
            expr(out, e);
            out.push(')');
        }
        StmtKind::Global(n) | StmtKind::Nonlocal(n) => {
            let kw = if matches!(s.kind, StmtKind::Global(_)) { "global" } else { "nonlocal" };
            let names: Vec<&str> = n.iter().map(|i| i.name.as_str()).collect();
            let _ = write!(out, "({kw} {})", names.join(" "));
        }
        StmtKind::Delete(n) => {
            let _ = write!(out, "(del {})", n.name);
        }
        StmtKind::Pass => out.push_str("(pass)"),
        StmtKind::Break => out.push_str("(break)"),
        StmtKind::Continue => out.push_str("(continue)"),
    }
}

fn target_shape(out: &mut String, t: &Target) {
    match t {
        Target::Name(i) => out.push_str(&i.name),
        Target::Index { base, index } => {
            out.push_str("(index ");
            expr(out, base);
            out.push(' ');
            expr(out, index);
            out.push(')');
        }
        Target::Field { base, field } => {
            let _ = write!(out, "(field {} {})", base.name, field.as_str());
        }
    }
}

fn expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Name(n) => out.push_str(n),
        ExprKind::Int(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Real(v) => {
            let _ = write!(out, "real:{:#x}", v.to_bits());
        }
        ExprKind::Str(s) => {
            let _ = write!(out, "{s:?}");
        }
        _ => {
            let head = match &e.kind {
                ExprKind::List(_) => "list".to_string(),
                ExprKind::Call { func, .. } => format!("call {}", func.name),
                ExprKind::BinOp { op, .. } => op.symbol().to_string(),
                ExprKind::Unary { op, .. } => format!("{op:?}"),
                ExprKind::Compare { op, .. } => op.symbol().to_string(),
                ExprKind::BoolOp { op, .. } => format!("{op:?}"),
                ExprKind::Index { .. } => "index".to_string(),
                ExprKind::Field { field, .. } => format!("field {}", field.as_str()),
                _ => unreachable!(),
            };
            let _ = write!(out, "({head}");
            for c in e.children() {
                out.push(' ');
                expr(out, c);
            }
            out.push(')');
        }
    }
}

/// Every (parent span, child span) pair in which the child escapes its parent.
pub fn span_violations(m: &Module) -> Vec<(Span, Span)> {
    let mut bad = Vec::new();
    for s in &m.body {
        check_stmt(m.span, s, &mut bad);
    }
    bad
}

fn check(parent: Span, child: Span, bad: &mut Vec<(Span, Span)>) {
    if !parent.contains(&child) {
        bad.push((parent, child));
    }
}

fn check_stmt(parent: Span, s: &Stmt, bad: &mut Vec<(Span, Span)>) {
    check(parent, s.span, bad);
    let here = s.span;
    match &s.kind {
        StmtKind::FunctionDef(f) => {
            check(here, f.name.span, bad);
            for p in &f.params {
                check(here, p.span, bad);
            }
            if let Some(d) = &f.decorator {
                check(here, d.span, bad);
            }
            for b in &f.body {
                check_stmt(here, b, bad);
            }
        }
        StmtKind::If { body, orelse, .. } => {
            for b in body.iter().chain(orelse) {
                check_stmt(here, b, bad);
            }
        }
        StmtKind::While { body, .. } => {
            for b in body {
                check_stmt(here, b, bad);
            }
        }
        StmtKind::For { var, body, .. } => {
            check(here, var.span, bad);
            for b in body {
                check_stmt(here, b, bad);
            }
        }
        StmtKind::Assign { target, .. } | StmtKind::AugAssign { target, .. } => {
            check(here, target.span(), bad);
            if let Target::Field { base, .. } | Target::Name(base) = target {
                check(here, base.span, bad);
            }
        }
        StmtKind::Global(n) | StmtKind::Nonlocal(n) => {
            for i in n {
                check(here, i.span, bad);
            }
        }
        StmtKind::Delete(n) => check(here, n.span, bad),
        _ => {}
    }
    for e in s.exprs() {
        check_expr(here, e, bad);
    }
}

fn check_expr(parent: Span, e: &Expr, bad: &mut Vec<(Span, Span)>) {
    check(parent, e.span, bad);
    if let ExprKind::Call { func, .. } = &e.kind {
        check(e.span, func.span, bad);
    }
    for c in e.children() {
        check_expr(e.span, c, bad);
    }
}
