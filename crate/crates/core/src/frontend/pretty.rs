use super::ast::*;
use crate::numfmt::real_repr;
use std::fmt::Write;

/// Render a module back to canonical MiniPy text. Parsing the result yields a
/// structurally identical tree.
pub fn pretty_print(m: &Module) -> String {
    let mut out = String::new();
    if m.imports_dynamic {
        out.push_str("from epython import dynamic\n");
    }
    block(&mut out, &m.body, 0);
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn block(out: &mut String, body: &[Stmt], level: usize) {
    for s in body {
        stmt(out, s, level);
    }
}

fn stmt(out: &mut String, s: &Stmt, level: usize) {
    indent(out, level);
    match &s.kind {
        StmtKind::FunctionDef(f) => {
            if let Some(d) = &f.decorator {
                out.push_str(if d.defer { "@dynamic(defer=True)\n" } else { "@dynamic\n" });
                indent(out, level);
            }
            let params: Vec<&str> = f.params.iter().map(|p| p.name.as_str()).collect();
            let _ = writeln!(out, "def {}({}):", f.name.name, params.join(", "));
            block(out, &f.body, level + 1);
        }
        StmtKind::Assign { target, value } => {
            let _ = writeln!(out, "{} = {}", target_text(target), expr(value));
        }
        StmtKind::AugAssign { target, op, value } => {
            let _ = writeln!(out, "{} {}= {}", target_text(target), op.symbol(), expr(value));
        }
        StmtKind::Return(None) => out.push_str("return\n"),
        StmtKind::Return(Some(e)) => {
            let _ = writeln!(out, "return {}", expr(e));
        }
        StmtKind::If { .. } => if_chain(out, s, level, "if"),
        StmtKind::While { test, body } => {
            let _ = writeln!(out, "while {}:", expr(test));
            block(out, body, level + 1);
        }
        StmtKind::For { var, range, body } => {
            let mut args = Vec::new();
            if let Some(start) = &range.start {
                args.push(expr(start));
            }
            args.push(expr(&range.stop));
            if range.step != 1 {
                if range.start.is_none() {
                    args.insert(0, "0".into());
                }
                args.push(range.step.to_string());
            }
            let _ = writeln!(out, "for {} in range({}):", var.name, args.join(", "));
            block(out, body, level + 1);
        }
        StmtKind::Expr(e) => {
            let _ = writeln!(out, "{}", expr(e));
        }
        StmtKind::Global(names) | StmtKind::Nonlocal(names) => {
            let kw = if matches!(s.kind, StmtKind::Global(_)) { "global" } else { "nonlocal" };
            let names: Vec<&str> = names.iter().map(|n| n.name.as_str()).collect();
            let _ = writeln!(out, "{kw} {}", names.join(", "));
        }
        StmtKind::Delete(name) => {
            let _ = writeln!(out, "del({})", name.name);
        }
        StmtKind::Pass => out.push_str("pass\n"),
        StmtKind::Break => out.push_str("break\n"),
        StmtKind::Continue => out.push_str("continue\n"),
    }
}

fn if_chain(out: &mut String, s: &Stmt, level: usize, kw: &str) {
    let StmtKind::If { test, body, orelse } = &s.kind else { return };
    let _ = writeln!(out, "{kw} {}:", expr(test));
    block(out, body, level + 1);
    match orelse.as_slice() {
        [] => {}
        [only] if matches!(only.kind, StmtKind::If { .. }) => {
            indent(out, level);
            if_chain(out, only, level, "elif");
        }
        _ => {
            indent(out, level);
            out.push_str("else:\n");
            block(out, orelse, level + 1);
        }
    }
}

fn target_text(t: &Target) -> String {
    match t {
        Target::Name(id) => id.name.clone(),
        Target::Index { base, index } => format!("{}[{}]", wrap(base, POSTFIX), expr(index)),
        Target::Field { base, field } => format!("{}.{}", base.name, field.as_str()),
    }
}

const OR: u8 = 1;
const AND: u8 = 2;
const NOT: u8 = 3;
const CMP: u8 = 4;
const ADD: u8 = 5;
const MUL: u8 = 6;
const UNARY: u8 = 7;
const POSTFIX: u8 = 8;

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::BoolOp { op: BoolOp::Or, .. } => OR,
        ExprKind::BoolOp { op: BoolOp::And, .. } => AND,
        ExprKind::Unary { op: UnaryOp::Not, .. } => NOT,
        ExprKind::Compare { .. } => CMP,
        ExprKind::BinOp { op: BinOp::Add | BinOp::Sub, .. } => ADD,
        ExprKind::BinOp { .. } => MUL,
        ExprKind::Unary { .. } => UNARY,
        _ => POSTFIX,
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    let s = expr(e);
    if prec(e) < min {
        format!("({s})")
    } else {
        s
    }
}

pub fn expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Name(n) => n.clone(),
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Real(v) => real_repr(*v),
        ExprKind::Str(s) => quote(s),
        ExprKind::List(items) => {
            let items: Vec<String> = items.iter().map(expr).collect();
            format!("[{}]", items.join(", "))
        }
        ExprKind::Call { func, args } => {
            let args: Vec<String> = args.iter().map(expr).collect();
            format!("{}({})", func.name, args.join(", "))
        }
        ExprKind::BinOp { op, lhs, rhs } => {
            let p = prec(e);
            format!("{} {} {}", wrap(lhs, p), op.symbol(), wrap(rhs, p + 1))
        }
        ExprKind::Unary { op: UnaryOp::Not, operand } => format!("not {}", wrap(operand, NOT)),
        ExprKind::Unary { op, operand } => {
            let sym = if *op == UnaryOp::Neg { "-" } else { "+" };
            format!("{sym}{}", wrap(operand, UNARY))
        }
        ExprKind::Compare { op, lhs, rhs } => format!("{} {} {}", wrap(lhs, ADD), op.symbol(), wrap(rhs, ADD)),
        ExprKind::BoolOp { op, lhs, rhs } => {
            let p = prec(e);
            let kw = if *op == BoolOp::And { "and" } else { "or" };
            format!("{} {kw} {}", wrap(lhs, p), wrap(rhs, p + 1))
        }
        ExprKind::Index { base, index } => format!("{}[{}]", wrap(base, POSTFIX), expr(index)),
        ExprKind::Field { base, field } => {
            let b = if matches!(base.kind, ExprKind::Int(_)) { format!("({})", expr(base)) } else { wrap(base, POSTFIX) };
            format!("{b}.{}", field.as_str())
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                let _ = write!(out, "\\x{:02x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
