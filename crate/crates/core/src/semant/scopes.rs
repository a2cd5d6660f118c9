use super::error::SemantError;
use super::types::*;
use crate::frontend::{walk_block, ExprKind, FunctionDef, Ident, Module, NodeId, Stmt, StmtKind, Target, MINIPY};
use std::collections::{BTreeMap, HashMap, HashSet};

/// Build the scope tree and resolve every identifier occurrence to a slot.
pub fn resolve_scopes(module: Module) -> Result<ProgramAnalysis, SemantError> {
    let mut b = Builder { scopes: Vec::new(), functions: Vec::new(), func_by_stmt: HashMap::new() };
    b.scopes.push(new_scope(MODULE_SCOPE, None, 0, None));
    b.collect_defs(&module.body, MODULE_SCOPE, true, None, "")?;

    for sid in 0..b.scopes.len() {
        b.declare(&module, sid)?;
    }
    for sid in 0..b.scopes.len() {
        let body = b.body_of(&module, sid);
        b.bind_block(body, sid)?;
    }

    let mut r = Resolver { b: &b, slots: HashMap::new(), rebound: HashSet::new() };
    for sid in 0..b.scopes.len() {
        r.check_nonlocals(&module, sid)?;
        r.params(&module, sid)?;
        r.block(b.body_of(&module, sid), sid)?;
    }
    let (slots, rebound) = (r.slots, r.rebound);
    let max_depth = b.scopes.iter().map(|s| s.depth).max().unwrap_or(0);
    let nfun = b.functions.len();
    Ok(ProgramAnalysis {
        module,
        scopes: b.scopes,
        functions: b.functions,
        func_by_stmt: b.func_by_stmt,
        slots,
        types: HashMap::new(),
        calls: BTreeMap::new(),
        max_lex_levels: max_depth + 1,
        dispatch: vec![DispatchClass::DynamicDispatch; nfun],
        recursive: vec![false; nfun],
        partition: DynamicPartition::default(),
        rebound,
        inferred: false,
    })
}

fn new_scope(id: ScopeId, parent: Option<ScopeId>, depth: usize, function: Option<FuncId>) -> Scope {
    Scope { id, parent, depth, function, symbols: Vec::new(), by_name: HashMap::new(), globals: HashSet::new(), nonlocals: HashSet::new() }
}

struct Builder {
    scopes: Vec<Scope>,
    functions: Vec<FunctionInfo>,
    func_by_stmt: HashMap<NodeId, FuncId>,
}

/// Locate a function definition by statement id.
pub(crate) fn find_def(body: &[Stmt], id: NodeId) -> Option<&FunctionDef> {
    for s in body {
        if let StmtKind::FunctionDef(f) = &s.kind {
            if s.id == id {
                return Some(f);
            }
            if let Some(found) = find_def(&f.body, id) {
                return Some(found);
            }
        }
        let nested: Vec<&[Stmt]> = match &s.kind {
            StmtKind::If { body, orelse, .. } => vec![body, orelse],
            StmtKind::While { body, .. } | StmtKind::For { body, .. } => vec![body],
            _ => vec![],
        };
        for b in nested {
            if let Some(found) = find_def(b, id) {
                return Some(found);
            }
        }
    }
    None
}

impl Builder {
    fn body_of<'m>(&self, module: &'m Module, sid: ScopeId) -> &'m [Stmt] {
        match self.scopes[sid].function {
            None => &module.body,
            Some(f) => find_def(&module.body, self.functions[f].def_stmt).map(|d| d.body.as_slice()).unwrap_or(&[]),
        }
    }

    fn def_of<'m>(&self, module: &'m Module, sid: ScopeId) -> Option<&'m FunctionDef> {
        let f = self.scopes[sid].function?;
        find_def(&module.body, self.functions[f].def_stmt)
    }

    /// Preorder walk creating one scope per function in textual order.
    fn collect_defs(
        &mut self,
        body: &[Stmt],
        parent: ScopeId,
        direct_module_child: bool,
        root: Option<FuncId>,
        prefix: &str,
    ) -> Result<(), SemantError> {
        for s in body {
            match &s.kind {
                StmtKind::FunctionDef(f) => {
                    let id = self.functions.len();
                    let sid = self.scopes.len();
                    let depth = self.scopes[parent].depth + 1;
                    let qualified = if prefix.is_empty() { f.name.name.clone() } else { format!("{prefix}.{}", f.name.name) };
                    self.scopes.push(new_scope(sid, Some(parent), depth, Some(id)));
                    self.functions.push(FunctionInfo {
                        id,
                        name: f.name.name.clone(),
                        qualified_name: qualified.clone(),
                        mangled: format!("oly_e{}", id + 1),
                        scope: sid,
                        parent_scope: parent,
                        depth,
                        def_stmt: s.id,
                        span: s.span,
                        arg_count: f.params.len(),
                        is_dynamic: f.is_dynamic(),
                        is_deferred: f.is_deferred(),
                        top_level: direct_module_child,
                        root: root.unwrap_or(id),
                        return_kind: None,
                        binding: (parent, usize::MAX),
                    });
                    self.func_by_stmt.insert(s.id, id);
                    self.collect_defs(&f.body, sid, false, Some(root.unwrap_or(id)), &qualified)?;
                }
                StmtKind::If { body, orelse, .. } => {
                    self.collect_defs(body, parent, false, root, prefix)?;
                    self.collect_defs(orelse, parent, false, root, prefix)?;
                }
                StmtKind::While { body, .. } | StmtKind::For { body, .. } => {
                    self.collect_defs(body, parent, false, root, prefix)?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Parameters plus `global`/`nonlocal` declarations.
    fn declare(&mut self, module: &Module, sid: ScopeId) -> Result<(), SemantError> {
        if let Some(def) = self.def_of(module, sid) {
            for p in &def.params {
                if self.scopes[sid].by_name.contains_key(&p.name) {
                    return Err(SemantError::ty(p.span, format!("duplicate parameter `{}`", p.name)));
                }
                reject_builtin(p)?;
                self.add_symbol(sid, p, true);
            }
        }
        let body = self.body_of(module, sid);
        let mut decls: Vec<(bool, Ident)> = Vec::new();
        walk_block(body, &mut |s| match &s.kind {
            StmtKind::Global(names) => decls.extend(names.iter().map(|n| (true, n.clone()))),
            StmtKind::Nonlocal(names) => decls.extend(names.iter().map(|n| (false, n.clone()))),
            _ => {}
        });
        for (is_global, n) in decls {
            let scope = &mut self.scopes[sid];
            if scope.function.is_none() {
                if is_global {
                    continue;
                }
                return Err(SemantError::NonlocalWithoutBinding { name: n.name, span: n.span });
            }
            if scope.by_name.contains_key(&n.name) {
                return Err(SemantError::ty(n.span, format!("`{}` is a parameter and cannot be declared global/nonlocal", n.name)));
            }
            let (this, other) = if is_global { (&mut scope.globals, &scope.nonlocals) } else { (&mut scope.nonlocals, &scope.globals) };
            if other.contains(&n.name) {
                return Err(SemantError::ty(n.span, format!("`{}` declared both global and nonlocal", n.name)));
            }
            this.insert(n.name);
        }
        Ok(())
    }

    fn add_symbol(&mut self, sid: ScopeId, name: &Ident, is_argument: bool) -> usize {
        let scope = &mut self.scopes[sid];
        if let Some(&i) = scope.by_name.get(&name.name) {
            return i;
        }
        let i = scope.symbols.len();
        scope.symbols.push(SymbolEntry {
            name: name.name.clone(),
            kind: None,
            def_level: scope.depth,
            offset: i,
            is_dynamic: false,
            is_deferred: false,
            is_argument,
            function: None,
            span: name.span,
        });
        scope.by_name.insert(name.name.clone(), i);
        i
    }

    /// Scope that receives a binding of `name` made in `sid`, or None for
    /// `nonlocal` names (bound elsewhere).
    fn binding_scope(&self, sid: ScopeId, name: &str) -> Option<ScopeId> {
        let s = &self.scopes[sid];
        if s.globals.contains(name) {
            Some(MODULE_SCOPE)
        } else if s.nonlocals.contains(name) {
            None
        } else {
            Some(sid)
        }
    }

    fn bind_block(&mut self, body: &[Stmt], sid: ScopeId) -> Result<(), SemantError> {
        let mut binds: Vec<(Ident, Option<NodeId>)> = Vec::new();
        walk_block(body, &mut |s| match &s.kind {
            StmtKind::Assign { target: Target::Name(n), .. } | StmtKind::AugAssign { target: Target::Name(n), .. } => {
                binds.push((n.clone(), None))
            }
            StmtKind::For { var, .. } => binds.push((var.clone(), None)),
            StmtKind::FunctionDef(f) => binds.push((f.name.clone(), Some(s.id))),
            _ => {}
        });
        for (ident, def) in binds {
            reject_builtin(&ident)?;
            let Some(target) = self.binding_scope(sid, &ident.name) else { continue };
            let idx = self.add_symbol(target, &ident, false);
            if let Some(stmt) = def {
                let fid = self.func_by_stmt[&stmt];
                let sym = &mut self.scopes[target].symbols[idx];
                if let Some(prev) = sym.function {
                    if prev != fid {
                        return Err(SemantError::RedeclarationKind {
                            name: ident.name.clone(),
                            span: ident.span,
                            first: "function".into(),
                            second: "second function definition".into(),
                        });
                    }
                }
                sym.function = Some(fid);
                sym.is_dynamic = self.functions[fid].is_dynamic;
                sym.is_deferred = self.functions[fid].is_deferred;
                self.functions[fid].binding = (target, idx);
            }
        }
        Ok(())
    }
}

fn reject_builtin(id: &Ident) -> Result<(), SemantError> {
    if MINIPY.is_builtin(&id.name) {
        return Err(SemantError::unsupported(id.span, format!("rebinding builtin `{}`", id.name)));
    }
    Ok(())
}

struct Resolver<'b> {
    b: &'b Builder,
    slots: HashMap<NodeId, SlotRef>,
    rebound: HashSet<(ScopeId, usize)>,
}

impl Resolver<'_> {
    fn scope(&self, sid: ScopeId) -> &Scope {
        &self.b.scopes[sid]
    }

    /// Python-style lookup from scope `sid`.
    fn lookup(&self, sid: ScopeId, name: &str) -> Option<(ScopeId, usize)> {
        let s = self.scope(sid);
        if s.function.is_some() && s.globals.contains(name) {
            return self.scope(MODULE_SCOPE).by_name.get(name).map(|&i| (MODULE_SCOPE, i));
        }
        if s.nonlocals.contains(name) {
            return self.enclosing_local(sid, name);
        }
        if let Some(&i) = s.by_name.get(name) {
            return Some((sid, i));
        }
        let mut cur = s.parent;
        while let Some(p) = cur {
            let ps = self.scope(p);
            if ps.function.is_some() && ps.globals.contains(name) {
                break;
            }
            if let Some(&i) = ps.by_name.get(name) {
                return Some((p, i));
            }
            cur = ps.parent;
        }
        self.scope(MODULE_SCOPE).by_name.get(name).map(|&i| (MODULE_SCOPE, i))
    }

    /// Nearest enclosing function scope holding `name` as a true local.
    fn enclosing_local(&self, sid: ScopeId, name: &str) -> Option<(ScopeId, usize)> {
        let mut cur = self.scope(sid).parent;
        while let Some(p) = cur {
            let ps = self.scope(p);
            if ps.function.is_none() {
                return None;
            }
            if let Some(&i) = ps.by_name.get(name) {
                return Some((p, i));
            }
            cur = ps.parent;
        }
        None
    }

    fn check_nonlocals(&self, module: &Module, sid: ScopeId) -> Result<(), SemantError> {
        let body = self.b.body_of(module, sid);
        let mut err = None;
        walk_block(body, &mut |s| {
            if let StmtKind::Nonlocal(names) = &s.kind {
                for n in names {
                    if err.is_none() && self.enclosing_local(sid, &n.name).is_none() {
                        err = Some(SemantError::NonlocalWithoutBinding { name: n.name.clone(), span: n.span });
                    }
                }
            }
        });
        err.map_or(Ok(()), Err)
    }

    fn record(&mut self, sid: ScopeId, id: &Ident, write: bool) -> Result<(), SemantError> {
        let Some((scope, index)) = self.lookup(sid, &id.name) else {
            if MINIPY.is_builtin(&id.name) {
                return Err(SemantError::unsupported(id.span, format!("builtin `{}` used as a value", id.name)));
            }
            return Err(SemantError::UnboundName { name: id.name.clone(), span: id.span });
        };
        self.slots.insert(id.id, SlotRef { scope, index, use_scope: sid, use_depth: self.scope(sid).depth });
        if write {
            self.rebound.insert((scope, index));
        }
        Ok(())
    }

    fn params(&mut self, module: &Module, sid: ScopeId) -> Result<(), SemantError> {
        if let Some(def) = self.b.def_of(module, sid) {
            for p in &def.params {
                self.record(sid, p, false)?;
            }
        }
        Ok(())
    }

    fn block(&mut self, body: &[Stmt], sid: ScopeId) -> Result<(), SemantError> {
        for s in body {
            self.stmt(s, sid)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt, sid: ScopeId) -> Result<(), SemantError> {
        match &s.kind {
            StmtKind::FunctionDef(f) => {
                self.record(sid, &f.name, false)?;
            }
            StmtKind::Assign { target, value } | StmtKind::AugAssign { target, value, .. } => {
                self.expr(value, sid)?;
                self.target(target, sid)?;
            }
            StmtKind::Return(v) => {
                if self.scope(sid).function.is_none() {
                    return Err(SemantError::ty(s.span, "`return` outside function"));
                }
                if let Some(v) = v {
                    self.expr(v, sid)?;
                }
            }
            StmtKind::If { test, body, orelse } => {
                self.expr(test, sid)?;
                self.block(body, sid)?;
                self.block(orelse, sid)?;
            }
            StmtKind::While { test, body } => {
                self.expr(test, sid)?;
                self.block(body, sid)?;
            }
            StmtKind::For { var, range, body } => {
                if let Some(start) = &range.start {
                    self.expr(start, sid)?;
                }
                self.expr(&range.stop, sid)?;
                self.record(sid, var, true)?;
                self.block(body, sid)?;
            }
            StmtKind::Expr(e) => self.expr(e, sid)?,
            StmtKind::Delete(n) => self.record(sid, n, true)?,
            StmtKind::Global(_) | StmtKind::Nonlocal(_) | StmtKind::Pass | StmtKind::Break | StmtKind::Continue => {}
        }
        Ok(())
    }

    fn target(&mut self, t: &Target, sid: ScopeId) -> Result<(), SemantError> {
        match t {
            Target::Name(n) => self.record(sid, n, true),
            Target::Index { base, index } => {
                self.expr(base, sid)?;
                self.expr(index, sid)
            }
            Target::Field { base, .. } => self.record(sid, base, false),
        }
    }

    fn expr(&mut self, e: &crate::frontend::Expr, sid: ScopeId) -> Result<(), SemantError> {
        match &e.kind {
            ExprKind::Name(n) => {
                let id = Ident { id: e.id, span: e.span, name: n.clone() };
                self.record(sid, &id, false)?;
            }
            ExprKind::Call { func, .. } => {
                if !MINIPY.is_builtin(&func.name) {
                    self.record(sid, func, false)?;
                }
            }
            _ => {}
        }
        for c in e.children() {
            self.expr(c, sid)?;
        }
        Ok(())
    }
}
