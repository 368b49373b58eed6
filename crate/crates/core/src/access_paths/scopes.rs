use crate::frontend::{Ast, DeclKind, FuncBody, NodeId, NodeKind};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BindingId(pub u32);

impl BindingId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingKind {
    Var,
    Let,
    Const,
    Param,
    Func,
    CatchParam,
    Import,
}

/// One declared name, with everything the analyses need to know about how
/// it is written.
#[derive(Debug, Clone)]
pub struct Binding {
    pub name: String,
    pub kind: BindingKind,
    /// Enclosing `Function` node; `None` for top-level bindings.
    pub owner: Option<NodeId>,
    pub decl_name_node: NodeId,
    /// Declarator initializer, when present.
    pub init: Option<NodeId>,
    /// Plain `=` assignments targeting this binding (the `Assign` nodes).
    pub assignments: Vec<NodeId>,
    /// Compound assignments (`+=`, ...) targeting this binding.
    pub compound_assignments: Vec<NodeId>,
    /// True when some assignment happens inside a function nested below the
    /// owner; such bindings are not single-assignment analyzable.
    pub assigned_in_nested_fn: bool,
}

/// Lexical binding structure of one file.
#[derive(Debug, Clone, Default)]
pub struct ScopeInfo {
    bindings: Vec<Binding>,
    /// Ident nodes in use or assignment-target position -> binding.
    uses: HashMap<NodeId, BindingId>,
    /// Ident nodes at declaration sites (declarator names, params, ...).
    decls: HashMap<NodeId, BindingId>,
}

impl ScopeInfo {
    pub fn binding(&self, id: BindingId) -> &Binding {
        &self.bindings[id.index()]
    }

    pub fn bindings(&self) -> impl Iterator<Item = (BindingId, &Binding)> {
        self.bindings
            .iter()
            .enumerate()
            .map(|(i, b)| (BindingId(i as u32), b))
    }

    /// Binding referenced by an `Ident` expression, `None` for globals.
    pub fn resolve_use(&self, ident: NodeId) -> Option<BindingId> {
        self.uses.get(&ident).copied()
    }

    /// Binding declared by an `Ident` in declaration position.
    pub fn resolve_decl(&self, ident: NodeId) -> Option<BindingId> {
        self.decls.get(&ident).copied()
    }

    /// Whether the binding is only ever written by its declaration
    /// initializer. Such bindings denote one object for their lifetime.
    pub fn is_single_init(&self, id: BindingId) -> bool {
        let b = self.binding(id);
        b.assignments.is_empty()
            && b.compound_assignments.is_empty()
            && !b.assigned_in_nested_fn
    }
}

/// Resolves every identifier in the file to its lexical binding, honoring
/// `var` function-scoping, `let`/`const` block-scoping, parameter scopes,
/// and shadowing. Unresolved identifiers are globals.
pub fn resolve_scopes(ast: &Ast) -> ScopeInfo {
    let mut r = Resolver {
        ast,
        info: ScopeInfo::default(),
        scopes: Vec::new(),
        owners: vec![None],
    };
    let root = ast.root();
    r.push_scope();
    r.hoist_function_scope(root);
    r.hoist_block_scope(root);
    r.visit_stmt_list(root);
    r.pop_scope();
    r.info
}

struct Resolver<'a> {
    ast: &'a Ast,
    info: ScopeInfo,
    scopes: Vec<HashMap<String, BindingId>>,
    owners: Vec<Option<NodeId>>,
}

impl Resolver<'_> {
    fn owner(&self) -> Option<NodeId> {
        *self.owners.last().unwrap()
    }

    fn push_scope(&mut self) {
        self.scopes.push(HashMap::new());
    }

    fn pop_scope(&mut self) {
        self.scopes.pop();
    }

    fn declare(&mut self, name: &str, kind: BindingKind, name_node: NodeId) -> BindingId {
        if let Some(&existing) = self.scopes.last().unwrap().get(name) {
            // re-declaration in the same scope (e.g. repeated `var`)
            self.info.decls.insert(name_node, existing);
            return existing;
        }
        let id = BindingId(self.info.bindings.len() as u32);
        self.info.bindings.push(Binding {
            name: name.to_string(),
            kind,
            owner: self.owner(),
            decl_name_node: name_node,
            init: None,
            assignments: Vec::new(),
            compound_assignments: Vec::new(),
            assigned_in_nested_fn: false,
        });
        self.scopes.last_mut().unwrap().insert(name.to_string(), id);
        self.info.decls.insert(name_node, id);
        id
    }

    fn lookup(&self, name: &str) -> Option<BindingId> {
        for scope in self.scopes.iter().rev() {
            if let Some(&id) = scope.get(name) {
                return Some(id);
            }
        }
        None
    }

    /// Registers `var` declarators and function-declaration names reachable
    /// without crossing a nested function boundary.
    fn hoist_function_scope(&mut self, node: NodeId) {
        match self.ast.kind(node) {
            NodeKind::VarDecl {
                kind: DeclKind::Var,
                declarators,
            } => {
                for d in declarators.clone() {
                    if let Some(name) = self.ast.ident_name(d.name).map(str::to_string) {
                        self.declare(&name, BindingKind::Var, d.name);
                    }
                }
            }
            NodeKind::FuncDecl { func } => {
                if let NodeKind::Function {
                    name: Some(name), ..
                } = self.ast.kind(*func)
                {
                    let name = name.clone();
                    self.declare(&name, BindingKind::Func, *func);
                }
                return; // do not descend into the function body
            }
            NodeKind::Function { .. } => return,
            _ => {}
        }
        for c in self.ast.children(node) {
            self.hoist_function_scope(c);
        }
    }

    /// Registers `let`/`const` declarators and import locals of the
    /// immediate statement list of a block.
    fn hoist_block_scope(&mut self, block: NodeId) {
        let body = match self.ast.kind(block) {
            NodeKind::Program { body } | NodeKind::Block { body } => body.clone(),
            _ => return,
        };
        for stmt in body {
            match self.ast.kind(stmt) {
                NodeKind::VarDecl {
                    kind: k @ (DeclKind::Let | DeclKind::Const),
                    declarators,
                } => {
                    let bk = if *k == DeclKind::Const {
                        BindingKind::Const
                    } else {
                        BindingKind::Let
                    };
                    for d in declarators.clone() {
                        if let Some(name) = self.ast.ident_name(d.name).map(str::to_string) {
                            self.declare(&name, bk, d.name);
                        }
                    }
                }
                NodeKind::ImportDefault { local, .. } => {
                    if let Some(name) = self.ast.ident_name(*local).map(str::to_string) {
                        let local = *local;
                        self.declare(&name, BindingKind::Import, local);
                    }
                }
                _ => {}
            }
        }
    }

    fn visit_stmt_list(&mut self, node: NodeId) {
        let body = match self.ast.kind(node) {
            NodeKind::Program { body } | NodeKind::Block { body } => body.clone(),
            _ => vec![node],
        };
        for stmt in body {
            self.visit_stmt(stmt);
        }
    }

    fn visit_stmt(&mut self, stmt: NodeId) {
        match self.ast.kind(stmt).clone() {
            NodeKind::Block { .. } => {
                self.push_scope();
                self.hoist_block_scope(stmt);
                self.visit_stmt_list(stmt);
                self.pop_scope();
            }
            NodeKind::VarDecl { declarators, .. } => {
                for d in declarators {
                    if let Some(init) = d.init {
                        self.visit_expr(init);
                        if let Some(b) = self.info.decls.get(&d.name).copied() {
                            self.info.bindings[b.index()].init = Some(init);
                        }
                    }
                }
            }
            NodeKind::FuncDecl { func } => self.visit_function(func),
            NodeKind::ExprStmt { expr } => self.visit_expr(expr),
            NodeKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.visit_expr(cond);
                self.visit_stmt(then_branch);
                if let Some(e) = else_branch {
                    self.visit_stmt(e);
                }
            }
            NodeKind::While { cond, body } => {
                self.visit_expr(cond);
                self.visit_stmt(body);
            }
            NodeKind::Return { value } => {
                if let Some(v) = value {
                    self.visit_expr(v);
                }
            }
            NodeKind::Try {
                body,
                catch_param,
                catch_body,
                finally_body,
            } => {
                self.visit_stmt(body);
                if let Some(cb) = catch_body {
                    self.push_scope();
                    if let Some(p) = catch_param {
                        if let Some(name) = self.ast.ident_name(p).map(str::to_string) {
                            self.declare(&name, BindingKind::CatchParam, p);
                        }
                    }
                    self.hoist_block_scope(cb);
                    self.visit_stmt_list(cb);
                    self.pop_scope();
                }
                if let Some(fb) = finally_body {
                    self.visit_stmt(fb);
                }
            }
            NodeKind::ImportDefault { .. } | NodeKind::UnanalyzedStmt => {}
            _ => self.visit_expr(stmt),
        }
    }

    fn visit_function(&mut self, func: NodeId) {
        let NodeKind::Function {
            name, params, body, ..
        } = self.ast.kind(func).clone()
        else {
            return;
        };
        self.push_scope();
        self.owners.push(Some(func));
        // a named function expression can refer to itself
        if let Some(n) = &name {
            if !self.info.decls.contains_key(&func) {
                self.declare(n, BindingKind::Func, func);
            }
        }
        for p in &params {
            if let Some(pname) = self.ast.ident_name(*p).map(str::to_string) {
                self.declare(&pname, BindingKind::Param, *p);
            }
        }
        match body {
            FuncBody::Block(b) => {
                self.hoist_function_scope(b);
                self.hoist_block_scope(b);
                self.visit_stmt_list(b);
            }
            FuncBody::Expr(e) => self.visit_expr(e),
        }
        self.owners.pop();
        self.pop_scope();
    }

    fn visit_expr(&mut self, expr: NodeId) {
        match self.ast.kind(expr).clone() {
            NodeKind::Ident { name } => {
                if let Some(b) = self.lookup(&name) {
                    self.info.uses.insert(expr, b);
                }
            }
            NodeKind::Function { .. } => self.visit_function(expr),
            NodeKind::Assign { op, target, value } => {
                self.visit_expr(value);
                self.visit_expr(target);
                if let NodeKind::Ident { .. } = self.ast.kind(target) {
                    if let Some(b) = self.info.uses.get(&target).copied() {
                        let in_nested = self.info.bindings[b.index()].owner != self.owner();
                        let binding = &mut self.info.bindings[b.index()];
                        match op {
                            crate::frontend::AssignOp::Assign => binding.assignments.push(expr),
                            crate::frontend::AssignOp::Compound => {
                                binding.compound_assignments.push(expr)
                            }
                        }
                        if in_nested {
                            binding.assigned_in_nested_fn = true;
                        }
                    }
                }
            }
            _ => {
                for c in self.ast.children(expr) {
                    self.visit_expr(c);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, SourceFile};

    fn scopes_of(src: &str) -> (Ast, ScopeInfo) {
        let ast = parse(&SourceFile::new("t.js", src)).unwrap();
        let info = resolve_scopes(&ast);
        (ast, info)
    }

    fn ident_uses<'a>(ast: &'a Ast, name: &'a str) -> impl Iterator<Item = NodeId> + 'a {
        ast.ids().filter(move |&id| {
            matches!(ast.kind(id), NodeKind::Ident { name: n } if n == name)
                && !matches!(
                    ast.parent(id).map(|p| ast.kind(p)),
                    Some(NodeKind::VarDecl { .. }) | Some(NodeKind::ImportDefault { .. })
                )
        })
    }

    #[test]
    fn parameter_shadows_import() {
        let src = "import path from 'path';\nfunction f(path) {\n  return path.length;\n}\nlet d = f(path);\n";
        let (ast, info) = scopes_of(src);
        let uses: Vec<NodeId> = ident_uses(&ast, "path").collect();
        // inner use (line 3) binds to the parameter, outer use (line 5) to the import
        let mut kinds: Vec<BindingKind> = uses
            .iter()
            .filter_map(|u| info.resolve_use(*u))
            .map(|b| info.binding(b).kind)
            .collect();
        kinds.sort_by_key(|k| format!("{k:?}"));
        assert_eq!(kinds, vec![BindingKind::Import, BindingKind::Param]);
    }

    #[test]
    fn unresolved_identifiers_are_globals() {
        let (ast, info) = scopes_of("let y = unknownGlobal.x;\nconsole.log(y);\n");
        for u in ident_uses(&ast, "unknownGlobal").chain(ident_uses(&ast, "console")) {
            assert!(info.resolve_use(u).is_none());
        }
        assert_eq!(ident_uses(&ast, "y").count(), 1);
    }

    #[test]
    fn var_hoists_to_function_scope() {
        let src = "function f() {\n  if (c) { var x = 1; }\n  return x;\n}\n";
        let (ast, info) = scopes_of(src);
        let use_x = ident_uses(&ast, "x").next().unwrap();
        assert!(info.resolve_use(use_x).is_some());
    }

    #[test]
    fn reassignment_tracking() {
        let src = "let a = u();\na = v();\nfunction g() { a = w(); }\nlet b = 1;\n";
        let (_, info) = scopes_of(src);
        let a = info
            .bindings()
            .find(|(_, b)| b.name == "a")
            .map(|(id, _)| id)
            .unwrap();
        assert_eq!(info.binding(a).assignments.len(), 2);
        assert!(info.binding(a).assigned_in_nested_fn);
        let b = info
            .bindings()
            .find(|(_, b)| b.name == "b")
            .map(|(id, _)| id)
            .unwrap();
        assert!(info.is_single_init(b));
    }
}
