use super::scopes::{BindingId, BindingKind, ScopeInfo};
use super::{AccessPath, BuiltinKind};
use crate::frontend::{AssignOp, Ast, NodeId, NodeKind};
use std::collections::{BTreeSet, HashMap};

/// Controls which roots are tracked and how large path sets may grow.
#[derive(Debug, Clone)]
pub struct InferOptions {
    /// Modules whose imports seed `require` roots; `None` tracks all.
    pub tracked_modules: Option<BTreeSet<String>>,
    /// Whether literals seed the five built-in roots.
    pub track_builtins: bool,
    /// Paths kept per expression or binding; smaller (fewer-step) paths win
    /// when the bound is hit.
    pub path_cap: usize,
}

impl Default for InferOptions {
    fn default() -> Self {
        Self {
            tracked_modules: None,
            track_builtins: true,
            path_cap: 16,
        }
    }
}

impl InferOptions {
    fn module_tracked(&self, name: &str) -> bool {
        match &self.tracked_modules {
            None => true,
            Some(set) => set.contains(name),
        }
    }
}

/// Result of the flow-insensitive path inference: expression nodes mapped to
/// finite, non-empty path sets. Unmapped expressions are absent.
#[derive(Debug, Clone, Default)]
pub struct PathMap {
    exprs: HashMap<NodeId, Vec<AccessPath>>,
    bindings: HashMap<BindingId, Vec<AccessPath>>,
}

impl PathMap {
    /// Paths of an expression; `None` when the expression has no tracked
    /// root behind it.
    pub fn paths(&self, expr: NodeId) -> Option<&[AccessPath]> {
        self.exprs.get(&expr).map(|v| v.as_slice())
    }

    pub fn binding_paths(&self, binding: BindingId) -> Option<&[AccessPath]> {
        self.bindings.get(&binding).map(|v| v.as_slice())
    }

    pub fn mapped_exprs(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.exprs.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.exprs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exprs.is_empty()
    }
}

const MAX_ROUNDS: usize = 64;

/// Infers, for every expression, the set of access paths representing its
/// value. Cheap by construction: context- and flow-insensitive, with local
/// one-level call-site binding for functions declared in the same file.
pub fn infer_paths(ast: &Ast, scopes: &ScopeInfo, options: &InferOptions) -> PathMap {
    let mut state = Infer {
        ast,
        scopes,
        options,
        exprs: HashMap::new(),
        bindings: HashMap::new(),
        changed: false,
    };

    state.run_to_fixpoint();

    // Local call-site argument binding, applied once on the settled paths;
    // chains through further calls deliberately do not propagate.
    let mut updates: Vec<(BindingId, Vec<AccessPath>)> = Vec::new();
    for id in ast.ids() {
        let NodeKind::Call { callee, args } = ast.kind(id) else {
            continue;
        };
        let Some(func) = state.local_function_target(*callee) else {
            continue;
        };
        let NodeKind::Function { params, .. } = ast.kind(func) else {
            continue;
        };
        for (i, arg) in args.iter().enumerate() {
            let Some(param) = params.get(i) else { break };
            let Some(param_binding) = scopes.resolve_decl(*param) else {
                continue;
            };
            if let Some(paths) = state.exprs.get(arg) {
                updates.push((param_binding, paths.iter().cloned().collect()));
            }
        }
    }
    for (binding, paths) in updates {
        state.union_binding(binding, paths.into_iter());
    }

    state.run_to_fixpoint();

    PathMap {
        exprs: state
            .exprs
            .into_iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(k, s)| (k, s.into_iter().collect()))
            .collect(),
        bindings: state
            .bindings
            .into_iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(k, s)| (k, s.into_iter().collect()))
            .collect(),
    }
}

struct Infer<'a> {
    ast: &'a Ast,
    scopes: &'a ScopeInfo,
    options: &'a InferOptions,
    exprs: HashMap<NodeId, BTreeSet<AccessPath>>,
    bindings: HashMap<BindingId, BTreeSet<AccessPath>>,
    changed: bool,
}

impl Infer<'_> {
    fn run_to_fixpoint(&mut self) {
        for _ in 0..MAX_ROUNDS {
            self.changed = false;
            self.round();
            if !self.changed {
                break;
            }
        }
    }

    fn cap_set(options: &InferOptions, set: &mut BTreeSet<AccessPath>) {
        if set.len() > options.path_cap {
            let mut v: Vec<AccessPath> = std::mem::take(set).into_iter().collect();
            v.sort_by(|a, b| (a.steps.len(), a).cmp(&(b.steps.len(), b)));
            v.truncate(options.path_cap);
            *set = v.into_iter().collect();
        }
    }

    /// Inserts paths, enforces the cap, and reports whether the set really
    /// changed (insertions can be fully evicted at the cap boundary).
    fn union_into(
        options: &InferOptions,
        set: &mut BTreeSet<AccessPath>,
        paths: impl Iterator<Item = AccessPath>,
    ) -> bool {
        let snapshot = (set.len() >= options.path_cap).then(|| set.clone());
        let mut grew = false;
        for p in paths {
            grew |= set.insert(p);
        }
        if !grew {
            return false;
        }
        Self::cap_set(options, set);
        match snapshot {
            Some(before) => *set != before,
            None => true,
        }
    }

    fn union_expr(&mut self, expr: NodeId, paths: impl Iterator<Item = AccessPath>) {
        let set = self.exprs.entry(expr).or_default();
        self.changed |= Self::union_into(self.options, set, paths);
    }

    fn union_binding(&mut self, binding: BindingId, paths: impl Iterator<Item = AccessPath>) {
        let set = self.bindings.entry(binding).or_default();
        self.changed |= Self::union_into(self.options, set, paths);
    }

    fn expr_paths_cloned(&self, expr: NodeId) -> Vec<AccessPath> {
        self.exprs
            .get(&expr)
            .map(|s| s.iter().cloned().collect())
            .unwrap_or_default()
    }

    /// `require('m')` call with an unshadowed `require` callee.
    fn require_module(&self, callee: NodeId, args: &[NodeId]) -> Option<String> {
        if self.ast.ident_name(callee) != Some("require") {
            return None;
        }
        if self.scopes.resolve_use(callee).is_some() {
            return None; // shadowed
        }
        match args.first().map(|a| self.ast.kind(*a)) {
            Some(NodeKind::StringLit { value }) if !value.is_empty() => Some(value.clone()),
            _ => None,
        }
    }

    /// Function node named by a callee identifier when the binding is a
    /// same-file function: a declaration, or a variable whose only value is
    /// a function literal.
    fn local_function_target(&self, callee: NodeId) -> Option<NodeId> {
        let binding_id = self.scopes.resolve_use(callee)?;
        let binding = self.scopes.binding(binding_id);
        match binding.kind {
            BindingKind::Func => Some(binding.decl_name_node),
            BindingKind::Let | BindingKind::Const | BindingKind::Var => {
                if !binding.assignments.is_empty() || binding.assigned_in_nested_fn {
                    return None;
                }
                let init = binding.init?;
                matches!(self.ast.kind(init), NodeKind::Function { .. }).then_some(init)
            }
            _ => None,
        }
    }

    fn round(&mut self) {
        for id in self.ast.ids() {
            match self.ast.kind(id).clone() {
                NodeKind::StringLit { .. } if self.options.track_builtins => {
                    self.union_expr(id, std::iter::once(AccessPath::builtin(BuiltinKind::String)));
                }
                NodeKind::NumberLit { .. } if self.options.track_builtins => {
                    self.union_expr(id, std::iter::once(AccessPath::builtin(BuiltinKind::Number)));
                }
                NodeKind::BoolLit { .. } if self.options.track_builtins => {
                    self.union_expr(
                        id,
                        std::iter::once(AccessPath::builtin(BuiltinKind::Boolean)),
                    );
                }
                NodeKind::ArrayLit { .. } if self.options.track_builtins => {
                    self.union_expr(id, std::iter::once(AccessPath::builtin(BuiltinKind::Array)));
                }
                NodeKind::Ident { .. } => {
                    if let Some(b) = self.scopes.resolve_use(id) {
                        if let Some(paths) = self.bindings.get(&b) {
                            let paths: Vec<AccessPath> = paths.iter().cloned().collect();
                            self.union_expr(id, paths.into_iter());
                        }
                    }
                }
                NodeKind::Member { object, property } => {
                    if let Some(name) = property.const_name() {
                        let base = self.expr_paths_cloned(object);
                        let name = name.to_string();
                        self.union_expr(id, base.into_iter().map(|p| p.prop(name.clone())));
                    }
                }
                NodeKind::Call { callee, args } => {
                    if let Some(module) = self.require_module(callee, &args) {
                        if self.options.module_tracked(&module) {
                            self.union_expr(id, std::iter::once(AccessPath::require(module)));
                        }
                        continue;
                    }
                    let callee_paths = self.expr_paths_cloned(callee);
                    if callee_paths.is_empty() {
                        continue;
                    }
                    self.union_expr(id, callee_paths.iter().map(|p| p.call()));
                    // function literals passed as arguments, and their
                    // parameters (error-first callback parameters are
                    // skipped so data arguments get stable indices)
                    for (i, arg) in args.iter().enumerate() {
                        let NodeKind::Function { params, .. } = self.ast.kind(*arg) else {
                            continue;
                        };
                        let params = params.clone();
                        let fn_paths: Vec<AccessPath> =
                            callee_paths.iter().map(|p| p.arg(i as u32)).collect();
                        self.union_expr(*arg, fn_paths.iter().cloned());
                        let skip = usize::from(
                            params.len() >= 2
                                && params.first().is_some_and(|p| {
                                    matches!(self.ast.ident_name(*p), Some("err") | Some("error"))
                                }),
                        );
                        for (j, param) in params.iter().enumerate().skip(skip) {
                            let Some(pb) = self.scopes.resolve_decl(*param) else {
                                continue;
                            };
                            let logical = (j - skip) as u32;
                            let param_paths: Vec<AccessPath> =
                                fn_paths.iter().map(|p| p.arg(logical)).collect();
                            self.union_binding(pb, param_paths.into_iter());
                        }
                    }
                }
                NodeKind::New { callee, .. } => {
                    let callee_paths = self.expr_paths_cloned(callee);
                    self.union_expr(id, callee_paths.into_iter().map(|p| p.new_instance()));
                }
                NodeKind::Assign { op, target, value } => {
                    let value_paths = self.expr_paths_cloned(value);
                    if value_paths.is_empty() {
                        continue;
                    }
                    // an assignment expression evaluates to its value
                    self.union_expr(id, value_paths.iter().cloned());
                    if op == AssignOp::Assign {
                        if let NodeKind::Ident { .. } = self.ast.kind(target) {
                            if let Some(b) = self.scopes.resolve_use(target) {
                                self.union_binding(b, value_paths.into_iter());
                            }
                        }
                    }
                }
                NodeKind::VarDecl { declarators, .. } => {
                    for d in declarators {
                        let Some(init) = d.init else { continue };
                        let paths = self.expr_paths_cloned(init);
                        if paths.is_empty() {
                            continue;
                        }
                        if let Some(b) = self.scopes.resolve_decl(d.name) {
                            self.union_binding(b, paths.into_iter());
                        }
                    }
                }
                NodeKind::ImportDefault { local, module }
                    if self.options.module_tracked(&module) => {
                        if let Some(b) = self.scopes.resolve_decl(local) {
                            self.union_binding(
                                b,
                                std::iter::once(AccessPath::require(module.clone())),
                            );
                        }
                    }
                _ => {}
            }
        }
    }
}
