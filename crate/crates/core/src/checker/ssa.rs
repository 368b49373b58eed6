//! Minimal intra-function SSA numbering, enough to decide conservatively
//! whether two base expressions denote the same object: same binding, same
//! reaching version.

use crate::access_paths::{BindingId, ScopeInfo};
use crate::frontend::{
    AssignOp, Ast, BlockId, CfgOwner, DomInfo, FunctionCfg, NodeId, NodeKind,
};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// SSA identity of an identifier occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SsaVar {
    /// Binding written only by its declaration; one version everywhere.
    Stable(BindingId),
    /// Version of a binding local to the analyzed function.
    Versioned(BindingId, u32),
}

/// Ident-occurrence -> SSA variable, for one function graph.
#[derive(Debug, Clone, Default)]
pub struct SsaAssignment {
    vars: HashMap<NodeId, SsaVar>,
}

impl SsaAssignment {
    pub fn var(&self, ident: NodeId) -> Option<SsaVar> {
        self.vars.get(&ident).copied()
    }
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Use(BindingId, NodeId),
    Def(BindingId),
}

/// Computes SSA numbering for identifier uses inside one function graph.
///
/// Variables owned by this function and never assigned from nested
/// functions get dominator-tree renaming with phi versions at join points.
/// Outer variables that are only written by their declaration are stable.
/// Anything else gets no SSA identity (conservatively never "the same
/// object").
pub fn compute_ssa(
    ast: &Ast,
    scopes: &ScopeInfo,
    fcfg: &FunctionCfg,
    dom: &DomInfo,
) -> SsaAssignment {
    let owner = match fcfg.owner {
        CfgOwner::TopLevel => None,
        CfgOwner::Function(f) => Some(f),
    };

    let managed = |b: BindingId| -> bool {
        let info = scopes.binding(b);
        info.owner == owner && !info.assigned_in_nested_fn
    };

    // ordered def/use events per block
    let mut block_events: BTreeMap<BlockId, Vec<(u32, Vec<Event>)>> = BTreeMap::new();
    for (&stmt, &(block, idx)) in &fcfg.stmt_pos {
        let mut events = Vec::new();
        collect_stmt_events(ast, scopes, stmt, &mut events);
        let events: Vec<Event> = events
            .into_iter()
            .filter(|e| match e {
                Event::Use(b, _) | Event::Def(b) => managed(*b),
            })
            .collect();
        block_events.entry(block).or_default().push((idx, events));
    }
    for list in block_events.values_mut() {
        list.sort_by_key(|(idx, _)| *idx);
    }

    let mut assignment = SsaAssignment::default();

    // stable outer bindings resolve immediately
    let mut managed_bindings: BTreeSet<BindingId> = BTreeSet::new();
    for events in block_events.values() {
        for (_, list) in events {
            for e in list {
                match e {
                    Event::Use(b, _) | Event::Def(b) => {
                        managed_bindings.insert(*b);
                    }
                }
            }
        }
    }
    // note uses of outer stable bindings
    for &stmt in fcfg.stmt_pos.keys() {
        collect_outer_stable_uses(ast, scopes, stmt, owner, &mut assignment);
    }

    // phi placement: iterated dominance frontier of definition blocks
    let frontiers = dom.frontiers(&fcfg.cfg);
    let mut def_blocks: BTreeMap<BindingId, BTreeSet<BlockId>> = BTreeMap::new();
    for b in &managed_bindings {
        // every managed binding has an implicit definition at entry
        def_blocks.entry(*b).or_default().insert(fcfg.cfg.entry);
    }
    for (&block, events) in &block_events {
        for (_, list) in events {
            for e in list {
                if let Event::Def(b) = e {
                    def_blocks.entry(*b).or_default().insert(block);
                }
            }
        }
    }
    let mut phis: BTreeMap<BlockId, BTreeSet<BindingId>> = BTreeMap::new();
    for (&binding, blocks) in &def_blocks {
        let mut work: Vec<BlockId> = blocks.iter().copied().collect();
        let mut placed: BTreeSet<BlockId> = BTreeSet::new();
        while let Some(b) = work.pop() {
            for &f in frontiers.get(&b).map(|v| v.as_slice()).unwrap_or(&[]) {
                if placed.insert(f) {
                    phis.entry(f).or_default().insert(binding);
                    if !blocks.contains(&f) {
                        work.push(f);
                    }
                }
            }
        }
    }

    // rename along the dominator tree
    let mut children: BTreeMap<BlockId, Vec<BlockId>> = BTreeMap::new();
    for (&b, &d) in dom.idom_map() {
        children.entry(d).or_default().push(b);
    }
    for c in children.values_mut() {
        c.sort();
    }

    let mut stacks: HashMap<BindingId, Vec<u32>> = HashMap::new();
    let mut counters: HashMap<BindingId, u32> = HashMap::new();
    for &b in &managed_bindings {
        stacks.insert(b, vec![0]);
        counters.insert(b, 0);
    }

    rename_block(
        fcfg.cfg.entry,
        &children,
        &phis,
        &block_events,
        &mut stacks,
        &mut counters,
        &mut assignment,
    );

    assignment
}

#[allow(clippy::too_many_arguments)]
fn rename_block(
    block: BlockId,
    children: &BTreeMap<BlockId, Vec<BlockId>>,
    phis: &BTreeMap<BlockId, BTreeSet<BindingId>>,
    block_events: &BTreeMap<BlockId, Vec<(u32, Vec<Event>)>>,
    stacks: &mut HashMap<BindingId, Vec<u32>>,
    counters: &mut HashMap<BindingId, u32>,
    assignment: &mut SsaAssignment,
) {
    let mut pushed: Vec<BindingId> = Vec::new();
    if let Some(bindings) = phis.get(&block) {
        for &b in bindings {
            let c = counters.entry(b).or_default();
            *c += 1;
            let v = *c;
            stacks.entry(b).or_default().push(v);
            pushed.push(b);
        }
    }
    if let Some(events) = block_events.get(&block) {
        for (_, list) in events {
            for e in list {
                match e {
                    Event::Use(b, node) => {
                        if let Some(&v) = stacks.get(b).and_then(|s| s.last()) {
                            assignment.vars.insert(*node, SsaVar::Versioned(*b, v));
                        }
                    }
                    Event::Def(b) => {
                        let c = counters.entry(*b).or_default();
                        *c += 1;
                        let v = *c;
                        stacks.entry(*b).or_default().push(v);
                        pushed.push(*b);
                    }
                }
            }
        }
    }
    if let Some(kids) = children.get(&block) {
        for &k in kids {
            rename_block(k, children, phis, block_events, stacks, counters, assignment);
        }
    }
    for b in pushed.into_iter().rev() {
        stacks.get_mut(&b).map(|s| s.pop());
    }
}

/// Events of one statement in evaluation order, not descending into nested
/// function bodies.
fn collect_stmt_events(ast: &Ast, scopes: &ScopeInfo, stmt: NodeId, out: &mut Vec<Event>) {
    match ast.kind(stmt) {
        NodeKind::VarDecl { declarators, .. } => {
            for d in declarators {
                if let Some(init) = d.init {
                    collect_expr_events(ast, scopes, init, out);
                }
                if let Some(b) = scopes.resolve_decl(d.name) {
                    out.push(Event::Def(b));
                }
            }
        }
        NodeKind::ExprStmt { expr } => collect_expr_events(ast, scopes, *expr, out),
        NodeKind::Return { value } => {
            if let Some(v) = value {
                collect_expr_events(ast, scopes, *v, out);
            }
        }
        NodeKind::If { cond, .. } | NodeKind::While { cond, .. } => {
            collect_expr_events(ast, scopes, *cond, out)
        }
        NodeKind::ImportDefault { local, .. } => {
            if let Some(b) = scopes.resolve_decl(*local) {
                out.push(Event::Def(b));
            }
        }
        NodeKind::FuncDecl { func } => {
            if let Some(b) = scopes.resolve_decl(*func) {
                out.push(Event::Def(b));
            }
        }
        NodeKind::Try { .. }
        | NodeKind::Block { .. }
        | NodeKind::Program { .. }
        | NodeKind::UnanalyzedStmt => {}
        // arrow-function expression bodies land here
        _ => collect_expr_events(ast, scopes, stmt, out),
    }
}

fn collect_expr_events(ast: &Ast, scopes: &ScopeInfo, expr: NodeId, out: &mut Vec<Event>) {
    match ast.kind(expr) {
        NodeKind::Ident { .. } => {
            if let Some(b) = scopes.resolve_use(expr) {
                out.push(Event::Use(b, expr));
            }
        }
        NodeKind::Function { .. } => {} // separate graph
        NodeKind::Assign { op, target, value } => {
            if *op == AssignOp::Compound {
                if let NodeKind::Ident { .. } = ast.kind(*target) {
                    if let Some(b) = scopes.resolve_use(*target) {
                        out.push(Event::Use(b, *target));
                    }
                }
            }
            collect_expr_events(ast, scopes, *value, out);
            match ast.kind(*target) {
                NodeKind::Ident { .. } => {
                    if let Some(b) = scopes.resolve_use(*target) {
                        out.push(Event::Def(b));
                    }
                }
                // member writes evaluate their base
                _ => collect_expr_events(ast, scopes, *target, out),
            }
        }
        _ => {
            for c in ast.children(expr) {
                collect_expr_events(ast, scopes, c, out);
            }
        }
    }
}

/// Marks uses of enclosing-scope bindings that are only written once, at
/// their declaration; all such uses share one SSA identity.
fn collect_outer_stable_uses(
    ast: &Ast,
    scopes: &ScopeInfo,
    stmt: NodeId,
    owner: Option<NodeId>,
    assignment: &mut SsaAssignment,
) {
    let mut visit = |node: NodeId| {
        if let NodeKind::Ident { .. } = ast.kind(node) {
            if let Some(b) = scopes.resolve_use(node) {
                let info = scopes.binding(b);
                if info.owner != owner && scopes.is_single_init(b) {
                    assignment.vars.insert(node, SsaVar::Stable(b));
                }
            }
        }
    };
    // walk the statement's expression children, mirroring event collection
    fn walk(ast: &Ast, node: NodeId, visit: &mut impl FnMut(NodeId)) {
        match ast.kind(node) {
            NodeKind::Function { .. } => return,
            NodeKind::If { cond, .. } | NodeKind::While { cond, .. } => {
                walk(ast, *cond, visit);
                return;
            }
            NodeKind::Try { .. } | NodeKind::Block { .. } | NodeKind::Program { .. } => return,
            _ => {}
        }
        visit(node);
        for c in ast.children(node) {
            walk(ast, c, visit);
        }
    }
    walk(ast, stmt, &mut visit);
}
