use super::ast::{Ast, FuncBody, NodeId, NodeKind};
use std::collections::HashMap;

/// Index of a basic block within its [`Cfg`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub u32);

impl BlockId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Default)]
pub struct BasicBlock {
    pub stmts: Vec<NodeId>,
    pub preds: Vec<BlockId>,
    pub succs: Vec<BlockId>,
}

/// Control-flow graph for one function body or the top-level program.
/// Straight-line statements share a block; `if`/`while`/`try` introduce
/// branch and join edges.
#[derive(Debug, Clone)]
pub struct Cfg {
    pub blocks: Vec<BasicBlock>,
    pub entry: BlockId,
}

impl Cfg {
    pub fn block(&self, id: BlockId) -> &BasicBlock {
        &self.blocks[id.index()]
    }

    pub fn block_ids(&self) -> impl Iterator<Item = BlockId> {
        (0..self.blocks.len() as u32).map(BlockId)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfgOwner {
    TopLevel,
    /// The `Function` node whose body this graph covers.
    Function(NodeId),
}

/// A graph plus the statement placement computed while building it.
#[derive(Debug, Clone)]
pub struct FunctionCfg {
    pub owner: CfgOwner,
    pub cfg: Cfg,
    /// Statement node -> (block, position inside block).
    pub stmt_pos: HashMap<NodeId, (BlockId, u32)>,
}

impl FunctionCfg {
    /// Placement of any node belonging to this graph: the position of its
    /// innermost enclosing statement. Nodes of nested functions are absent.
    pub fn expr_positions(&self, ast: &Ast) -> HashMap<NodeId, (BlockId, u32)> {
        let mut out = HashMap::new();
        for (&stmt, &pos) in &self.stmt_pos {
            collect_expr_nodes(ast, stmt, pos, &mut out);
        }
        out
    }
}

fn collect_expr_nodes(
    ast: &Ast,
    node: NodeId,
    pos: (BlockId, u32),
    out: &mut HashMap<NodeId, (BlockId, u32)>,
) {
    out.insert(node, pos);
    let expr_children: Vec<NodeId> = match ast.kind(node) {
        NodeKind::If { cond, .. } | NodeKind::While { cond, .. } => vec![*cond],
        NodeKind::Try { .. }
        | NodeKind::Block { .. }
        | NodeKind::Program { .. }
        | NodeKind::Function { .. }
        | NodeKind::FuncDecl { .. } => Vec::new(),
        _ => ast.children(node),
    };
    for c in expr_children {
        collect_expr_nodes(ast, c, pos, out);
    }
}

/// Builds the graph for one body: a `Program` node, a function block, or an
/// arrow-expression body.
pub fn build_cfg(ast: &Ast, body: NodeId) -> FunctionCfg {
    let owner = match ast.kind(body) {
        NodeKind::Program { .. } => CfgOwner::TopLevel,
        _ => match ast.parent(body) {
            Some(p) if matches!(ast.kind(p), NodeKind::Function { .. }) => CfgOwner::Function(p),
            _ => CfgOwner::TopLevel,
        },
    };
    let mut b = Builder {
        ast,
        blocks: vec![BasicBlock::default()],
        cur: BlockId(0),
        stmt_pos: HashMap::new(),
    };
    match ast.kind(body) {
        NodeKind::Program { body } | NodeKind::Block { body } => {
            let list = body.clone();
            b.visit_list(&list);
        }
        // arrow `x => expr`: a single implicit-return expression
        _ => b.record(body),
    }
    FunctionCfg {
        owner,
        cfg: Cfg {
            blocks: b.blocks,
            entry: BlockId(0),
        },
        stmt_pos: b.stmt_pos,
    }
}

/// One graph per function body plus one for top-level code, in source order.
pub fn function_cfgs(ast: &Ast) -> Vec<FunctionCfg> {
    let mut out = vec![build_cfg(ast, ast.root())];
    for id in ast.ids() {
        if let NodeKind::Function { body, .. } = ast.kind(id) {
            let body_node = match body {
                FuncBody::Block(b) | FuncBody::Expr(b) => *b,
            };
            out.push(build_cfg(ast, body_node));
        }
    }
    out
}

struct Builder<'a> {
    ast: &'a Ast,
    blocks: Vec<BasicBlock>,
    cur: BlockId,
    stmt_pos: HashMap<NodeId, (BlockId, u32)>,
}

impl Builder<'_> {
    fn new_block(&mut self) -> BlockId {
        let id = BlockId(self.blocks.len() as u32);
        self.blocks.push(BasicBlock::default());
        id
    }

    fn edge(&mut self, from: BlockId, to: BlockId) {
        if !self.blocks[from.index()].succs.contains(&to) {
            self.blocks[from.index()].succs.push(to);
            self.blocks[to.index()].preds.push(from);
        }
    }

    fn record(&mut self, stmt: NodeId) {
        let pos = self.blocks[self.cur.index()].stmts.len() as u32;
        self.stmt_pos.insert(stmt, (self.cur, pos));
        self.blocks[self.cur.index()].stmts.push(stmt);
    }

    fn visit_list(&mut self, stmts: &[NodeId]) {
        for &s in stmts {
            self.visit_stmt(s);
        }
    }

    fn visit_stmt(&mut self, stmt: NodeId) {
        match self.ast.kind(stmt).clone() {
            NodeKind::Block { body } => self.visit_list(&body),
            NodeKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                self.record(stmt); // guard evaluates here
                let guard = self.cur;
                let then_block = self.new_block();
                self.edge(guard, then_block);
                self.cur = then_block;
                self.visit_stmt(then_branch);
                let then_end = self.cur;
                let else_end = else_branch.map(|e| {
                    let else_block = self.new_block();
                    self.edge(guard, else_block);
                    self.cur = else_block;
                    self.visit_stmt(e);
                    self.cur
                });
                let join = self.new_block();
                self.edge(then_end, join);
                match else_end {
                    Some(e) => self.edge(e, join),
                    None => self.edge(guard, join),
                }
                self.cur = join;
            }
            NodeKind::While { body, .. } => {
                let header = self.new_block();
                self.edge(self.cur, header);
                self.cur = header;
                self.record(stmt); // guard evaluates in the header
                let body_block = self.new_block();
                self.edge(header, body_block);
                self.cur = body_block;
                self.visit_stmt(body);
                self.edge(self.cur, header);
                let exit = self.new_block();
                self.edge(header, exit);
                self.cur = exit;
            }
            NodeKind::Try {
                body,
                catch_body,
                finally_body,
                ..
            } => {
                self.record(stmt);
                let before = self.cur;
                let try_start = self.new_block();
                self.edge(before, try_start);
                let region_from = try_start.index();
                self.cur = try_start;
                self.visit_stmt(body);
                let try_end = self.cur;
                let region_to = self.blocks.len();

                let catch_end = catch_body.map(|cb| {
                    let catch_block = self.new_block();
                    // an exception can surface anywhere in the try region
                    for b in region_from..region_to {
                        self.edge(BlockId(b as u32), catch_block);
                    }
                    self.cur = catch_block;
                    self.visit_stmt(cb);
                    self.cur
                });

                let join = self.new_block();
                self.edge(try_end, join);
                if let Some(c) = catch_end {
                    self.edge(c, join);
                }
                self.cur = join;
                if let Some(f) = finally_body {
                    self.visit_stmt(f);
                }
            }
            _ => self.record(stmt),
        }
    }
}
