use super::Span;

/// Index of a node in its [`Ast`] arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    Let,
    Var,
    Const,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    /// Plain `=`.
    Assign,
    /// Compound operators (`+=`, `-=`, ...). The target is both read and
    /// written; only plain assignments transfer access paths.
    Compound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
    Plus,
    BitNot,
    Typeof,
    Void,
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    NotEq,
    StrictEq,
    StrictNotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
    Shl,
    Shr,
    UShr,
    BitAnd,
    BitOr,
    BitXor,
    Instanceof,
    In,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicalOp {
    And,
    Or,
    Nullish,
}

/// Property part of a member access. Bracket accesses record whether the
/// index is a constant string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MemberProperty {
    /// `e.name`
    Dot(String),
    /// `e["name"]` with a string-literal index
    BracketConst(String),
    /// `e[expr]` with a computed index
    BracketDyn(NodeId),
}

impl MemberProperty {
    /// Property name when it is a compile-time constant (dot or
    /// constant-string bracket notation); `None` for computed indices.
    pub fn const_name(&self) -> Option<&str> {
        match self {
            MemberProperty::Dot(s) | MemberProperty::BracketConst(s) => Some(s),
            MemberProperty::BracketDyn(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declarator {
    /// `Ident` node carrying the declared name.
    pub name: NodeId,
    pub init: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FuncBody {
    Block(NodeId),
    /// Arrow function with an expression body.
    Expr(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Program {
        body: Vec<NodeId>,
    },
    VarDecl {
        kind: DeclKind,
        declarators: Vec<Declarator>,
    },
    /// Function declaration statement; `func` is a `Function` node.
    FuncDecl {
        func: NodeId,
    },
    ExprStmt {
        expr: NodeId,
    },
    If {
        cond: NodeId,
        then_branch: NodeId,
        else_branch: Option<NodeId>,
    },
    While {
        cond: NodeId,
        body: NodeId,
    },
    Return {
        value: Option<NodeId>,
    },
    Try {
        body: NodeId,
        catch_param: Option<NodeId>,
        catch_body: Option<NodeId>,
        finally_body: Option<NodeId>,
    },
    Block {
        body: Vec<NodeId>,
    },
    /// `import local from 'module'`
    ImportDefault {
        local: NodeId,
        module: String,
    },
    /// Statement outside the analyzed subset, skipped as a balanced token
    /// sequence. Contributes no access paths.
    UnanalyzedStmt,

    Ident {
        name: String,
    },
    StringLit {
        value: String,
    },
    NumberLit {
        raw: String,
    },
    BoolLit {
        value: bool,
    },
    NullLit,
    ArrayLit {
        elements: Vec<NodeId>,
    },
    /// Object literal; keys are uninterpreted, values are analyzed.
    ObjectLit {
        values: Vec<NodeId>,
    },
    Function {
        name: Option<String>,
        /// `Ident` nodes (or `UnanalyzedExpr` for unsupported patterns).
        params: Vec<NodeId>,
        body: FuncBody,
        arrow: bool,
    },
    Member {
        object: NodeId,
        property: MemberProperty,
    },
    Call {
        callee: NodeId,
        args: Vec<NodeId>,
    },
    New {
        callee: NodeId,
        args: Vec<NodeId>,
    },
    Assign {
        op: AssignOp,
        target: NodeId,
        value: NodeId,
    },
    Unary {
        op: UnaryOp,
        operand: NodeId,
    },
    Binary {
        op: BinaryOp,
        lhs: NodeId,
        rhs: NodeId,
    },
    Logical {
        op: LogicalOp,
        lhs: NodeId,
        rhs: NodeId,
    },
    Ternary {
        cond: NodeId,
        consequent: NodeId,
        alternate: NodeId,
    },
    /// Expression outside the subset (template with interpolation, class
    /// expression, ...). Contributes no access paths.
    UnanalyzedExpr,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub span: Span,
    pub parent: Option<NodeId>,
}

/// Arena-backed abstract syntax tree for one source file.
#[derive(Debug, Clone)]
pub struct Ast {
    pub file: std::sync::Arc<str>,
    nodes: Vec<Node>,
    root: NodeId,
}

impl Ast {
    pub(crate) fn new(file: std::sync::Arc<str>, nodes: Vec<Node>, root: NodeId) -> Self {
        let mut ast = Self { file, nodes, root };
        ast.link_parents();
        ast
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id.index()].kind
    }

    pub fn span(&self, id: NodeId) -> &Span {
        &self.nodes[id.index()].span
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].parent
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All node ids, in arena order.
    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// Direct children of a node, statements and expressions alike.
    pub fn children(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        match self.kind(id) {
            NodeKind::Program { body } | NodeKind::Block { body } => out.extend(body),
            NodeKind::VarDecl { declarators, .. } => {
                for d in declarators {
                    out.push(d.name);
                    if let Some(init) = d.init {
                        out.push(init);
                    }
                }
            }
            NodeKind::FuncDecl { func } => out.push(*func),
            NodeKind::ExprStmt { expr } => out.push(*expr),
            NodeKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                out.push(*cond);
                out.push(*then_branch);
                out.extend(else_branch);
            }
            NodeKind::While { cond, body } => {
                out.push(*cond);
                out.push(*body);
            }
            NodeKind::Return { value } => out.extend(value),
            NodeKind::Try {
                body,
                catch_param,
                catch_body,
                finally_body,
            } => {
                out.push(*body);
                out.extend(catch_param);
                out.extend(catch_body);
                out.extend(finally_body);
            }
            NodeKind::ImportDefault { local, .. } => out.push(*local),
            NodeKind::ArrayLit { elements } => out.extend(elements),
            NodeKind::ObjectLit { values } => out.extend(values),
            NodeKind::Function { params, body, .. } => {
                out.extend(params);
                match body {
                    FuncBody::Block(b) | FuncBody::Expr(b) => out.push(*b),
                }
            }
            NodeKind::Member { object, property } => {
                out.push(*object);
                if let MemberProperty::BracketDyn(idx) = property {
                    out.push(*idx);
                }
            }
            NodeKind::Call { callee, args } | NodeKind::New { callee, args } => {
                out.push(*callee);
                out.extend(args);
            }
            NodeKind::Assign { target, value, .. } => {
                out.push(*target);
                out.push(*value);
            }
            NodeKind::Unary { operand, .. } => out.push(*operand),
            NodeKind::Binary { lhs, rhs, .. } | NodeKind::Logical { lhs, rhs, .. } => {
                out.push(*lhs);
                out.push(*rhs);
            }
            NodeKind::Ternary {
                cond,
                consequent,
                alternate,
            } => {
                out.push(*cond);
                out.push(*consequent);
                out.push(*alternate);
            }
            NodeKind::Ident { .. }
            | NodeKind::StringLit { .. }
            | NodeKind::NumberLit { .. }
            | NodeKind::BoolLit { .. }
            | NodeKind::NullLit
            | NodeKind::UnanalyzedStmt
            | NodeKind::UnanalyzedExpr => {}
        }
        out
    }

    /// Pre-order walk of the subtree rooted at `id`.
    pub fn walk(&self, id: NodeId, f: &mut impl FnMut(NodeId)) {
        f(id);
        for c in self.children(id) {
            self.walk(c, f);
        }
    }

    pub fn ident_name(&self, id: NodeId) -> Option<&str> {
        match self.kind(id) {
            NodeKind::Ident { name } => Some(name),
            _ => None,
        }
    }

    fn link_parents(&mut self) {
        let mut links: Vec<(NodeId, NodeId)> = Vec::with_capacity(self.nodes.len());
        for id in self.ids() {
            for c in self.children(id) {
                links.push((c, id));
            }
        }
        for (child, parent) in links {
            self.nodes[child.index()].parent = Some(parent);
        }
    }
}
