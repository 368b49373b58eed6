use super::ast::*;
use super::lexer::{Lexer, Token, TokenKind};
use super::{SourceFile, Span, SyntaxError};
use std::sync::Arc;

/// Parser knobs. `lenient_types` strips TypeScript-style annotations
/// (`x: T`, parameter and return types, `as T`) instead of rejecting them.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub lenient_types: bool,
}

/// Parse a source file into an [`Ast`]. Constructs outside the analyzed
/// subset become opaque unanalyzed nodes where they are syntactically
/// delimitable; otherwise a [`SyntaxError`] is returned.
pub fn parse(file: &SourceFile) -> Result<Ast, SyntaxError> {
    parse_with(file, ParseOptions::default())
}

pub fn parse_with(file: &SourceFile, options: ParseOptions) -> Result<Ast, SyntaxError> {
    let file_name: Arc<str> = Arc::from(file.path.to_string_lossy().as_ref());
    let tokens = Lexer::new(file_name.clone(), &file.text).tokenize()?;
    let mut parser = Parser {
        file: file_name.clone(),
        tokens,
        pos: 0,
        nodes: Vec::new(),
        options,
        depth: 0,
    };
    let root = parser.program()?;
    Ok(Ast::new(file_name, parser.nodes, root))
}

const MAX_DEPTH: u32 = 400;

/// Reserved words that never parse as plain identifier expressions.
const RESERVED: &[&str] = &[
    "let", "var", "const", "function", "if", "else", "while", "return", "try", "catch",
    "finally", "new", "typeof", "void", "delete", "instanceof", "in", "import", "export",
    "class", "for", "switch", "do", "throw", "with", "case", "default", "break", "continue",
];

struct Parser {
    file: Arc<str>,
    tokens: Vec<Token>,
    pos: usize,
    nodes: Vec<Node>,
    options: ParseOptions,
    depth: u32,
}

impl Parser {
    // ----- token helpers -------------------------------------------------

    fn cur(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek(&self, ahead: usize) -> &Token {
        let idx = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[idx]
    }

    fn at_eof(&self) -> bool {
        matches!(self.cur().kind, TokenKind::Eof)
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.cur().is_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_ident(&mut self, word: &str) -> bool {
        if self.cur().is_ident(word) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), SyntaxError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.err_here(&format!("expected `{p}`")))
        }
    }

    fn cur_start(&self) -> (u32, u32) {
        self.cur().start
    }

    fn prev_end(&self) -> (u32, u32) {
        if self.pos == 0 {
            self.cur().start
        } else {
            self.tokens[self.pos - 1].end
        }
    }

    fn span_from(&self, start: (u32, u32)) -> Span {
        let end = self.prev_end();
        let end = if end < start { start } else { end };
        Span::new(self.file.clone(), start, end)
    }

    fn err_here(&self, message: &str) -> SyntaxError {
        let t = self.cur();
        SyntaxError {
            message: format!("{message}, found {}", describe(&t.kind)),
            span: Span::new(self.file.clone(), t.start, t.end),
        }
    }

    fn alloc(&mut self, kind: NodeKind, start: (u32, u32)) -> NodeId {
        let span = self.span_from(start);
        self.alloc_spanned(kind, span)
    }

    fn alloc_spanned(&mut self, kind: NodeKind, span: Span) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            kind,
            span,
            parent: None,
        });
        id
    }

    fn enter(&mut self) -> Result<DepthGuard, SyntaxError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.err_here("nesting too deep"));
        }
        Ok(DepthGuard)
    }

    // ----- statements ----------------------------------------------------

    fn program(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        let mut body = Vec::new();
        while !self.at_eof() {
            if let Some(stmt) = self.statement()? {
                body.push(stmt);
            }
        }
        Ok(self.alloc(NodeKind::Program { body }, start))
    }

    /// Parses one statement; `None` for a stray `;`.
    fn statement(&mut self) -> Result<Option<NodeId>, SyntaxError> {
        let _g = self.enter()?;
        let r = self.statement_inner();
        self.depth -= 1;
        r
    }

    fn statement_inner(&mut self) -> Result<Option<NodeId>, SyntaxError> {
        let start = self.cur_start();
        if self.cur().is_punct(";") {
            self.advance();
            return Ok(None);
        }
        if self.cur().is_punct("{") {
            return Ok(Some(self.block()?));
        }
        let word = match self.cur().ident() {
            Some(w) => w.to_string(),
            None => return Ok(Some(self.expression_statement()?)),
        };
        match word.as_str() {
            "let" | "var" | "const" => Ok(Some(self.var_decl()?)),
            "function" => {
                self.advance();
                let func = self.function_rest(start, false, true)?;
                Ok(Some(self.alloc(NodeKind::FuncDecl { func }, start)))
            }
            "if" => Ok(Some(self.if_statement()?)),
            "while" => Ok(Some(self.while_statement()?)),
            "return" => Ok(Some(self.return_statement()?)),
            "try" => Ok(Some(self.try_statement()?)),
            "import" => Ok(Some(self.import_statement()?)),
            "export" => {
                self.advance();
                if self
                    .cur()
                    .ident()
                    .is_some_and(|w| matches!(w, "function" | "let" | "var" | "const"))
                {
                    self.statement()
                } else {
                    Ok(Some(self.skip_unanalyzed_statement(start)))
                }
            }
            "class" | "for" | "switch" | "do" | "throw" | "with" | "debugger" | "break"
            | "continue" | "async" => Ok(Some(self.skip_unanalyzed_statement(start))),
            "interface" | "type" | "namespace" | "declare" | "enum"
                if self.options.lenient_types =>
            {
                Ok(Some(self.skip_unanalyzed_statement(start)))
            }
            _ => Ok(Some(self.expression_statement()?)),
        }
    }

    /// Statement required by grammar position (`if`/`while` bodies); a bare
    /// `;` yields an empty block.
    fn required_statement(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        match self.statement()? {
            Some(s) => Ok(s),
            None => Ok(self.alloc(NodeKind::Block { body: Vec::new() }, start)),
        }
    }

    fn block(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        self.expect_punct("{")?;
        let mut body = Vec::new();
        while !self.cur().is_punct("}") {
            if self.at_eof() {
                return Err(self.err_here("unterminated block, expected `}`"));
            }
            if let Some(stmt) = self.statement()? {
                body.push(stmt);
            }
        }
        self.advance();
        Ok(self.alloc(NodeKind::Block { body }, start))
    }

    fn expression_statement(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        let expr = self.expression()?;
        self.consume_statement_end()?;
        Ok(self.alloc(NodeKind::ExprStmt { expr }, start))
    }

    fn var_decl(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        let kw = self.advance();
        let kind = match kw.ident() {
            Some("var") => DeclKind::Var,
            Some("const") => DeclKind::Const,
            _ => DeclKind::Let,
        };
        // Destructuring declarations are outside the subset.
        if self.cur().is_punct("{") || self.cur().is_punct("[") {
            return Ok(self.skip_unanalyzed_statement(start));
        }
        let mut declarators = Vec::new();
        loop {
            let name = self.ident_node()?;
            if self.options.lenient_types && self.eat_punct(":") {
                self.skip_type(&["=", ",", ";", ")"]);
            }
            let init = if self.eat_punct("=") {
                Some(self.assign_expr()?)
            } else {
                None
            };
            declarators.push(Declarator { name, init });
            if !self.eat_punct(",") {
                break;
            }
        }
        self.consume_statement_end()?;
        Ok(self.alloc(NodeKind::VarDecl { kind, declarators }, start))
    }

    fn if_statement(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        self.advance(); // if
        self.expect_punct("(")?;
        let cond = self.expression()?;
        self.expect_punct(")")?;
        let then_branch = self.required_statement()?;
        let else_branch = if self.eat_ident("else") {
            Some(self.required_statement()?)
        } else {
            None
        };
        Ok(self.alloc(
            NodeKind::If {
                cond,
                then_branch,
                else_branch,
            },
            start,
        ))
    }

    fn while_statement(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        self.advance(); // while
        self.expect_punct("(")?;
        let cond = self.expression()?;
        self.expect_punct(")")?;
        let body = self.required_statement()?;
        Ok(self.alloc(NodeKind::While { cond, body }, start))
    }

    fn return_statement(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        self.advance(); // return
        let value = if self.cur().is_punct(";")
            || self.cur().is_punct("}")
            || self.at_eof()
            || self.cur().newline_before
        {
            None
        } else {
            Some(self.expression()?)
        };
        self.consume_statement_end()?;
        Ok(self.alloc(NodeKind::Return { value }, start))
    }

    fn try_statement(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        self.advance(); // try
        let body = self.block()?;
        let mut catch_param = None;
        let mut catch_body = None;
        if self.eat_ident("catch") {
            if self.eat_punct("(") {
                catch_param = Some(self.ident_node()?);
                self.expect_punct(")")?;
            }
            catch_body = Some(self.block()?);
        }
        let finally_body = if self.eat_ident("finally") {
            Some(self.block()?)
        } else {
            None
        };
        if catch_body.is_none() && finally_body.is_none() {
            return Err(self.err_here("expected `catch` or `finally` after try block"));
        }
        Ok(self.alloc(
            NodeKind::Try {
                body,
                catch_param,
                catch_body,
                finally_body,
            },
            start,
        ))
    }

    fn import_statement(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        // Only `import x from 'm'` is in the subset; other forms are
        // delimitable and skipped.
        let is_default_form = matches!(&self.peek(1).kind, TokenKind::Ident(w) if !RESERVED.contains(&w.as_str()))
            && self.peek(2).is_ident("from")
            && matches!(&self.peek(3).kind, TokenKind::Str(_));
        if !is_default_form {
            return Ok(self.skip_unanalyzed_statement(start));
        }
        self.advance(); // import
        let local = self.ident_node()?;
        self.advance(); // from
        let module = match self.advance().kind {
            TokenKind::Str(s) => s,
            _ => unreachable!("checked by is_default_form"),
        };
        self.consume_statement_end()?;
        Ok(self.alloc(NodeKind::ImportDefault { local, module }, start))
    }

    /// Consumes a balanced token run for a construct outside the subset.
    /// Stops after a top-level `;`, after closing a top-level `{...}`
    /// group, or before a top-level `}`/EOF.
    fn skip_unanalyzed_statement(&mut self, start: (u32, u32)) -> NodeId {
        let mut depth: i32 = 0;
        let mut consumed = 0usize;
        loop {
            if self.at_eof() {
                break;
            }
            let t = self.cur();
            if depth == 0 && consumed > 0 {
                if t.is_punct("}") {
                    break;
                }
                if t.newline_before && !continues_statement(&t.kind) {
                    break;
                }
            }
            let closed_group = {
                let t = self.advance();
                consumed += 1;
                match &t.kind {
                    TokenKind::Punct("(") | TokenKind::Punct("[") | TokenKind::Punct("{") => {
                        depth += 1;
                        false
                    }
                    TokenKind::Punct(")") | TokenKind::Punct("]") => {
                        depth -= 1;
                        false
                    }
                    TokenKind::Punct("}") => {
                        depth -= 1;
                        depth == 0
                    }
                    TokenKind::Punct(";") => depth == 0,
                    _ => false,
                }
            };
            if closed_group {
                // allow `};` and `do {...} while (...)` tails
                if self.cur().is_punct(";") {
                    self.advance();
                }
                break;
            }
        }
        self.alloc(NodeKind::UnanalyzedStmt, start)
    }

    fn consume_statement_end(&mut self) -> Result<(), SyntaxError> {
        if self.eat_punct(";") {
            return Ok(());
        }
        if self.cur().is_punct("}") || self.at_eof() || self.cur().newline_before {
            return Ok(());
        }
        Err(self.err_here("expected `;` or newline after statement"))
    }

    fn ident_node(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        match self.cur().ident() {
            Some(w) if !RESERVED.contains(&w) => {
                let name = w.to_string();
                self.advance();
                Ok(self.alloc(NodeKind::Ident { name }, start))
            }
            _ => Err(self.err_here("expected identifier")),
        }
    }

    // ----- expressions ---------------------------------------------------

    fn expression(&mut self) -> Result<NodeId, SyntaxError> {
        self.assign_expr()
    }

    fn assign_expr(&mut self) -> Result<NodeId, SyntaxError> {
        let _g = self.enter()?;
        let r = self.assign_expr_inner();
        self.depth -= 1;
        r
    }

    fn assign_expr_inner(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        let lhs = self.ternary_expr()?;
        let op = if self.cur().is_punct("=") {
            Some(AssignOp::Assign)
        } else if matches!(
            &self.cur().kind,
            TokenKind::Punct(p) if matches!(*p, "+=" | "-=" | "*=" | "/=" | "%=" | "&=" | "|=" | "^=" | "<<=" | ">>=" | ">>>=" | "**=" | "&&=" | "||=" | "??=")
        ) {
            Some(AssignOp::Compound)
        } else {
            None
        };
        let Some(op) = op else { return Ok(lhs) };
        if !matches!(
            self.nodes[lhs.index()].kind,
            NodeKind::Ident { .. } | NodeKind::Member { .. }
        ) {
            return Err(self.err_here("invalid assignment target"));
        }
        self.advance();
        let value = self.assign_expr()?;
        Ok(self.alloc(
            NodeKind::Assign {
                op,
                target: lhs,
                value,
            },
            start,
        ))
    }

    fn ternary_expr(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        let cond = self.binary_expr(0)?;
        if !self.eat_punct("?") {
            return Ok(cond);
        }
        let consequent = self.assign_expr()?;
        self.expect_punct(":")?;
        let alternate = self.assign_expr()?;
        Ok(self.alloc(
            NodeKind::Ternary {
                cond,
                consequent,
                alternate,
            },
            start,
        ))
    }

    fn binary_expr(&mut self, min_level: usize) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        let mut lhs = if min_level + 1 < BINARY_LEVELS.len() {
            self.binary_expr(min_level + 1)?
        } else {
            self.unary_expr()?
        };
        while let Some(op) = self.peek_binary_op(min_level) {
            self.advance();
            let rhs = if min_level + 1 < BINARY_LEVELS.len() {
                self.binary_expr(min_level + 1)?
            } else {
                self.unary_expr()?
            };
            lhs = match op {
                BinOrLogical::Logical(op) => {
                    self.alloc(NodeKind::Logical { op, lhs, rhs }, start)
                }
                BinOrLogical::Binary(op) => self.alloc(NodeKind::Binary { op, lhs, rhs }, start),
            };
        }
        Ok(lhs)
    }

    fn peek_binary_op(&self, level: usize) -> Option<BinOrLogical> {
        let t = self.cur();
        for (tok, op) in BINARY_LEVELS[level] {
            let matched = match &t.kind {
                TokenKind::Punct(p) => p == tok,
                TokenKind::Ident(w) => w == tok,
                _ => false,
            };
            if matched {
                return Some(*op);
            }
        }
        None
    }

    fn unary_expr(&mut self) -> Result<NodeId, SyntaxError> {
        let _g = self.enter()?;
        let r = self.unary_expr_inner();
        self.depth -= 1;
        r
    }

    fn unary_expr_inner(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        let op = match &self.cur().kind {
            TokenKind::Punct("!") => Some(UnaryOp::Not),
            TokenKind::Punct("-") => Some(UnaryOp::Neg),
            TokenKind::Punct("+") => Some(UnaryOp::Plus),
            TokenKind::Punct("~") => Some(UnaryOp::BitNot),
            TokenKind::Ident(w) if w == "typeof" => Some(UnaryOp::Typeof),
            TokenKind::Ident(w) if w == "void" => Some(UnaryOp::Void),
            TokenKind::Ident(w) if w == "delete" => Some(UnaryOp::Delete),
            _ => None,
        };
        if let Some(op) = op {
            self.advance();
            let operand = self.unary_expr()?;
            return Ok(self.alloc(NodeKind::Unary { op, operand }, start));
        }
        if self.cur().is_punct("++") || self.cur().is_punct("--") {
            // update expressions are outside the subset
            self.advance();
            let _ = self.unary_expr()?;
            return Ok(self.alloc(NodeKind::UnanalyzedExpr, start));
        }
        self.postfix_expr()
    }

    fn postfix_expr(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        let mut expr = if self.cur().is_ident("new") {
            self.new_expr()?
        } else {
            self.primary_expr()?
        };
        loop {
            if self.eat_punct(".") || self.eat_punct("?.") {
                let name = match self.cur().ident() {
                    Some(w) => w.to_string(),
                    None => return Err(self.err_here("expected property name after `.`")),
                };
                self.advance();
                expr = self.alloc(
                    NodeKind::Member {
                        object: expr,
                        property: MemberProperty::Dot(name),
                    },
                    start,
                );
            } else if self.eat_punct("[") {
                let idx = self.expression()?;
                self.expect_punct("]")?;
                let property = match &self.nodes[idx.index()].kind {
                    NodeKind::StringLit { value } => MemberProperty::BracketConst(value.clone()),
                    _ => MemberProperty::BracketDyn(idx),
                };
                expr = self.alloc(
                    NodeKind::Member {
                        object: expr,
                        property,
                    },
                    start,
                );
            } else if self.cur().is_punct("(") {
                let args = self.call_args()?;
                expr = self.alloc(NodeKind::Call { callee: expr, args }, start);
            } else if self.cur().is_punct("++") || self.cur().is_punct("--") {
                self.advance();
                expr = self.alloc(NodeKind::UnanalyzedExpr, start);
            } else if self.options.lenient_types && self.cur().is_ident("as") {
                self.advance();
                self.skip_type(&[",", ";", ")", "]", "}"]);
            } else {
                break;
            }
        }
        Ok(expr)
    }

    fn new_expr(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        self.advance(); // new
        let mut callee = self.primary_expr()?;
        loop {
            if self.eat_punct(".") {
                let name = match self.cur().ident() {
                    Some(w) => w.to_string(),
                    None => return Err(self.err_here("expected property name after `.`")),
                };
                self.advance();
                callee = self.alloc(
                    NodeKind::Member {
                        object: callee,
                        property: MemberProperty::Dot(name),
                    },
                    start,
                );
            } else if self.eat_punct("[") {
                let idx = self.expression()?;
                self.expect_punct("]")?;
                let property = match &self.nodes[idx.index()].kind {
                    NodeKind::StringLit { value } => MemberProperty::BracketConst(value.clone()),
                    _ => MemberProperty::BracketDyn(idx),
                };
                callee = self.alloc(
                    NodeKind::Member {
                        object: callee,
                        property,
                    },
                    start,
                );
            } else {
                break;
            }
        }
        let args = if self.cur().is_punct("(") {
            self.call_args()?
        } else {
            Vec::new()
        };
        Ok(self.alloc(NodeKind::New { callee, args }, start))
    }

    fn call_args(&mut self) -> Result<Vec<NodeId>, SyntaxError> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        while !self.cur().is_punct(")") {
            if self.at_eof() {
                return Err(self.err_here("unterminated argument list"));
            }
            if self.cur().is_punct("...") {
                let start = self.cur_start();
                self.advance();
                let _ = self.assign_expr()?;
                args.push(self.alloc(NodeKind::UnanalyzedExpr, start));
            } else {
                args.push(self.assign_expr()?);
            }
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(")")?;
        Ok(args)
    }

    fn primary_expr(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        match self.cur().kind.clone() {
            TokenKind::Num(raw) => {
                self.advance();
                Ok(self.alloc(NodeKind::NumberLit { raw }, start))
            }
            TokenKind::Str(value) => {
                self.advance();
                Ok(self.alloc(NodeKind::StringLit { value }, start))
            }
            TokenKind::Template { value, has_interp } => {
                self.advance();
                if has_interp {
                    Ok(self.alloc(NodeKind::UnanalyzedExpr, start))
                } else {
                    Ok(self.alloc(NodeKind::StringLit { value }, start))
                }
            }
            TokenKind::Punct("(") => {
                if self.arrow_follows_parens() {
                    return self.arrow_function();
                }
                self.advance();
                let inner = self.expression()?;
                self.expect_punct(")")?;
                Ok(inner)
            }
            TokenKind::Punct("[") => {
                self.advance();
                let mut elements = Vec::new();
                while !self.cur().is_punct("]") {
                    if self.at_eof() {
                        return Err(self.err_here("unterminated array literal"));
                    }
                    if self.cur().is_punct(",") {
                        self.advance();
                        continue;
                    }
                    if self.cur().is_punct("...") {
                        let s = self.cur_start();
                        self.advance();
                        let _ = self.assign_expr()?;
                        elements.push(self.alloc(NodeKind::UnanalyzedExpr, s));
                    } else {
                        elements.push(self.assign_expr()?);
                    }
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct("]")?;
                Ok(self.alloc(NodeKind::ArrayLit { elements }, start))
            }
            TokenKind::Punct("{") => self.object_literal(),
            TokenKind::Ident(w) => match w.as_str() {
                "true" | "false" => {
                    self.advance();
                    Ok(self.alloc(NodeKind::BoolLit { value: w == "true" }, start))
                }
                "null" => {
                    self.advance();
                    Ok(self.alloc(NodeKind::NullLit, start))
                }
                "function" => {
                    self.advance();
                    self.function_rest(start, false, false)
                }
                "class" => Ok(self.skip_unanalyzed_expression(start)),
                _ if RESERVED.contains(&w.as_str()) => {
                    Err(self.err_here("unexpected keyword in expression"))
                }
                _ => {
                    if self.peek(1).is_punct("=>") {
                        return self.arrow_function();
                    }
                    self.advance();
                    Ok(self.alloc(NodeKind::Ident { name: w }, start))
                }
            },
            TokenKind::Eof => Err(self.err_here("unexpected end of input")),
            _ => Err(self.err_here("unexpected token in expression")),
        }
    }

    fn object_literal(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        self.expect_punct("{")?;
        let mut values = Vec::new();
        while !self.cur().is_punct("}") {
            if self.at_eof() {
                return Err(self.err_here("unterminated object literal"));
            }
            if self.cur().is_punct("...") {
                let s = self.cur_start();
                self.advance();
                let _ = self.assign_expr()?;
                values.push(self.alloc(NodeKind::UnanalyzedExpr, s));
            } else {
                let key_is_name = matches!(
                    self.cur().kind,
                    TokenKind::Ident(_) | TokenKind::Str(_) | TokenKind::Num(_)
                );
                if !key_is_name {
                    return Err(self.err_here("expected property key in object literal"));
                }
                let key_tok = self.advance();
                if self.eat_punct(":") {
                    values.push(self.assign_expr()?);
                } else if self.cur().is_punct("(") {
                    // method shorthand: skip params and body, keep opaque
                    let s = key_tok.start;
                    self.skip_balanced("(", ")")?;
                    if self.cur().is_punct("{") {
                        self.skip_balanced("{", "}")?;
                    }
                    values.push(self.alloc(NodeKind::UnanalyzedExpr, s));
                } else {
                    // shorthand property `{ x }`
                    match key_tok.kind {
                        TokenKind::Ident(name) if !RESERVED.contains(&name.as_str()) => {
                            let id = self.alloc_spanned(
                                NodeKind::Ident { name },
                                Span::new(self.file.clone(), key_tok.start, key_tok.end),
                            );
                            values.push(id);
                        }
                        _ => return Err(self.err_here("expected `:` after property key")),
                    }
                }
            }
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct("}")?;
        Ok(self.alloc(NodeKind::ObjectLit { values }, start))
    }

    fn arrow_follows_parens(&self) -> bool {
        debug_assert!(self.cur().is_punct("("));
        let mut depth = 0i32;
        let mut i = self.pos;
        while i < self.tokens.len() {
            match &self.tokens[i].kind {
                TokenKind::Punct("(") | TokenKind::Punct("[") | TokenKind::Punct("{") => {
                    depth += 1
                }
                TokenKind::Punct(")") | TokenKind::Punct("]") | TokenKind::Punct("}") => {
                    depth -= 1;
                    if depth == 0 {
                        return self
                            .tokens
                            .get(i + 1)
                            .is_some_and(|t| t.is_punct("=>"));
                    }
                }
                TokenKind::Eof => return false,
                _ => {}
            }
            i += 1;
        }
        false
    }

    fn arrow_function(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        let mut params = Vec::new();
        if self.cur().is_punct("(") {
            self.advance();
            while !self.cur().is_punct(")") {
                if self.at_eof() {
                    return Err(self.err_here("unterminated parameter list"));
                }
                params.push(self.param()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(")")?;
        } else {
            params.push(self.ident_node()?);
        }
        if self.options.lenient_types && self.eat_punct(":") {
            self.skip_type(&["=>"]);
        }
        self.expect_punct("=>")?;
        let body = if self.cur().is_punct("{") {
            FuncBody::Block(self.block()?)
        } else {
            FuncBody::Expr(self.assign_expr()?)
        };
        Ok(self.alloc(
            NodeKind::Function {
                name: None,
                params,
                body,
                arrow: true,
            },
            start,
        ))
    }

    /// Parses `function` tail: optional name, parameter list, block body.
    fn function_rest(
        &mut self,
        start: (u32, u32),
        _arrow: bool,
        name_expected: bool,
    ) -> Result<NodeId, SyntaxError> {
        let name = match self.cur().ident() {
            Some(w) if !RESERVED.contains(&w) => {
                let n = w.to_string();
                self.advance();
                Some(n)
            }
            _ if name_expected => return Err(self.err_here("expected function name")),
            _ => None,
        };
        self.expect_punct("(")?;
        let mut params = Vec::new();
        while !self.cur().is_punct(")") {
            if self.at_eof() {
                return Err(self.err_here("unterminated parameter list"));
            }
            params.push(self.param()?);
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(")")?;
        if self.options.lenient_types && self.eat_punct(":") {
            self.skip_type(&["{"]);
        }
        let body = FuncBody::Block(self.block()?);
        Ok(self.alloc(
            NodeKind::Function {
                name,
                params,
                body,
                arrow: false,
            },
            start,
        ))
    }

    fn param(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.cur_start();
        if self.cur().is_punct("...") || self.cur().is_punct("{") || self.cur().is_punct("[") {
            // rest/destructuring parameters are outside the subset
            self.skip_param_pattern()?;
            return Ok(self.alloc(NodeKind::UnanalyzedExpr, start));
        }
        let name = self.ident_node()?;
        if self.options.lenient_types {
            self.eat_punct("?");
            if self.eat_punct(":") {
                self.skip_type(&[",", ")", "="]);
            }
        }
        if self.eat_punct("=") {
            let _ = self.assign_expr()?;
        }
        Ok(name)
    }

    fn skip_param_pattern(&mut self) -> Result<(), SyntaxError> {
        if self.cur().is_punct("...") {
            self.advance();
        }
        if self.cur().is_punct("{") {
            self.skip_balanced("{", "}")?;
        } else if self.cur().is_punct("[") {
            self.skip_balanced("[", "]")?;
        } else {
            self.ident_node()?;
        }
        Ok(())
    }

    fn skip_balanced(&mut self, open: &str, close: &str) -> Result<(), SyntaxError> {
        self.expect_punct(open)?;
        let mut depth = 1i32;
        while depth > 0 {
            if self.at_eof() {
                return Err(self.err_here(&format!("unterminated `{open}`")));
            }
            let t = self.advance();
            match &t.kind {
                TokenKind::Punct(p) if *p == open => depth += 1,
                TokenKind::Punct(p) if *p == close => depth -= 1,
                _ => {}
            }
        }
        Ok(())
    }

    fn skip_unanalyzed_expression(&mut self, start: (u32, u32)) -> NodeId {
        // `class ...` expression: consume up to and including the brace body.
        while !self.at_eof() && !self.cur().is_punct("{") {
            self.advance();
        }
        if self.cur().is_punct("{") {
            let _ = self.skip_balanced("{", "}");
        }
        self.alloc(NodeKind::UnanalyzedExpr, start)
    }

    /// Best-effort TypeScript type-expression skip, used in lenient mode.
    /// Consumes until one of `stops` appears at bracket depth zero.
    fn skip_type(&mut self, stops: &[&str]) {
        let mut depth = 0i32;
        let mut angle = 0i32;
        while !self.at_eof() {
            let t = self.cur();
            if depth == 0 && angle == 0 {
                if let TokenKind::Punct(p) = &t.kind {
                    if stops.contains(p) {
                        return;
                    }
                    if matches!(*p, ";" | "}") {
                        return;
                    }
                }
                if t.newline_before {
                    return;
                }
            }
            match &t.kind {
                TokenKind::Punct("(") | TokenKind::Punct("[") | TokenKind::Punct("{") => {
                    depth += 1
                }
                TokenKind::Punct(")") | TokenKind::Punct("]") | TokenKind::Punct("}") => {
                    if depth == 0 {
                        return;
                    }
                    depth -= 1;
                }
                TokenKind::Punct("<") => angle += 1,
                TokenKind::Punct(">") => angle = (angle - 1).max(0),
                TokenKind::Punct(">>") => angle = (angle - 2).max(0),
                TokenKind::Punct(">>>") => angle = (angle - 3).max(0),
                _ => {}
            }
            self.advance();
        }
    }
}

struct DepthGuard;

#[derive(Debug, Clone, Copy)]
enum BinOrLogical {
    Binary(BinaryOp),
    Logical(LogicalOp),
}

use BinOrLogical::{Binary as B, Logical as L};

/// Binary operator levels, loosest first.
const BINARY_LEVELS: &[&[(&str, BinOrLogical)]] = &[
    &[("??", L(LogicalOp::Nullish))],
    &[("||", L(LogicalOp::Or))],
    &[("&&", L(LogicalOp::And))],
    &[("|", B(BinaryOp::BitOr))],
    &[("^", B(BinaryOp::BitXor))],
    &[("&", B(BinaryOp::BitAnd))],
    &[
        ("===", B(BinaryOp::StrictEq)),
        ("!==", B(BinaryOp::StrictNotEq)),
        ("==", B(BinaryOp::Eq)),
        ("!=", B(BinaryOp::NotEq)),
    ],
    &[
        ("<=", B(BinaryOp::LtEq)),
        (">=", B(BinaryOp::GtEq)),
        ("<", B(BinaryOp::Lt)),
        (">", B(BinaryOp::Gt)),
        ("instanceof", B(BinaryOp::Instanceof)),
        ("in", B(BinaryOp::In)),
    ],
    &[
        ("<<", B(BinaryOp::Shl)),
        (">>", B(BinaryOp::Shr)),
        (">>>", B(BinaryOp::UShr)),
    ],
    &[("+", B(BinaryOp::Add)), ("-", B(BinaryOp::Sub))],
    &[
        ("*", B(BinaryOp::Mul)),
        ("/", B(BinaryOp::Div)),
        ("%", B(BinaryOp::Rem)),
    ],
];

/// Tokens that keep an unanalyzed statement going across a newline.
fn continues_statement(kind: &TokenKind) -> bool {
    matches!(
        kind,
        TokenKind::Punct(
            "." | "," | "+" | "-" | "*" | "/" | "%" | "=" | "==" | "===" | "!=" | "!=="
                | "&&" | "||" | "??" | "?" | ":" | "(" | "[" | "{" | "=>"
        )
    )
}

fn describe(kind: &TokenKind) -> String {
    match kind {
        TokenKind::Ident(s) => format!("`{s}`"),
        TokenKind::Num(s) => format!("number `{s}`"),
        TokenKind::Str(_) => "string literal".into(),
        TokenKind::Template { .. } => "template literal".into(),
        TokenKind::Punct(p) => format!("`{p}`"),
        TokenKind::Eof => "end of input".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_src(src: &str) -> Result<Ast, SyntaxError> {
        parse(&SourceFile::new("test.js", src))
    }

    fn count_kind(ast: &Ast, pred: impl Fn(&NodeKind) -> bool) -> usize {
        ast.ids().filter(|&id| pred(ast.kind(id))).count()
    }

    #[test]
    fn empty_file_parses_to_empty_program() {
        let ast = parse_src("").unwrap();
        match ast.kind(ast.root()) {
            NodeKind::Program { body } => assert!(body.is_empty()),
            k => panic!("unexpected root {k:?}"),
        }
    }

    #[test]
    fn unbalanced_paren_is_a_syntax_error() {
        let err = parse_src("let x = (").unwrap_err();
        assert_eq!(err.span.start_line, 1);
    }

    #[test]
    fn bad_call_snippet_has_two_member_callees() {
        let src = "let fs = require('fs');\nlet filename = \"my_file.txt\";\nlet size = fs.size(filename);\nfs.readFile(filename, (err, file_contents) => {\n    console.log(\"File contents: \" + file_contents);\n});\n";
        let ast = parse_src(src).unwrap();
        let mut member_callees = Vec::new();
        for id in ast.ids() {
            if let NodeKind::Call { callee, .. } = ast.kind(id) {
                if let NodeKind::Member { property, .. } = ast.kind(*callee) {
                    if let Some(name) = property.const_name() {
                        member_callees.push(name.to_string());
                    }
                }
            }
        }
        member_callees.sort();
        assert!(member_callees.contains(&"size".to_string()));
        assert!(member_callees.contains(&"readFile".to_string()));
    }

    #[test]
    fn bracket_constant_string_records_const_index() {
        let ast = parse_src("let y = x[\"f\"];\nlet z = x[k];").unwrap();
        let mut consts = 0;
        let mut dyns = 0;
        for id in ast.ids() {
            if let NodeKind::Member { property, .. } = ast.kind(id) {
                match property {
                    MemberProperty::BracketConst(name) => {
                        assert_eq!(name, "f");
                        consts += 1;
                    }
                    MemberProperty::BracketDyn(_) => dyns += 1,
                    MemberProperty::Dot(_) => {}
                }
            }
        }
        assert_eq!((consts, dyns), (1, 1));
    }

    #[test]
    fn out_of_subset_statements_become_unanalyzed() {
        let src = "for (let i = 0; i < 3; i = i + 1) { touch(i); }\nlet a = 1;\nswitch (a) { case 1: break; }\nlet b = 2;";
        let ast = parse_src(src).unwrap();
        assert_eq!(
            count_kind(&ast, |k| matches!(k, NodeKind::UnanalyzedStmt)),
            2
        );
        assert_eq!(count_kind(&ast, |k| matches!(k, NodeKind::VarDecl { .. })), 2);
    }

    #[test]
    fn template_with_interpolation_is_opaque() {
        let ast = parse_src("let a = `x${y}z`;\nlet b = `plain`;").unwrap();
        assert_eq!(
            count_kind(&ast, |k| matches!(k, NodeKind::UnanalyzedExpr)),
            1
        );
        assert_eq!(
            count_kind(
                &ast,
                |k| matches!(k, NodeKind::StringLit { value } if value == "plain")
            ),
            1
        );
    }

    #[test]
    fn import_default_and_require_forms() {
        let ast = parse_src("import path from 'path';\nlet fs = require('fs');").unwrap();
        assert_eq!(
            count_kind(
                &ast,
                |k| matches!(k, NodeKind::ImportDefault { module, .. } if module == "path")
            ),
            1
        );
    }

    #[test]
    fn parse_is_deterministic() {
        let src = "let fs = require('fs');\nif (fs.size) { fs.size('x'); }\n";
        let a = parse_src(src).unwrap();
        let b = parse_src(src).unwrap();
        assert_eq!(a.len(), b.len());
        for id in a.ids() {
            assert_eq!(a.kind(id), b.kind(id));
            assert_eq!(a.span(id), b.span(id));
        }
    }

    #[test]
    fn spans_point_inside_file() {
        let src = "let fs = require('fs');\nfs.readFile(\"a\", (err, d) => {\n  console.log(d);\n});\n";
        let ast = parse_src(src).unwrap();
        let line_count = src.lines().count() as u32;
        for id in ast.ids() {
            let span = ast.span(id);
            assert!(span.start_line >= 1 && span.end_line <= line_count + 1);
            assert!((span.start_line, span.start_col) <= (span.end_line, span.end_col));
        }
    }

    #[test]
    fn lenient_mode_strips_annotations() {
        let src = "function f(a: string, b?: number): string {\n  let x: string = a;\n  return x;\n}\n";
        assert!(parse_src(src).is_err());
        let ast = parse_with(
            &SourceFile::new("test.ts", src),
            ParseOptions {
                lenient_types: true,
            },
        )
        .unwrap();
        assert_eq!(count_kind(&ast, |k| matches!(k, NodeKind::Function { .. })), 1);
    }

    #[test]
    fn ternary_and_computed_index_parse() {
        let src = "function withTrailingSlash(path) {\n  return path[path.length-1] === '/' ? path : path+'/';\n}\n";
        let ast = parse_src(src).unwrap();
        assert_eq!(count_kind(&ast, |k| matches!(k, NodeKind::Ternary { .. })), 1);
        assert_eq!(
            count_kind(
                &ast,
                |k| matches!(k, NodeKind::Member { property: MemberProperty::Dot(n), .. } if n == "length")
            ),
            1
        );
    }
}
