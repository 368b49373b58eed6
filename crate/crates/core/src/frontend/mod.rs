//! Parsing front end: lexer, recursive-descent parser for the analyzed
//! JavaScript subset, per-function control-flow graphs and dominators.

mod ast;
mod cfg;
mod dom;
mod lexer;
mod parser;

pub use ast::{
    AssignOp, Ast, BinaryOp, DeclKind, Declarator, FuncBody, LogicalOp, MemberProperty, Node,
    NodeId, NodeKind, UnaryOp,
};
pub use cfg::{build_cfg, function_cfgs, BlockId, Cfg, CfgOwner, FunctionCfg};
pub use dom::{dominators, DomInfo};
pub use parser::{parse, parse_with, ParseOptions};

use std::path::{Path, PathBuf};
use std::sync::Arc;

/// One input file: a path (used in diagnostics and reports) plus its text.
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub path: PathBuf,
    pub text: String,
}

impl SourceFile {
    pub fn new(path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        let path = path.into();
        assert!(!path.as_os_str().is_empty(), "source file path is empty");
        Self {
            path,
            text: text.into(),
        }
    }

    /// Read a file from disk, requiring valid UTF-8.
    pub fn read(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::new(path.to_path_buf(), text))
    }
}

/// Source region with 1-based line/column endpoints, inclusive of start,
/// exclusive of the character following `end_col`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub file: Arc<str>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn new(file: Arc<str>, start: (u32, u32), end: (u32, u32)) -> Self {
        debug_assert!(start <= end, "span start after end");
        Self {
            file,
            start_line: start.0,
            start_col: start.1,
            end_line: end.0,
            end_col: end.1,
        }
    }

    pub fn start(&self) -> (u32, u32) {
        (self.start_line, self.start_col)
    }

    pub fn end(&self) -> (u32, u32) {
        (self.end_line, self.end_col)
    }
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

/// Unrecoverable parse failure, with the position of the offending token.
#[derive(Debug, Clone, thiserror::Error)]
#[error("syntax error at {span}: {message}")]
pub struct SyntaxError {
    pub message: String,
    pub span: Span,
}
