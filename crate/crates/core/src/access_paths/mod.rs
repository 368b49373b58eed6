//! The access-path value abstraction: a root (package import or built-in
//! literal type) followed by property reads, calls, argument positions, and
//! instantiations. Paths render to a canonical, injective textual form that
//! the pair files and configuration reuse.

mod infer;
mod scopes;

pub use infer::{infer_paths, InferOptions, PathMap};
pub use scopes::{resolve_scopes, Binding, BindingId, ScopeInfo};

use std::fmt;

/// Built-in root types for paths not rooted in a package import.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BuiltinKind {
    String,
    Number,
    Boolean,
    Promise,
    Array,
}

impl BuiltinKind {
    pub const ALL: [BuiltinKind; 5] = [
        BuiltinKind::String,
        BuiltinKind::Number,
        BuiltinKind::Boolean,
        BuiltinKind::Promise,
        BuiltinKind::Array,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinKind::String => "String",
            BuiltinKind::Number => "Number",
            BuiltinKind::Boolean => "Boolean",
            BuiltinKind::Promise => "Promise",
            BuiltinKind::Array => "Array",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Root {
    /// `require('m')` or a default import of `m`.
    Require(String),
    Builtin(BuiltinKind),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    /// Property read `.f`.
    Prop(String),
    /// Function call result `()`.
    Call,
    /// The i-th argument of a function represented by the path, `(i)`.
    Arg(u32),
    /// Instance created by `new`, rendered `#new()` so it cannot collide
    /// with a property literally named `new`.
    New,
}

/// Application-independent description of how a value is obtained.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AccessPath {
    pub root: Root,
    pub steps: Vec<Step>,
}

impl AccessPath {
    pub fn require(module: impl Into<String>) -> Self {
        let module = module.into();
        debug_assert!(!module.is_empty(), "empty module name");
        AccessPath {
            root: Root::Require(module),
            steps: Vec::new(),
        }
    }

    pub fn builtin(kind: BuiltinKind) -> Self {
        AccessPath {
            root: Root::Builtin(kind),
            steps: Vec::new(),
        }
    }

    pub fn child(&self, step: Step) -> Self {
        let mut steps = self.steps.clone();
        steps.push(step);
        AccessPath {
            root: self.root.clone(),
            steps,
        }
    }

    pub fn prop(&self, name: impl Into<String>) -> Self {
        self.child(Step::Prop(name.into()))
    }

    pub fn call(&self) -> Self {
        self.child(Step::Call)
    }

    pub fn arg(&self, index: u32) -> Self {
        self.child(Step::Arg(index))
    }

    pub fn new_instance(&self) -> Self {
        self.child(Step::New)
    }

    /// Canonical textual form; injective, see [`parse_path`].
    pub fn render(&self) -> String {
        self.to_string()
    }
}

fn is_plain_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_' || c == '$')
        && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '$')
}

fn escape_quoted(s: &str, out: &mut String) {
    out.push('\'');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out.push('\'');
}

impl fmt::Display for AccessPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        match &self.root {
            Root::Require(m) => {
                s.push_str("require(");
                escape_quoted(m, &mut s);
                s.push(')');
            }
            Root::Builtin(k) => s.push_str(k.name()),
        }
        for step in &self.steps {
            match step {
                Step::Prop(name) if is_plain_name(name) => {
                    s.push('.');
                    s.push_str(name);
                }
                Step::Prop(name) => {
                    s.push('[');
                    escape_quoted(name, &mut s);
                    s.push(']');
                }
                Step::Call => s.push_str("()"),
                Step::Arg(i) => {
                    s.push('(');
                    s.push_str(&i.to_string());
                    s.push(')');
                }
                Step::New => s.push_str("#new()"),
            }
        }
        f.write_str(&s)
    }
}

/// Failure to parse the canonical path syntax.
#[derive(Debug, Clone, thiserror::Error)]
#[error("malformed access path at byte {at}: {message}")]
pub struct PathSyntaxError {
    pub message: String,
    pub at: usize,
}

/// Inverse of [`AccessPath::render`] on its image.
pub fn parse_path(text: &str) -> Result<AccessPath, PathSyntaxError> {
    let mut p = PathParser {
        chars: text.chars().collect(),
        pos: 0,
    };
    let path = p.root_and_steps()?;
    if p.pos != p.chars.len() {
        return Err(p.err("trailing characters after path"));
    }
    Ok(path)
}

struct PathParser {
    chars: Vec<char>,
    pos: usize,
}

impl PathParser {
    fn err(&self, message: &str) -> PathSyntaxError {
        PathSyntaxError {
            message: message.to_string(),
            at: self.pos,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), PathSyntaxError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn name(&mut self) -> Result<String, PathSyntaxError> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '$')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a name"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn quoted(&mut self) -> Result<String, PathSyntaxError> {
        self.expect('\'')?;
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated quoted name")),
                Some('\'') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some('r') => out.push('\r'),
                    Some(c) => out.push(c),
                    None => return Err(self.err("dangling escape")),
                },
                Some(c) => out.push(c),
            }
        }
    }

    fn root_and_steps(&mut self) -> Result<AccessPath, PathSyntaxError> {
        let name = self.name()?;
        let root = if name == "require" {
            self.expect('(')?;
            let module = self.quoted()?;
            if module.is_empty() {
                return Err(self.err("empty module name"));
            }
            self.expect(')')?;
            Root::Require(module)
        } else {
            match BuiltinKind::from_name(&name) {
                Some(k) => Root::Builtin(k),
                None => return Err(self.err(&format!("unknown root `{name}`"))),
            }
        };
        let mut steps = Vec::new();
        loop {
            match self.peek() {
                Some('.') => {
                    self.pos += 1;
                    steps.push(Step::Prop(self.name()?));
                }
                Some('[') => {
                    self.pos += 1;
                    let name = self.quoted()?;
                    if name.is_empty() {
                        return Err(self.err("empty property name"));
                    }
                    self.expect(']')?;
                    steps.push(Step::Prop(name));
                }
                Some('(') => {
                    self.pos += 1;
                    if self.eat(')') {
                        steps.push(Step::Call);
                    } else {
                        let digits = {
                            let start = self.pos;
                            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                                self.pos += 1;
                            }
                            if self.pos == start {
                                return Err(self.err("expected argument index"));
                            }
                            self.chars[start..self.pos].iter().collect::<String>()
                        };
                        let index: u32 = digits
                            .parse()
                            .map_err(|_| self.err("argument index out of range"))?;
                        self.expect(')')?;
                        steps.push(Step::Arg(index));
                    }
                }
                Some('#') => {
                    self.pos += 1;
                    let kw = self.name()?;
                    if kw != "new" {
                        return Err(self.err("expected `new` after `#`"));
                    }
                    self.expect('(')?;
                    self.expect(')')?;
                    steps.push(Step::New);
                }
                _ => break,
            }
        }
        Ok(AccessPath { root, steps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_reference_examples() {
        let size_call = AccessPath::require("fs").prop("size").call();
        assert_eq!(size_call.render(), "require('fs').size()");

        let callback_arg = AccessPath::require("fs").prop("readFile").arg(1).arg(0);
        assert_eq!(callback_arg.render(), "require('fs').readFile(1)(0)");

        let lower = AccessPath::builtin(BuiltinKind::String)
            .prop("toLowerCase")
            .call();
        assert_eq!(lower.render(), "String.toLowerCase()");
    }

    #[test]
    fn parses_canonical_forms() {
        let p = parse_path("require('fs').size()").unwrap();
        assert_eq!(p, AccessPath::require("fs").prop("size").call());

        let root_only = parse_path("Array").unwrap();
        assert_eq!(root_only, AccessPath::builtin(BuiltinKind::Array));

        let with_new = parse_path("require('events').EventEmitter#new().on").unwrap();
        assert_eq!(
            with_new,
            AccessPath::require("events")
                .prop("EventEmitter")
                .new_instance()
                .prop("on")
        );
    }

    #[test]
    fn rejects_malformed_paths() {
        assert!(parse_path("require(fs").is_err());
        assert!(parse_path("require('fs')extra!").is_err());
        assert!(parse_path("Unknown.x").is_err());
        assert!(parse_path("require('fs').f(1x)").is_err());
        assert!(parse_path("").is_err());
    }

    #[test]
    fn escaped_property_names_round_trip() {
        let odd = AccessPath::require("m").prop("has space").prop("it's");
        let rendered = odd.render();
        assert_eq!(rendered, "require('m')['has space']['it\\'s']");
        assert_eq!(parse_path(&rendered).unwrap(), odd);
    }

    #[test]
    fn new_step_does_not_collide_with_property_named_new() {
        let prop_new = AccessPath::require("m").prop("new");
        let step_new = AccessPath::require("m").new_instance();
        assert_ne!(prop_new.render(), step_new.render());
        assert_eq!(parse_path(&prop_new.render()).unwrap(), prop_new);
        assert_eq!(parse_path(&step_new.render()).unwrap(), step_new);
    }
}
