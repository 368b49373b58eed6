use super::{Span, SyntaxError};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Num(String),
    Str(String),
    /// Backtick string. Interpolated templates are outside the subset and
    /// become opaque expressions; plain backtick strings act as literals.
    Template {
        value: String,
        has_interp: bool,
    },
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub start: (u32, u32),
    pub end: (u32, u32),
    pub newline_before: bool,
}

impl Token {
    pub fn ident(&self) -> Option<&str> {
        match &self.kind {
            TokenKind::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(&self.kind, TokenKind::Punct(q) if *q == p)
    }

    pub fn is_ident(&self, word: &str) -> bool {
        matches!(&self.kind, TokenKind::Ident(s) if s == word)
    }
}

pub struct Lexer<'a> {
    file: Arc<str>,
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    _src: &'a str,
}

const PUNCTS: &[&str] = &[
    ">>>=", "===", "!==", ">>>", "**=", "<<=", ">>=", "&&=", "||=", "??=", "=>", "==", "!=", "<=",
    ">=", "&&", "||", "??", "<<", ">>", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "++",
    "--", "**", "?.", "...", "(", ")", "[", "]", "{", "}", ";", ",", ".", "?", ":", "=", "<", ">",
    "+", "-", "*", "/", "%", "!", "&", "|", "^", "~",
];

impl<'a> Lexer<'a> {
    pub fn new(file: Arc<str>, src: &'a str) -> Self {
        Self {
            file,
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            _src: src,
        }
    }

    pub fn tokenize(mut self) -> Result<Vec<Token>, SyntaxError> {
        let mut tokens = Vec::new();
        let mut newline_before = false;
        loop {
            newline_before |= self.skip_trivia();
            let start = (self.line, self.col);
            let Some(&c) = self.chars.get(self.pos) else {
                tokens.push(Token {
                    kind: TokenKind::Eof,
                    start,
                    end: start,
                    newline_before,
                });
                return Ok(tokens);
            };
            let kind = if is_ident_start(c) {
                self.lex_ident()
            } else if c.is_ascii_digit() || (c == '.' && self.peek_is_digit(1)) {
                self.lex_number()
            } else if c == '"' || c == '\'' {
                self.lex_string(c)?
            } else if c == '`' {
                self.lex_template()?
            } else {
                self.lex_punct(start)?
            };
            let end = (self.line, self.col);
            tokens.push(Token {
                kind,
                start,
                end,
                newline_before,
            });
            newline_before = false;
        }
    }

    fn span_at(&self, start: (u32, u32)) -> Span {
        Span::new(self.file.clone(), start, (self.line, self.col))
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn peek_is_digit(&self, ahead: usize) -> bool {
        self.peek(ahead).is_some_and(|c| c.is_ascii_digit())
    }

    /// Skips whitespace and comments; returns true if a newline was crossed.
    fn skip_trivia(&mut self) -> bool {
        let mut saw_newline = false;
        loop {
            match self.peek(0) {
                Some(c) if c.is_whitespace() => {
                    saw_newline |= c == '\n';
                    self.bump();
                }
                Some('/') if self.peek(1) == Some('/') => {
                    while let Some(c) = self.peek(0) {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some('/') if self.peek(1) == Some('*') => {
                    self.bump();
                    self.bump();
                    loop {
                        match self.peek(0) {
                            Some('*') if self.peek(1) == Some('/') => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            Some(c) => {
                                saw_newline |= c == '\n';
                                self.bump();
                            }
                            None => break,
                        }
                    }
                }
                _ => return saw_newline,
            }
        }
    }

    fn lex_ident(&mut self) -> TokenKind {
        let mut s = String::new();
        while let Some(c) = self.peek(0) {
            if is_ident_continue(c) {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        TokenKind::Ident(s)
    }

    fn lex_number(&mut self) -> TokenKind {
        let mut s = String::new();
        if self.peek(0) == Some('0') && matches!(self.peek(1), Some('x') | Some('X')) {
            s.push(self.bump().unwrap());
            s.push(self.bump().unwrap());
            while let Some(c) = self.peek(0) {
                if c.is_ascii_hexdigit() {
                    s.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            return TokenKind::Num(s);
        }
        let mut seen_dot = false;
        let mut seen_exp = false;
        while let Some(c) = self.peek(0) {
            if c.is_ascii_digit() {
                s.push(c);
                self.bump();
            } else if c == '.' && !seen_dot && !seen_exp && self.peek_is_digit(1) {
                seen_dot = true;
                s.push(c);
                self.bump();
            } else if (c == 'e' || c == 'E') && !seen_exp && !s.is_empty() {
                let next = self.peek(1);
                let ok = next.is_some_and(|n| n.is_ascii_digit())
                    || (matches!(next, Some('+') | Some('-')) && self.peek_is_digit(2));
                if !ok {
                    break;
                }
                seen_exp = true;
                s.push(c);
                self.bump();
                if matches!(self.peek(0), Some('+') | Some('-')) {
                    s.push(self.bump().unwrap());
                }
            } else if c == '.' && !seen_dot && !seen_exp {
                // trailing dot as in `1.`
                seen_dot = true;
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        TokenKind::Num(s)
    }

    fn lex_string(&mut self, quote: char) -> Result<TokenKind, SyntaxError> {
        let start = (self.line, self.col);
        self.bump();
        let mut value = String::new();
        loop {
            match self.peek(0) {
                None | Some('\n') => {
                    return Err(SyntaxError {
                        message: "unterminated string literal".into(),
                        span: self.span_at(start),
                    })
                }
                Some(c) if c == quote => {
                    self.bump();
                    return Ok(TokenKind::Str(value));
                }
                Some('\\') => {
                    self.bump();
                    self.lex_escape(&mut value);
                }
                Some(c) => {
                    value.push(c);
                    self.bump();
                }
            }
        }
    }

    fn lex_escape(&mut self, out: &mut String) {
        match self.bump() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some('b') => out.push('\u{8}'),
            Some('f') => out.push('\u{c}'),
            Some('v') => out.push('\u{b}'),
            Some('0') => out.push('\0'),
            Some('\n') => {}
            Some('x') => {
                let mut v = 0u32;
                for _ in 0..2 {
                    if let Some(d) = self.peek(0).and_then(|c| c.to_digit(16)) {
                        v = v * 16 + d;
                        self.bump();
                    }
                }
                out.push(char::from_u32(v).unwrap_or('\u{fffd}'));
            }
            Some('u') => {
                let mut v = 0u32;
                if self.peek(0) == Some('{') {
                    self.bump();
                    while let Some(d) = self.peek(0).and_then(|c| c.to_digit(16)) {
                        v = v * 16 + d;
                        self.bump();
                    }
                    if self.peek(0) == Some('}') {
                        self.bump();
                    }
                } else {
                    for _ in 0..4 {
                        if let Some(d) = self.peek(0).and_then(|c| c.to_digit(16)) {
                            v = v * 16 + d;
                            self.bump();
                        }
                    }
                }
                out.push(char::from_u32(v).unwrap_or('\u{fffd}'));
            }
            Some(c) => out.push(c),
            None => {}
        }
    }

    fn lex_template(&mut self) -> Result<TokenKind, SyntaxError> {
        let start = (self.line, self.col);
        self.bump();
        let mut value = String::new();
        let mut has_interp = false;
        loop {
            match self.peek(0) {
                None => {
                    return Err(SyntaxError {
                        message: "unterminated template literal".into(),
                        span: self.span_at(start),
                    })
                }
                Some('`') => {
                    self.bump();
                    return Ok(TokenKind::Template { value, has_interp });
                }
                Some('\\') => {
                    self.bump();
                    self.lex_escape(&mut value);
                }
                Some('$') if self.peek(1) == Some('{') => {
                    has_interp = true;
                    self.bump();
                    self.bump();
                    let mut depth = 1u32;
                    while depth > 0 {
                        match self.bump() {
                            Some('{') => depth += 1,
                            Some('}') => depth -= 1,
                            Some(_) => {}
                            None => {
                                return Err(SyntaxError {
                                    message: "unterminated template interpolation".into(),
                                    span: self.span_at(start),
                                })
                            }
                        }
                    }
                }
                Some(c) => {
                    value.push(c);
                    self.bump();
                }
            }
        }
    }

    fn lex_punct(&mut self, start: (u32, u32)) -> Result<TokenKind, SyntaxError> {
        for p in PUNCTS {
            if self.matches_str(p) {
                for _ in 0..p.chars().count() {
                    self.bump();
                }
                return Ok(TokenKind::Punct(p));
            }
        }
        let c = self.peek(0).unwrap();
        Err(SyntaxError {
            message: format!("unexpected character `{c}`"),
            span: self.span_at(start),
        })
    }

    fn matches_str(&self, p: &str) -> bool {
        p.chars()
            .enumerate()
            .all(|(i, pc)| self.peek(i) == Some(pc))
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}
