//! Extraction of ⟨access-path, property⟩ observations from per-file path
//! maps, and their aggregation into mergeable count tables.

use crate::access_paths::{parse_path, AccessPath, PathMap};
use crate::frontend::{AssignOp, Ast, NodeId, NodeKind, Span};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

/// One ⟨path, property⟩ combination.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairKey {
    pub path: AccessPath,
    pub prop: String,
}

impl PairKey {
    pub fn new(path: AccessPath, prop: impl Into<String>) -> Self {
        let prop = prop.into();
        debug_assert!(!prop.is_empty(), "empty property name");
        Self { path, prop }
    }
}

/// One mined occurrence of a pair: a member-access expression in a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub key: PairKey,
    pub span: Span,
}

/// Mergeable aggregate of pair counts with their two marginals. The
/// invariants `n_path(a) = Σ_p k(a,p)`, `n_prop(p) = Σ_a k(a,p)` and
/// `total = Σ k` hold by construction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountTable {
    pairs: BTreeMap<PairKey, u64>,
    path_totals: BTreeMap<AccessPath, u64>,
    prop_totals: BTreeMap<String, u64>,
    total: u64,
}

impl CountTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: PairKey, count: u64) {
        if count == 0 {
            return;
        }
        *self.path_totals.entry(key.path.clone()).or_default() += count;
        *self.prop_totals.entry(key.prop.clone()).or_default() += count;
        *self.pairs.entry(key).or_default() += count;
        self.total += count;
    }

    pub fn pair_count(&self, key: &PairKey) -> u64 {
        self.pairs.get(key).copied().unwrap_or(0)
    }

    /// Number of observations whose base path is exactly `path`.
    pub fn path_total(&self, path: &AccessPath) -> u64 {
        self.path_totals.get(path).copied().unwrap_or(0)
    }

    pub fn prop_total(&self, prop: &str) -> u64 {
        self.prop_totals.get(prop).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&PairKey, u64)> {
        self.pairs.iter().map(|(k, &v)| (k, v))
    }

    pub fn unique_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Emits one observation per property read `e.p` (dot or constant-string
/// bracket form) per access path of `e`, in source order. Property writes
/// do not count as observations; they feed the checker's assignment index
/// instead.
pub fn extract(ast: &Ast, paths: &PathMap) -> Vec<Observation> {
    let mut out = Vec::new();
    for id in ast.ids() {
        let NodeKind::Member { object, property } = ast.kind(id) else {
            continue;
        };
        let Some(prop) = property.const_name() else {
            continue;
        };
        if !is_property_read(ast, id) {
            continue;
        }
        let Some(base_paths) = paths.paths(*object) else {
            continue;
        };
        for p in base_paths {
            out.push(Observation {
                key: PairKey::new(p.clone(), prop),
                span: ast.span(id).clone(),
            });
        }
    }
    out.sort_by(|a, b| (&a.span, &a.key).cmp(&(&b.span, &b.key)));
    out
}

/// A member access is a read unless it is the target of a plain assignment
/// or the operand of `delete`.
pub(crate) fn is_property_read(ast: &Ast, member: NodeId) -> bool {
    match ast.parent(member).map(|p| (p, ast.kind(p))) {
        Some((_, NodeKind::Assign { op, target, .. })) => {
            !(*target == member && *op == AssignOp::Assign)
        }
        Some((_, NodeKind::Unary { op, .. })) => *op != crate::frontend::UnaryOp::Delete,
        _ => true,
    }
}

/// A member access that writes its property: the target of an assignment
/// (plain or compound).
pub(crate) fn is_property_write(ast: &Ast, member: NodeId) -> bool {
    matches!(
        ast.parent(member).map(|p| ast.kind(p)),
        Some(NodeKind::Assign { target, .. }) if *target == member
    )
}

pub fn aggregate(observations: impl IntoIterator<Item = Observation>) -> CountTable {
    let mut table = CountTable::new();
    for obs in observations {
        table.add(obs.key, 1);
    }
    table
}

/// Pointwise sum of two tables.
pub fn merge(mut left: CountTable, right: CountTable) -> CountTable {
    for (key, count) in right.pairs {
        left.add(key, count);
    }
    left
}

/// Errors reading or writing pair-count and observation files.
#[derive(Debug, thiserror::Error)]
pub enum PairFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{file}:{line}: {message}")]
    Format {
        file: String,
        line: usize,
        message: String,
    },
}

pub const PAIR_FILE_HEADER: &str = "path\tprop\tcount";

fn encode_prop(prop: &str) -> String {
    if prop.contains(['\t', '\n', '\r']) || prop.starts_with('\'') {
        let mut s = String::new();
        s.push('\'');
        for c in prop.chars() {
            match c {
                '\\' => s.push_str("\\\\"),
                '\'' => s.push_str("\\'"),
                '\n' => s.push_str("\\n"),
                '\t' => s.push_str("\\t"),
                '\r' => s.push_str("\\r"),
                _ => s.push(c),
            }
        }
        s.push('\'');
        s
    } else {
        prop.to_string()
    }
}

fn decode_prop(text: &str) -> Result<String, String> {
    if !text.starts_with('\'') {
        return Ok(text.to_string());
    }
    let inner = text
        .strip_prefix('\'')
        .and_then(|t| t.strip_suffix('\''))
        .ok_or_else(|| format!("unterminated quoted property `{text}`"))?;
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some(c) => out.push(c),
            None => return Err("dangling escape in property".to_string()),
        }
    }
    Ok(out)
}

/// Writes the tab-separated pair-count format: a header line, then one row
/// per pair sorted by (rendered path, prop).
pub fn save_table(table: &CountTable, mut dest: impl Write) -> Result<(), PairFileError> {
    writeln!(dest, "{PAIR_FILE_HEADER}")?;
    let mut rows: Vec<(String, &PairKey, u64)> = table
        .pairs()
        .map(|(k, c)| (k.path.render(), k, c))
        .collect();
    rows.sort_by(|a, b| (&a.0, &a.1.prop).cmp(&(&b.0, &b.1.prop)));
    for (rendered, key, count) in rows {
        writeln!(dest, "{rendered}\t{}\t{count}", encode_prop(&key.prop))?;
    }
    Ok(())
}

pub fn save_table_to(table: &CountTable, path: &Path) -> Result<(), PairFileError> {
    let file = std::fs::File::create(path)?;
    save_table(table, std::io::BufWriter::new(file))
}

pub fn load_table(src: impl BufRead, name: &str) -> Result<CountTable, PairFileError> {
    let mut table = CountTable::new();
    let mut lines = src.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header))) if header.trim_end() == PAIR_FILE_HEADER => {}
        Some((_, Ok(other))) => {
            return Err(PairFileError::Format {
                file: name.to_string(),
                line: 1,
                message: format!("expected header `{PAIR_FILE_HEADER}`, found `{other}`"),
            })
        }
        Some((_, Err(e))) => return Err(e.into()),
        None => {
            return Err(PairFileError::Format {
                file: name.to_string(),
                line: 1,
                message: "empty file, expected a header".to_string(),
            })
        }
    }
    for (idx, line) in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let err = |message: String| PairFileError::Format {
            file: name.to_string(),
            line: idx + 1,
            message,
        };
        let mut cols = line.split('\t');
        let (Some(path_text), Some(prop_text), Some(count_text), None) =
            (cols.next(), cols.next(), cols.next(), cols.next())
        else {
            return Err(err("expected 3 tab-separated columns".to_string()));
        };
        let path = parse_path(path_text).map_err(|e| err(e.to_string()))?;
        let prop = decode_prop(prop_text).map_err(err)?;
        if prop.is_empty() {
            return Err(err("empty property name".to_string()));
        }
        let count: u64 = count_text
            .parse()
            .map_err(|_| err(format!("bad count `{count_text}`")))?;
        if count == 0 {
            return Err(err("counts must be >= 1".to_string()));
        }
        table.add(PairKey::new(path, prop), count);
    }
    Ok(table)
}

pub fn load_table_from(path: &Path) -> Result<CountTable, PairFileError> {
    let file = std::fs::File::open(path)?;
    load_table(
        std::io::BufReader::new(file),
        &path.display().to_string(),
    )
}

/// Writes the observation log: `path<TAB>prop<TAB>file:line:col` rows.
pub fn save_observations(
    observations: &[Observation],
    mut dest: impl Write,
) -> Result<(), PairFileError> {
    let mut rows: Vec<String> = observations
        .iter()
        .map(|o| {
            format!(
                "{}\t{}\t{}:{}:{}",
                o.key.path.render(),
                encode_prop(&o.key.prop),
                o.span.file,
                o.span.start_line,
                o.span.start_col
            )
        })
        .collect();
    rows.sort();
    for row in rows {
        writeln!(dest, "{row}")?;
    }
    Ok(())
}

/// Reads the sorted `path<TAB>prop` pair-list format used for anomalous
/// pair sets.
pub fn load_pair_list(src: impl BufRead, name: &str) -> Result<Vec<PairKey>, PairFileError> {
    let mut out = Vec::new();
    for (idx, line) in src.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let err = |message: String| PairFileError::Format {
            file: name.to_string(),
            line: idx + 1,
            message,
        };
        let mut cols = line.split('\t');
        let (Some(path_text), Some(prop_text), None) = (cols.next(), cols.next(), cols.next())
        else {
            return Err(err("expected 2 tab-separated columns".to_string()));
        };
        let path = parse_path(path_text).map_err(|e| err(e.to_string()))?;
        let prop = decode_prop(prop_text).map_err(err)?;
        out.push(PairKey::new(path, prop));
    }
    Ok(out)
}

pub fn save_pair_list(pairs: &[PairKey], mut dest: impl Write) -> Result<(), PairFileError> {
    let mut rows: Vec<String> = pairs
        .iter()
        .map(|k| format!("{}\t{}", k.path.render(), encode_prop(&k.prop)))
        .collect();
    rows.sort();
    for row in rows {
        writeln!(dest, "{row}")?;
    }
    Ok(())
}
