//! Labeling of mined pairs against a declarative API model, and the
//! precision/recall metrics used to evaluate classifications.

mod model_file;

pub use model_file::{load_model, load_model_str};

use crate::miner::{CountTable, PairKey};
use crate::access_paths::{AccessPath, BuiltinKind, Root, Step};
use crate::stats::Classification;
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

/// Built-in types known to the model layer. Extends the path roots with
/// `Buffer` and `Object`, which occur in API models but never root paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BuiltinType {
    String,
    Number,
    Boolean,
    Promise,
    Array,
    Buffer,
    Object,
}

impl BuiltinType {
    pub const ALL: [BuiltinType; 7] = [
        BuiltinType::String,
        BuiltinType::Number,
        BuiltinType::Boolean,
        BuiltinType::Promise,
        BuiltinType::Array,
        BuiltinType::Buffer,
        BuiltinType::Object,
    ];

    /// The built-ins rarely extended with custom properties; missing
    /// properties on these label a pair incorrect directly.
    pub const STRICT: [BuiltinType; 5] = [
        BuiltinType::String,
        BuiltinType::Number,
        BuiltinType::Boolean,
        BuiltinType::Promise,
        BuiltinType::Array,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinType::String => "String",
            BuiltinType::Number => "Number",
            BuiltinType::Boolean => "Boolean",
            BuiltinType::Promise => "Promise",
            BuiltinType::Array => "Array",
            BuiltinType::Buffer => "Buffer",
            BuiltinType::Object => "Object",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }
}

impl From<BuiltinKind> for BuiltinType {
    fn from(k: BuiltinKind) -> Self {
        match k {
            BuiltinKind::String => BuiltinType::String,
            BuiltinKind::Number => BuiltinType::Number,
            BuiltinKind::Boolean => BuiltinType::Boolean,
            BuiltinKind::Promise => BuiltinType::Promise,
            BuiltinKind::Array => BuiltinType::Array,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeRef {
    Named(String),
    Any,
    TypeVar,
    Builtin(BuiltinType),
}

impl std::fmt::Display for TypeRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TypeRef::Named(n) => f.write_str(n),
            TypeRef::Any => f.write_str("any"),
            TypeRef::TypeVar => f.write_str("var"),
            TypeRef::Builtin(b) => f.write_str(b.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallSignature {
    pub params: Vec<TypeRef>,
    pub ret: TypeRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TypeDef {
    pub props: BTreeMap<String, TypeRef>,
    pub call: Option<CallSignature>,
    pub construct: Option<TypeRef>,
}

/// Declarative catalog of module types, named types, and built-ins, used
/// to label pairs correct or incorrect.
#[derive(Debug, Clone, Default)]
pub struct ApiModel {
    pub modules: BTreeMap<String, TypeRef>,
    pub types: BTreeMap<String, TypeDef>,
    pub builtins: BTreeMap<BuiltinType, TypeDef>,
}

impl ApiModel {
    /// Ensures every builtin entry exists and every named reference
    /// resolves; returns the violations otherwise.
    pub fn validate(&self) -> Result<(), ModelError> {
        let check = |t: &TypeRef, ctx: &str| -> Result<(), ModelError> {
            if let TypeRef::Named(n) = t {
                if !self.types.contains_key(n) {
                    return Err(ModelError::MissingType {
                        name: n.clone(),
                        context: ctx.to_string(),
                    });
                }
            }
            Ok(())
        };
        for (m, t) in &self.modules {
            check(t, &format!("modules.{m}"))?;
        }
        let walk_def = |name: &str, def: &TypeDef| -> Vec<(TypeRef, String)> {
            let mut refs = Vec::new();
            for (p, t) in &def.props {
                refs.push((t.clone(), format!("{name}.props.{p}")));
            }
            if let Some(sig) = &def.call {
                for (i, t) in sig.params.iter().enumerate() {
                    refs.push((t.clone(), format!("{name}.call.params[{i}]")));
                }
                refs.push((sig.ret.clone(), format!("{name}.call.ret")));
            }
            if let Some(c) = &def.construct {
                refs.push((c.clone(), format!("{name}.construct")));
            }
            refs
        };
        for (name, def) in &self.types {
            if BuiltinType::from_name(name).is_some() {
                return Err(ModelError::ReservedTypeName { name: name.clone() });
            }
            for (t, ctx) in walk_def(name, def) {
                check(&t, &ctx)?;
            }
        }
        for (b, def) in &self.builtins {
            for (t, ctx) in walk_def(b.name(), def) {
                check(&t, &ctx)?;
            }
        }
        for b in BuiltinType::ALL {
            if !self.builtins.contains_key(&b) {
                return Err(ModelError::MissingBuiltin { name: b.name() });
            }
        }
        Ok(())
    }

    fn type_def(&self, t: &TypeRef) -> Result<&TypeDef, ModelError> {
        match t {
            TypeRef::Named(n) => self.types.get(n).ok_or_else(|| ModelError::MissingType {
                name: n.clone(),
                context: "resolution".to_string(),
            }),
            TypeRef::Builtin(b) => self.builtins.get(b).ok_or(ModelError::MissingBuiltin {
                name: b.name(),
            }),
            _ => unreachable!("only named and builtin refs have definitions"),
        }
    }

    fn has_prop(&self, t: &TypeRef, prop: &str) -> Result<bool, ModelError> {
        Ok(self.type_def(t)?.props.contains_key(prop))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("model refers to unknown type `{name}` (at {context})")]
    MissingType { name: String, context: String },
    #[error("builtin `{name}` missing from model")]
    MissingBuiltin { name: &'static str },
    #[error("`{name}` is a reserved builtin name")]
    ReservedTypeName { name: String },
    #[error("bad type expression at {context}: {message}")]
    BadTypeExpr { context: String, message: String },
    #[error("model file: {0}")]
    Toml(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Why an access path failed to resolve to a concrete type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnresolvedReason {
    /// An intermediate or final type is `any`.
    AnyType,
    /// An intermediate or final type is a type variable.
    TypeVariable,
    /// A property step names a property the current type lacks.
    MissingProperty,
    /// A call/argument/constructor step with no matching signature, or an
    /// unknown module root.
    Unresolvable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    /// Resolved to a concrete named or builtin type.
    Type(TypeRef),
    Unresolved(UnresolvedReason),
}

/// Walks the steps of a path through the model. `any` and type variables
/// end resolution with the matching reason, mirroring how type-definition
/// lookups lose precision.
pub fn resolve(path: &AccessPath, model: &ApiModel) -> Result<Resolution, ModelError> {
    let mut current: TypeRef = match &path.root {
        Root::Require(m) => match model.modules.get(m) {
            Some(t) => t.clone(),
            None => return Ok(Resolution::Unresolved(UnresolvedReason::Unresolvable)),
        },
        Root::Builtin(k) => TypeRef::Builtin((*k).into()),
    };
    for step in &path.steps {
        match &current {
            TypeRef::Any => return Ok(Resolution::Unresolved(UnresolvedReason::AnyType)),
            TypeRef::TypeVar => {
                return Ok(Resolution::Unresolved(UnresolvedReason::TypeVariable))
            }
            _ => {}
        }
        let def = model.type_def(&current)?;
        current = match step {
            Step::Prop(name) => match def.props.get(name) {
                Some(t) => t.clone(),
                None => return Ok(Resolution::Unresolved(UnresolvedReason::MissingProperty)),
            },
            Step::Call => match &def.call {
                Some(sig) => sig.ret.clone(),
                None => return Ok(Resolution::Unresolved(UnresolvedReason::Unresolvable)),
            },
            Step::Arg(i) => match def.call.as_ref().and_then(|s| s.params.get(*i as usize)) {
                Some(t) => t.clone(),
                None => return Ok(Resolution::Unresolved(UnresolvedReason::Unresolvable)),
            },
            Step::New => match &def.construct {
                Some(t) => t.clone(),
                None => return Ok(Resolution::Unresolved(UnresolvedReason::Unresolvable)),
            },
        };
    }
    match current {
        TypeRef::Any => Ok(Resolution::Unresolved(UnresolvedReason::AnyType)),
        TypeRef::TypeVar => Ok(Resolution::Unresolved(UnresolvedReason::TypeVariable)),
        t => Ok(Resolution::Type(t)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Correct,
    Incorrect,
    Unclassified(UnresolvedReason),
}

/// Labels one pair. Correct when the resolved type has the property.
/// Incorrect when the type lacks it and either the type is one of the
/// strict built-ins or some other type in the model does have the
/// property; this exempts custom properties attached to packages.
pub fn label_pair(key: &PairKey, model: &ApiModel) -> Result<Label, ModelError> {
    let resolved = match resolve(&key.path, model)? {
        Resolution::Unresolved(r) => return Ok(Label::Unclassified(r)),
        Resolution::Type(t) => t,
    };
    if model.has_prop(&resolved, &key.prop)? {
        return Ok(Label::Correct);
    }
    if let TypeRef::Builtin(b) = &resolved {
        if BuiltinType::STRICT.contains(b) {
            return Ok(Label::Incorrect);
        }
    }
    // is the property known on some other type?
    let known_elsewhere = {
        let mut found = false;
        for (name, def) in &model.types {
            if matches!(&resolved, TypeRef::Named(n) if n == name) {
                continue;
            }
            if def.props.contains_key(&key.prop) {
                found = true;
                break;
            }
        }
        if !found {
            for (b, def) in &model.builtins {
                if matches!(&resolved, TypeRef::Builtin(rb) if rb == b) {
                    continue;
                }
                if def.props.contains_key(&key.prop) {
                    found = true;
                    break;
                }
            }
        }
        found
    };
    if known_elsewhere {
        Ok(Label::Incorrect)
    } else {
        Ok(Label::Unclassified(UnresolvedReason::MissingProperty))
    }
}

/// Correct/incorrect verdict stored in a [`LabelSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnownLabel {
    Correct,
    Incorrect,
}

/// Ground-truth labels; only correct/incorrect pairs are stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSet {
    map: BTreeMap<PairKey, KnownLabel>,
}

impl LabelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: PairKey, label: KnownLabel) {
        self.map.insert(key, label);
    }

    pub fn get(&self, key: &PairKey) -> Option<KnownLabel> {
        self.map.get(key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PairKey, KnownLabel)> {
        self.map.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn incorrect_count(&self) -> u64 {
        self.map
            .values()
            .filter(|l| **l == KnownLabel::Incorrect)
            .count() as u64
    }

    /// The labels with `keys` removed (held-out fold construction).
    pub fn without(&self, keys: &BTreeSet<PairKey>) -> LabelSet {
        LabelSet {
            map: self
                .map
                .iter()
                .filter(|(k, _)| !keys.contains(*k))
                .map(|(k, &v)| (k.clone(), v))
                .collect(),
        }
    }

    /// The labels restricted to `keys`.
    pub fn restricted_to(&self, keys: &BTreeSet<PairKey>) -> LabelSet {
        LabelSet {
            map: self
                .map
                .iter()
                .filter(|(k, _)| keys.contains(*k))
                .map(|(k, &v)| (k.clone(), v))
                .collect(),
        }
    }

    pub fn save(&self, mut dest: impl Write) -> std::io::Result<()> {
        let mut rows: Vec<String> = self
            .map
            .iter()
            .map(|(k, l)| {
                format!(
                    "{}\t{}\t{}",
                    k.path.render(),
                    k.prop,
                    match l {
                        KnownLabel::Correct => "correct",
                        KnownLabel::Incorrect => "incorrect",
                    }
                )
            })
            .collect();
        rows.sort();
        for row in rows {
            writeln!(dest, "{row}")?;
        }
        Ok(())
    }

    pub fn load(src: impl BufRead, name: &str) -> Result<LabelSet, crate::miner::PairFileError> {
        let mut set = LabelSet::new();
        for (idx, line) in src.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let err = |message: String| crate::miner::PairFileError::Format {
                file: name.to_string(),
                line: idx + 1,
                message,
            };
            let mut cols = line.split('\t');
            let (Some(path_text), Some(prop), Some(label), None) =
                (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(err("expected 3 tab-separated columns".to_string()));
            };
            let path = crate::access_paths::parse_path(path_text)
                .map_err(|e| err(e.to_string()))?;
            let label = match label {
                "correct" => KnownLabel::Correct,
                "incorrect" => KnownLabel::Incorrect,
                other => return Err(err(format!("unknown label `{other}`"))),
            };
            set.insert(PairKey::new(path, prop.to_string()), label);
        }
        Ok(set)
    }
}

/// Per-root tallies of a validation set, occurrences plus unique pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RootSummary {
    pub root: String,
    pub correct: u64,
    pub correct_unique: u64,
    pub incorrect: u64,
    pub incorrect_unique: u64,
    pub unclassified: u64,
    pub unclassified_unique: u64,
}

/// Labels every pair of a table, storing correct/incorrect pairs and
/// summarizing per root.
pub fn build_validation_set(
    table: &CountTable,
    model: &ApiModel,
) -> Result<(LabelSet, Vec<RootSummary>), ModelError> {
    let mut labels = LabelSet::new();
    let mut by_root: BTreeMap<String, RootSummary> = BTreeMap::new();
    for (key, count) in table.pairs() {
        let root_name = match &key.path.root {
            Root::Require(m) => m.clone(),
            Root::Builtin(b) => b.name().to_string(),
        };
        let summary = by_root.entry(root_name.clone()).or_insert_with(|| RootSummary {
            root: root_name,
            ..Default::default()
        });
        match label_pair(key, model)? {
            Label::Correct => {
                labels.insert(key.clone(), KnownLabel::Correct);
                summary.correct += count;
                summary.correct_unique += 1;
            }
            Label::Incorrect => {
                labels.insert(key.clone(), KnownLabel::Incorrect);
                summary.incorrect += count;
                summary.incorrect_unique += 1;
            }
            Label::Unclassified(_) => {
                summary.unclassified += count;
                summary.unclassified_unique += 1;
            }
        }
    }
    Ok((labels, by_root.into_values().collect()))
}

/// Precision/recall tallies of a classification against labels. Unlabeled
/// pairs are ignored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PrEval {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub incorrect_total: u64,
}

impl PrEval {
    pub fn flagged_labeled(&self) -> u64 {
        self.true_positives + self.false_positives
    }

    /// |anomalous ∩ incorrect| / |anomalous ∩ labeled|; undefined when no
    /// labeled pair was flagged.
    pub fn precision(&self) -> Option<f64> {
        let denom = self.flagged_labeled();
        (denom > 0).then(|| self.true_positives as f64 / denom as f64)
    }

    /// |anomalous ∩ incorrect| / |incorrect|; undefined when the labels
    /// contain no incorrect pair.
    pub fn recall(&self) -> Option<f64> {
        (self.incorrect_total > 0).then(|| self.true_positives as f64 / self.incorrect_total as f64)
    }
}

pub fn precision_recall(
    classified: &BTreeMap<PairKey, Classification>,
    labels: &LabelSet,
) -> PrEval {
    let anomalous: BTreeSet<&PairKey> = classified
        .iter()
        .filter(|(_, c)| **c == Classification::Anomalous)
        .map(|(k, _)| k)
        .collect();
    precision_recall_sets(
        &anomalous.into_iter().cloned().collect::<BTreeSet<_>>(),
        labels,
    )
}

/// Same metrics computed from an anomalous-pair set directly.
pub fn precision_recall_sets(anomalous: &BTreeSet<PairKey>, labels: &LabelSet) -> PrEval {
    let mut eval = PrEval::default();
    for (key, label) in labels.iter() {
        let flagged = anomalous.contains(key);
        match (label, flagged) {
            (KnownLabel::Incorrect, true) => {
                eval.true_positives += 1;
                eval.incorrect_total += 1;
            }
            (KnownLabel::Incorrect, false) => {
                eval.false_negatives += 1;
                eval.incorrect_total += 1;
            }
            (KnownLabel::Correct, true) => eval.false_positives += 1,
            (KnownLabel::Correct, false) => {}
        }
    }
    eval
}
