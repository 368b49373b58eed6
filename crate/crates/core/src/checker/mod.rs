//! The local data-flow checker: finds instances of anomalous pairs in a
//! target codebase and classifies each as safe or unsafe using five
//! suppression heuristics.

mod report;
mod ssa;

pub use report::{load_json_report, render_json_report, render_text_report, JsonReport};
pub use ssa::{compute_ssa, SsaAssignment, SsaVar};

use crate::access_paths::{infer_paths, resolve_scopes, InferOptions, PathMap, ScopeInfo};
use crate::frontend::{
    dominators, function_cfgs, parse_with, Ast, BlockId, DomInfo,
    NodeId, NodeKind, ParseOptions, SourceFile, Span, UnaryOp,
};
use crate::miner::PairKey;
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// The five suppression heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Heuristic {
    /// Custom assignment: the property is written somewhere on the same path.
    H1,
    /// The access is (part of) a conditional guard.
    H2,
    /// Dominated by an earlier access to the same property on the same object.
    H3,
    /// Some alternate access path of the base is not anomalous.
    H4,
    /// The base variable was reassigned a path-less value earlier in the file.
    H5,
}

impl std::fmt::Display for Heuristic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Heuristic::H1 => "H1",
            Heuristic::H2 => "H2",
            Heuristic::H3 => "H3",
            Heuristic::H4 => "H4",
            Heuristic::H5 => "H5",
        })
    }
}

impl Heuristic {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "H1" => Some(Heuristic::H1),
            "H2" => Some(Heuristic::H2),
            "H3" => Some(Heuristic::H3),
            "H4" => Some(Heuristic::H4),
            "H5" => Some(Heuristic::H5),
            _ => None,
        }
    }
}

/// One property-access occurrence matching anomalous pairs.
#[derive(Debug, Clone)]
pub struct Instance {
    pub span: Span,
    pub prop: String,
    /// The anomalous pairs this access instantiates, sorted.
    pub keys: Vec<PairKey>,
    file_idx: usize,
    node: NodeId,
    object: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Suppressed; carries every heuristic that fired (non-empty).
    Safe(BTreeSet<Heuristic>),
    Unsafe,
}

impl Verdict {
    pub fn is_unsafe(&self) -> bool {
        matches!(self, Verdict::Unsafe)
    }
}

#[derive(Debug, Clone)]
pub struct Finding {
    pub instance: Instance,
    pub verdict: Verdict,
}

/// Per-file failure that did not stop the rest of the run.
#[derive(Debug, Clone)]
pub struct FileIssue {
    pub file: String,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub findings: Vec<Finding>,
    pub issues: Vec<FileIssue>,
}

impl CheckReport {
    pub fn unsafe_count(&self) -> usize {
        self.findings
            .iter()
            .filter(|f| f.verdict.is_unsafe())
            .count()
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    pub parse: ParseOptions,
    pub infer: InferOptions,
    /// Treat `typeof e.p` like a conditional guard for H2.
    pub h2_typeof: bool,
}

/// Read access to a constant-named property, with its graph placement.
struct ReadAccess {
    node: NodeId,
    object: NodeId,
    prop: String,
    cfg_idx: usize,
    block: BlockId,
    stmt_idx: u32,
    span_start: (u32, u32),
    ssa: Option<SsaVar>,
}

/// Everything the heuristics need to know about one parsed file.
pub struct FileAnalysis {
    pub ast: Ast,
    pub scopes: ScopeInfo,
    pub paths: PathMap,
    doms: Vec<DomInfo>,
    reads: Vec<ReadAccess>,
    read_index: HashMap<NodeId, usize>,
}

impl FileAnalysis {
    pub fn analyze(file: &SourceFile, options: &CheckOptions) -> Result<Self, crate::frontend::SyntaxError> {
        let ast = parse_with(file, options.parse)?;
        let scopes = resolve_scopes(&ast);
        let paths = infer_paths(&ast, &scopes, &options.infer);
        let cfgs = function_cfgs(&ast);
        let doms: Vec<DomInfo> = cfgs.iter().map(|f| dominators(&f.cfg)).collect();
        let ssas: Vec<SsaAssignment> = cfgs
            .iter()
            .zip(&doms)
            .map(|(f, d)| compute_ssa(&ast, &scopes, f, d))
            .collect();

        // node -> owning cfg and position
        let mut positions: HashMap<NodeId, (usize, BlockId, u32)> = HashMap::new();
        for (i, f) in cfgs.iter().enumerate() {
            for (node, (block, idx)) in f.expr_positions(&ast) {
                positions.insert(node, (i, block, idx));
            }
        }

        let mut reads = Vec::new();
        for id in ast.ids() {
            let NodeKind::Member { object, property } = ast.kind(id) else {
                continue;
            };
            let Some(prop) = property.const_name() else {
                continue;
            };
            if !crate::miner::is_property_read(&ast, id) {
                continue;
            }
            let Some(&(cfg_idx, block, stmt_idx)) = positions.get(&id) else {
                continue;
            };
            let ssa = match ast.kind(*object) {
                NodeKind::Ident { .. } => ssas[cfg_idx].var(*object),
                _ => None,
            };
            reads.push(ReadAccess {
                node: id,
                object: *object,
                prop: prop.to_string(),
                cfg_idx,
                block,
                stmt_idx,
                span_start: ast.span(id).start(),
                ssa,
            });
        }
        let read_index = reads
            .iter()
            .enumerate()
            .map(|(i, r)| (r.node, i))
            .collect();
        Ok(Self {
            ast,
            scopes,
            paths,
            doms,
            reads,
            read_index,
        })
    }

    /// ⟨path, prop⟩ pairs written anywhere in this file by plain
    /// assignments to member expressions.
    fn written_pairs(&self) -> BTreeSet<PairKey> {
        let mut out = BTreeSet::new();
        for id in self.ast.ids() {
            let NodeKind::Member { object, property } = self.ast.kind(id) else {
                continue;
            };
            if !crate::miner::is_property_write(&self.ast, id) {
                continue;
            }
            let Some(prop) = property.const_name() else {
                continue;
            };
            if let Some(paths) = self.paths.paths(*object) {
                for p in paths {
                    out.insert(PairKey::new(p.clone(), prop));
                }
            }
        }
        out
    }
}

/// Finds every property read instantiating an anomalous pair. One instance
/// per access expression; all matching pairs are listed on it.
pub fn find_instances(
    analyses: &[FileAnalysis],
    anomalous: &BTreeSet<PairKey>,
) -> Vec<Instance> {
    let mut out = Vec::new();
    for (file_idx, fa) in analyses.iter().enumerate() {
        for read in &fa.reads {
            let Some(paths) = fa.paths.paths(read.object) else {
                continue;
            };
            let mut keys: Vec<PairKey> = paths
                .iter()
                .map(|p| PairKey::new(p.clone(), &read.prop))
                .filter(|k| anomalous.contains(k))
                .collect();
            if keys.is_empty() {
                continue;
            }
            keys.sort();
            out.push(Instance {
                span: fa.ast.span(read.node).clone(),
                prop: read.prop.clone(),
                keys,
                file_idx,
                node: read.node,
                object: read.object,
            });
        }
    }
    out
}

/// H1: somewhere in the codebase the same path gets this property written.
pub fn h1_custom_assignment(inst: &Instance, written: &BTreeSet<PairKey>) -> bool {
    inst.keys.iter().any(|k| written.contains(k))
}

/// H2: the access (possibly behind `!`, `&&`, `||`) is the condition of an
/// `if`/`while`/ternary, or is negated outright.
pub fn h2_conditional_guard(inst: &Instance, fa: &FileAnalysis, h2_typeof: bool) -> bool {
    let ast = &fa.ast;
    let mut cur = inst.node;
    loop {
        let Some(parent) = ast.parent(cur) else {
            return false;
        };
        match ast.kind(parent) {
            NodeKind::Unary { op: UnaryOp::Not, .. } => return true,
            NodeKind::Unary {
                op: UnaryOp::Typeof,
                ..
            } if h2_typeof => return true,
            NodeKind::Logical {
                op: crate::frontend::LogicalOp::And | crate::frontend::LogicalOp::Or,
                ..
            } => {
                cur = parent;
            }
            NodeKind::If { cond, .. } | NodeKind::While { cond, .. } => return *cond == cur,
            NodeKind::Ternary { cond, .. } => return *cond == cur,
            _ => return false,
        }
    }
}

/// H3: an earlier read of the same property on the same SSA variable
/// dominates this one (strictly dominating block, or earlier in the same
/// block).
pub fn h3_dominated_access(inst: &Instance, fa: &FileAnalysis) -> bool {
    let Some(&read_idx) = fa.read_index.get(&inst.node) else {
        return false;
    };
    let this = &fa.reads[read_idx];
    let Some(this_ssa) = this.ssa else {
        return false;
    };
    let dom = &fa.doms[this.cfg_idx];
    fa.reads.iter().any(|other| {
        other.node != this.node
            && other.cfg_idx == this.cfg_idx
            && other.prop == this.prop
            && other.ssa == Some(this_ssa)
            && (dom.strictly_dominates(other.block, this.block)
                || (other.block == this.block
                    && (other.stmt_idx, other.span_start) < (this.stmt_idx, this.span_start)))
    })
}

/// H4: the base also maps to some path whose pairing with the property is
/// not anomalous.
pub fn h4_alternate_path(
    inst: &Instance,
    fa: &FileAnalysis,
    anomalous: &BTreeSet<PairKey>,
) -> bool {
    let Some(paths) = fa.paths.paths(inst.object) else {
        return false;
    };
    paths
        .iter()
        .any(|p| !anomalous.contains(&PairKey::new(p.clone(), &inst.prop)))
}

/// H5: the base is a variable reassigned, textually earlier in the file,
/// from an expression that has no access path.
pub fn h5_reassigned_base(inst: &Instance, fa: &FileAnalysis) -> bool {
    let NodeKind::Ident { .. } = fa.ast.kind(inst.object) else {
        return false;
    };
    let Some(binding) = fa.scopes.resolve_use(inst.object) else {
        return false;
    };
    let inst_start = fa.ast.span(inst.node).start();
    fa.scopes
        .binding(binding)
        .assignments
        .iter()
        .any(|&assign| {
            if fa.ast.span(assign).start() >= inst_start {
                return false;
            }
            match fa.ast.kind(assign) {
                NodeKind::Assign { value, .. } => fa.paths.paths(*value).is_none(),
                _ => false,
            }
        })
}

/// Runs the whole checker over a set of files. Files that fail to parse
/// are reported as issues; the rest are still checked.
pub fn check(
    files: &[SourceFile],
    anomalous: &BTreeSet<PairKey>,
    options: &CheckOptions,
) -> CheckReport {
    let results: Vec<Result<FileAnalysis, FileIssue>> = files
        .par_iter()
        .map(|f| {
            FileAnalysis::analyze(f, options).map_err(|e| FileIssue {
                file: f.path.display().to_string(),
                message: e.to_string(),
            })
        })
        .collect();

    let mut analyses = Vec::new();
    let mut issues = Vec::new();
    for r in results {
        match r {
            Ok(a) => analyses.push(a),
            Err(i) => issues.push(i),
        }
    }
    issues.sort_by(|a, b| a.file.cmp(&b.file));

    let written: BTreeSet<PairKey> = analyses
        .iter()
        .flat_map(|fa| fa.written_pairs())
        .collect();

    let instances = find_instances(&analyses, anomalous);
    let mut findings: Vec<Finding> = instances
        .into_iter()
        .map(|inst| {
            let fa = &analyses[inst.file_idx];
            let mut fired = BTreeSet::new();
            if h1_custom_assignment(&inst, &written) {
                fired.insert(Heuristic::H1);
            }
            if h2_conditional_guard(&inst, fa, options.h2_typeof) {
                fired.insert(Heuristic::H2);
            }
            if h3_dominated_access(&inst, fa) {
                fired.insert(Heuristic::H3);
            }
            if h4_alternate_path(&inst, fa, anomalous) {
                fired.insert(Heuristic::H4);
            }
            if h5_reassigned_base(&inst, fa) {
                fired.insert(Heuristic::H5);
            }
            let verdict = if fired.is_empty() {
                Verdict::Unsafe
            } else {
                Verdict::Safe(fired)
            };
            Finding {
                instance: inst,
                verdict,
            }
        })
        .collect();
    findings.sort_by(|a, b| {
        (&a.instance.span, &a.instance.prop).cmp(&(&b.instance.span, &b.instance.prop))
    });
    CheckReport { findings, issues }
}

/// Counts safe findings by the exact heuristic set that fired (the Venn
/// regions of the suppression report). Unsafe findings are excluded.
pub fn heuristic_overlap_report(findings: &[Finding]) -> BTreeMap<BTreeSet<Heuristic>, u64> {
    let mut out: BTreeMap<BTreeSet<Heuristic>, u64> = BTreeMap::new();
    for f in findings {
        if let Verdict::Safe(set) = &f.verdict {
            *out.entry(set.clone()).or_default() += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access_paths::parse_path;

    fn anomalous(pairs: &[(&str, &str)]) -> BTreeSet<PairKey> {
        pairs
            .iter()
            .map(|(p, prop)| PairKey::new(parse_path(p).unwrap(), *prop))
            .collect()
    }

    fn run(src: &str, pairs: &[(&str, &str)]) -> CheckReport {
        let files = vec![SourceFile::new("t.js", src)];
        check(&files, &anomalous(pairs), &CheckOptions::default())
    }

    fn verdicts(report: &CheckReport) -> Vec<(u32, String, String)> {
        report
            .findings
            .iter()
            .map(|f| {
                let v = match &f.verdict {
                    Verdict::Unsafe => "UNSAFE".to_string(),
                    Verdict::Safe(h) => {
                        let hs: Vec<String> = h.iter().map(|x| x.to_string()).collect();
                        format!("SAFE({})", hs.join(","))
                    }
                };
                (f.instance.span.start_line, f.instance.prop.clone(), v)
            })
            .collect()
    }

    const PLAIN_BAD_CALL: &str = "let fs = require('fs');\nlet filename = \"my_file.txt\";\nlet size = fs.size(filename);\nfs.readFile(filename, (err, file_contents) => {\n    console.log(\"File contents: \" + file_contents);\n});\n";
    const MONKEY_PATCH: &str = "let fs = require('fs');\nfs.size = function (filename){\n    return fs.lstatSync(filename).size\n};\nlet size = fs.size(\"my_file.txt\");\n";
    const GUARDED_ACCESS: &str = "let fs = require('fs');\nif (fs.size) {\n    let size = fs.size(\"my_file.txt\");\n}\n";
    const TYPECHECK_DISPATCH: &str = "let fs = require('fs');\nfunction getSize(arg) {\n    if (arg instanceof fs.Stats) {\n        return arg.size;\n    }\n    return fs.fstatSync(arg).size;\n}\nlet size1 = getSize(fs.openSync(\"file.txt\"));\nlet size2 = getSize(fs.lstatSync(\"file.txt\"));\n";

    const SIZE_PAIRS: &[(&str, &str)] = &[
        ("require('fs')", "size"),
        ("require('fs').openSync()", "size"),
    ];

    #[test]
    fn plain_bad_call_is_unsafe() {
        let report = run(PLAIN_BAD_CALL, SIZE_PAIRS);
        assert_eq!(
            verdicts(&report),
            vec![(3, "size".to_string(), "UNSAFE".to_string())]
        );
    }

    #[test]
    fn monkey_patch_is_safe_via_h1() {
        let report = run(MONKEY_PATCH, SIZE_PAIRS);
        assert_eq!(
            verdicts(&report),
            vec![(5, "size".to_string(), "SAFE(H1)".to_string())]
        );
    }

    #[test]
    fn guarded_access_is_safe_via_h2_and_h3() {
        let report = run(GUARDED_ACCESS, SIZE_PAIRS);
        assert_eq!(
            verdicts(&report),
            vec![
                (2, "size".to_string(), "SAFE(H2)".to_string()),
                (3, "size".to_string(), "SAFE(H3)".to_string()),
            ]
        );
    }

    #[test]
    fn typecheck_dispatch_is_safe_via_h4() {
        let report = run(TYPECHECK_DISPATCH, SIZE_PAIRS);
        assert_eq!(
            verdicts(&report),
            vec![(4, "size".to_string(), "SAFE(H4)".to_string())]
        );
    }

    #[test]
    fn no_tracked_imports_yields_no_instances() {
        let report = run("let a = something.size;\n", SIZE_PAIRS);
        assert!(report.findings.is_empty());
    }

    #[test]
    fn h1_requires_the_same_path() {
        let src = "let fs = require('fs');\nlet zlib = require('zlib');\nzlib.size = function (x) { return 0; };\nlet n = fs.size(\"a\");\n";
        let report = run(src, &[("require('fs')", "size")]);
        assert_eq!(
            verdicts(&report),
            vec![(4, "size".to_string(), "UNSAFE".to_string())]
        );
    }

    #[test]
    fn h2_guard_with_negation_and_disjunction() {
        let src = "let fs = require('fs');\nif (!fs.size || flag) {\n  mark();\n}\n";
        let report = run(src, &[("require('fs')", "size")]);
        assert_eq!(
            verdicts(&report),
            vec![(2, "size".to_string(), "SAFE(H2)".to_string())]
        );
    }

    #[test]
    fn h2_does_not_fire_for_plain_statements() {
        let src = "let fs = require('fs');\nfs.size;\n";
        let report = run(src, &[("require('fs')", "size")]);
        assert_eq!(
            verdicts(&report),
            vec![(2, "size".to_string(), "UNSAFE".to_string())]
        );
    }

    #[test]
    fn h3_does_not_fire_across_sibling_branches() {
        let src = "let fs = require('fs');\nif (flag) {\n  let a = fs.size(\"x\");\n} else {\n  let b = fs.size(\"y\");\n}\n";
        let report = run(src, &[("require('fs')", "size")]);
        assert_eq!(
            verdicts(&report),
            vec![
                (3, "size".to_string(), "UNSAFE".to_string()),
                (5, "size".to_string(), "UNSAFE".to_string()),
            ]
        );
    }

    #[test]
    fn h4_needs_a_non_anomalous_alternate() {
        let src = "let fs = require('fs');\nfunction f(arg) { return arg.size; }\nf(fs.openSync(\"a\"));\nf(fs.fstatSync(\"b\"));\n";
        // both alternates anomalous: no suppression
        let both = run(
            src,
            &[
                ("require('fs').openSync()", "size"),
                ("require('fs').fstatSync()", "size"),
            ],
        );
        assert_eq!(
            verdicts(&both),
            vec![(2, "size".to_string(), "UNSAFE".to_string())]
        );
        // one alternate clean: suppressed
        let one = run(src, &[("require('fs').openSync()", "size")]);
        assert_eq!(
            verdicts(&one),
            vec![(2, "size".to_string(), "SAFE(H4)".to_string())]
        );
    }

    #[test]
    fn h5_fires_only_for_pathless_reassignment() {
        let pathless = "let p = require('path');\np = mystery();\nlet n = p.length;\n";
        let report = run(pathless, &[("require('path')", "length")]);
        assert_eq!(
            verdicts(&report),
            vec![(3, "length".to_string(), "SAFE(H5)".to_string())]
        );

        // a reassignment that has a path does not trigger H5; the extra
        // path instead suppresses through H4
        let with_path = "let p = require('path');\np = require('other');\nlet n = p.length;\n";
        let report = run(with_path, &[("require('path')", "length")]);
        assert_eq!(
            verdicts(&report),
            vec![(3, "length".to_string(), "SAFE(H4)".to_string())]
        );

        let never = "let p = require('path');\nlet n = p.join(\"a\");\n";
        let report = run(never, &[("require('path')", "join")]);
        assert_eq!(
            verdicts(&report),
            vec![(2, "join".to_string(), "UNSAFE".to_string())]
        );
    }

    #[test]
    fn typeof_guard_suppresses_only_behind_the_flag() {
        let src = "let fs = require('fs');\nif (typeof fs.size) {\n  mark();\n}\n";
        let files = vec![SourceFile::new("t.js", src)];
        let pairs = anomalous(&[("require('fs')", "size")]);
        let default = check(&files, &pairs, &CheckOptions::default());
        assert_eq!(verdicts(&default), vec![(2, "size".to_string(), "UNSAFE".to_string())]);
        let opted_in = check(
            &files,
            &pairs,
            &CheckOptions {
                h2_typeof: true,
                ..Default::default()
            },
        );
        assert_eq!(
            verdicts(&opted_in),
            vec![(2, "size".to_string(), "SAFE(H2)".to_string())]
        );
    }

    #[test]
    fn verdict_unsafe_iff_no_heuristic_fired() {
        let report = run(GUARDED_ACCESS, SIZE_PAIRS);
        for f in &report.findings {
            match &f.verdict {
                Verdict::Safe(set) => assert!(!set.is_empty()),
                Verdict::Unsafe => {}
            }
        }
    }

    #[test]
    fn overlap_report_counts_exact_sets() {
        let report = run(GUARDED_ACCESS, SIZE_PAIRS);
        let overlap = heuristic_overlap_report(&report.findings);
        let h2: BTreeSet<Heuristic> = [Heuristic::H2].into_iter().collect();
        let h3: BTreeSet<Heuristic> = [Heuristic::H3].into_iter().collect();
        assert_eq!(overlap.get(&h2), Some(&1));
        assert_eq!(overlap.get(&h3), Some(&1));

        let all_unsafe = run(PLAIN_BAD_CALL, SIZE_PAIRS);
        assert!(heuristic_overlap_report(&all_unsafe.findings).is_empty());
    }

    #[test]
    fn h4_and_h5_can_fire_together() {
        let src = "let fs = require('fs');\nlet x = fs.openSync(\"f\");\nx = fs.lstatSync(\"f\");\nx = mystery();\nlet v = x.size;\n";
        let report = run(src, &[("require('fs').openSync()", "size")]);
        let overlap = heuristic_overlap_report(&report.findings);
        let h45: BTreeSet<Heuristic> = [Heuristic::H4, Heuristic::H5].into_iter().collect();
        assert_eq!(overlap.get(&h45), Some(&1));
    }

    #[test]
    fn parse_errors_do_not_abort_other_files() {
        let files = vec![
            SourceFile::new("bad.js", "let x = ("),
            SourceFile::new("good.js", "let fs = require('fs');\nlet s = fs.size(\"x\");\n"),
        ];
        let report = check(
            &files,
            &anomalous(&[("require('fs')", "size")]),
            &CheckOptions::default(),
        );
        assert_eq!(report.issues.len(), 1);
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.unsafe_count(), 1);
    }

    #[test]
    fn shrinking_the_anomalous_set_never_creates_unsafe_findings() {
        let src = "let fs = require('fs');\nfunction f(arg) { return arg.size; }\nf(fs.openSync(\"a\"));\nf(fs.lstatSync(\"b\"));\nlet n = fs.size(\"c\");\n";
        let full = anomalous(&[
            ("require('fs')", "size"),
            ("require('fs').openSync()", "size"),
            ("require('fs').lstatSync()", "size"),
        ]);
        let shrunk = anomalous(&[
            ("require('fs')", "size"),
            ("require('fs').openSync()", "size"),
        ]);
        let files = vec![SourceFile::new("t.js", src)];
        let report_full = check(&files, &full, &CheckOptions::default());
        let report_shrunk = check(&files, &shrunk, &CheckOptions::default());
        let unsafe_spans = |r: &CheckReport| -> BTreeSet<(u32, u32)> {
            r.findings
                .iter()
                .filter(|f| f.verdict.is_unsafe())
                .map(|f| (f.instance.span.start_line, f.instance.span.start_col))
                .collect()
        };
        assert!(unsafe_spans(&report_shrunk).is_subset(&unsafe_spans(&report_full)));
    }
}
