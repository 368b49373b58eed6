//! Findings output: the line-oriented text report and a JSON report
//! carrying spans, paths, and heuristics for tooling.

use super::{CheckReport, Finding, Heuristic, Verdict};
use serde::{Deserialize, Serialize};

/// Renders `file:line:col<TAB>path<TAB>prop<TAB>UNSAFE|SAFE(H...)` rows.
/// When several anomalous paths hit one access, the path column joins them
/// with commas.
pub fn render_text_report(report: &CheckReport) -> String {
    let mut out = String::new();
    for f in &report.findings {
        let paths: Vec<String> = f.instance.keys.iter().map(|k| k.path.render()).collect();
        let verdict = match &f.verdict {
            Verdict::Unsafe => "UNSAFE".to_string(),
            Verdict::Safe(hs) => {
                let names: Vec<String> = hs.iter().map(|h| h.to_string()).collect();
                format!("SAFE({})", names.join(","))
            }
        };
        out.push_str(&format!(
            "{}:{}:{}\t{}\t{}\t{}\n",
            f.instance.span.file,
            f.instance.span.start_line,
            f.instance.span.start_col,
            paths.join(","),
            f.instance.prop,
            verdict
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsonFinding {
    pub file: String,
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
    pub prop: String,
    pub paths: Vec<String>,
    pub verdict: String,
    pub heuristics: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsonIssue {
    pub file: String,
    pub message: String,
}

/// Structured findings report, version 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsonReport {
    pub version: u32,
    pub findings: Vec<JsonFinding>,
    pub errors: Vec<JsonIssue>,
}

impl JsonReport {
    /// Heuristic sets per finding, for overlap reporting on loaded files.
    pub fn heuristic_sets(&self) -> Vec<std::collections::BTreeSet<Heuristic>> {
        self.findings
            .iter()
            .filter(|f| f.verdict == "safe")
            .map(|f| {
                f.heuristics
                    .iter()
                    .filter_map(|h| Heuristic::parse(h))
                    .collect()
            })
            .collect()
    }
}

pub fn render_json_report(report: &CheckReport) -> JsonReport {
    JsonReport {
        version: 1,
        findings: report.findings.iter().map(json_finding).collect(),
        errors: report
            .issues
            .iter()
            .map(|i| JsonIssue {
                file: i.file.clone(),
                message: i.message.clone(),
            })
            .collect(),
    }
}

fn json_finding(f: &Finding) -> JsonFinding {
    let (verdict, heuristics) = match &f.verdict {
        Verdict::Unsafe => ("unsafe".to_string(), Vec::new()),
        Verdict::Safe(hs) => (
            "safe".to_string(),
            hs.iter().map(|h| h.to_string()).collect(),
        ),
    };
    JsonFinding {
        file: f.instance.span.file.to_string(),
        line: f.instance.span.start_line,
        col: f.instance.span.start_col,
        end_line: f.instance.span.end_line,
        end_col: f.instance.span.end_col,
        prop: f.instance.prop.clone(),
        paths: f.instance.keys.iter().map(|k| k.path.render()).collect(),
        verdict,
        heuristics,
    }
}

pub fn load_json_report(text: &str) -> Result<JsonReport, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{check, CheckOptions};
    use crate::frontend::SourceFile;
    use crate::miner::PairKey;

    #[test]
    fn text_and_json_round_trip() {
        let files = vec![SourceFile::new(
            "a.js",
            "let fs = require('fs');\nif (fs.size) {\n  let s = fs.size(\"x\");\n}\nlet t = fs.statSize(\"y\");\n",
        )];
        let anomalous = ["size", "statSize"]
            .into_iter()
            .map(|p| {
                PairKey::new(
                    crate::access_paths::parse_path("require('fs')").unwrap(),
                    p,
                )
            })
            .collect();
        let report = check(&files, &anomalous, &CheckOptions::default());
        let text = render_text_report(&report);
        assert!(text.contains("a.js:2:5\trequire('fs')\tsize\tSAFE(H2)"));
        assert!(text.contains("UNSAFE"));

        let json = render_json_report(&report);
        let serialized = serde_json::to_string_pretty(&json).unwrap();
        let loaded = load_json_report(&serialized).unwrap();
        assert_eq!(loaded.findings.len(), report.findings.len());
        assert_eq!(loaded.version, 1);
    }
}
