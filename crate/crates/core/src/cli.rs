//! Command-line pipeline: mine, classify, sweep, crossval, label, check,
//! report. Subcommands are thin wrappers over the library operations;
//! outputs are deterministic for fixed inputs, flags, and seed.

use crate::checker::{check, heuristic_overlap_report, load_json_report, render_json_report, render_text_report};
use crate::config::RunConfig;
use crate::frontend::SourceFile;
use crate::miner::{
    self, aggregate, extract, merge,CountTable, Observation, PairKey,
};
use crate::stats::{classify_all, cross_validate, sweep, Classification, ModelConfig};
use crate::validation::{build_validation_set, load_model, LabelSet};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Exit codes: 0 success (and no unsafe findings), 1 unsafe findings from
/// `check`, 2 usage errors, 3 input/format errors.
pub const EXIT_OK: i32 = 0;
pub const EXIT_UNSAFE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

macro_rules! input_error_from {
    ($($ty:ty),*) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Input(e.to_string())
            }
        })*
    };
}

input_error_from!(
    std::io::Error,
    crate::miner::PairFileError,
    crate::validation::ModelError,
    crate::stats::SweepError,
    crate::config::ConfigError,
    serde_json::Error
);

#[derive(Debug, Parser)]
#[command(
    name = "proplint",
    version,
    about = "Statistical detection of property-access errors in JavaScript"
)]
pub struct Cli {
    /// TOML run configuration; its settings override command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for parallel file processing (0 = automatic).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct TuningFlags {
    #[arg(long)]
    p_a: Option<f64>,
    #[arg(long)]
    p_prop: Option<f64>,
    #[arg(long)]
    p_ca: Option<f64>,
    #[arg(long)]
    p_cprop: Option<f64>,
    #[arg(long)]
    min_support: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mine ⟨path, property⟩ pairs from source trees into a pair-count file.
    Mine {
        /// Directories (or single files) to scan.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Pair-count output file.
        #[arg(long)]
        out: PathBuf,
        /// Also write one row per observation with its source position.
        #[arg(long)]
        obs_log: Option<PathBuf>,
        /// Track only these comma-separated modules.
        #[arg(long, value_delimiter = ',')]
        modules: Option<Vec<String>>,
        /// Do not seed built-in roots from literals.
        #[arg(long)]
        no_builtins: bool,
        /// Strip TypeScript-style annotations instead of rejecting them.
        #[arg(long)]
        lenient: bool,
    },
    /// Classify pairs and write the anomalous-pair list.
    Classify {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tuning: TuningFlags,
    },
    /// Evaluate every threshold configuration against labeled pairs.
    Sweep {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// CSV report, one row per configuration.
        #[arg(long)]
        out: PathBuf,
    },
    /// k-fold cross-validation of threshold selection.
    Crossval {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// CSV report, one row per fold.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Label pairs against an API model file.
    Label {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Print per-root validation-set counts.
        #[arg(long)]
        summary: bool,
    },
    /// Find and classify instances of anomalous pairs in a codebase.
    Check {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Anomalous-pair list (`path<TAB>prop` rows).
        #[arg(long)]
        anomalous: PathBuf,
        /// Text report destination (defaults to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Structured JSON report destination.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        lenient: bool,
    },
    /// Heuristic-overlap counts from a JSON findings report.
    Report {
        #[arg(long)]
        findings: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        config = RunConfig::load(path)?;
    }
    let workers = if cli.config.is_some() {
        config.workers
    } else {
        cli.workers.unwrap_or(config.workers)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let from_file = cli.config.is_some();
    pool.install(|| dispatch(cli.command, config, from_file))
}

fn dispatch(command: Command, mut config: RunConfig, config_from_file: bool) -> Result<i32, CliError> {
    match command {
        Command::Mine {
            inputs,
            out,
            obs_log,
            modules,
            no_builtins,
            lenient,
        } => {
            if !config_from_file {
                if let Some(m) = modules {
                    config.tracked_modules = Some(m);
                }
                if no_builtins {
                    config.track_builtins = false;
                }
                if lenient {
                    config.lenient_types = true;
                }
            }
            cmd_mine(&inputs, &out, obs_log.as_deref(), &config)
        }
        Command::Classify { pairs, out, tuning } => {
            if !config_from_file {
                apply_tuning(&mut config, &tuning)?;
            }
            cmd_classify(&pairs, &out, &config)
        }
        Command::Sweep { pairs, labels, out } => cmd_sweep(&pairs, &labels, &out, &config),
        Command::Crossval {
            pairs,
            labels,
            out,
            folds,
            seed,
        } => {
            if !config_from_file {
                if let Some(f) = folds {
                    config.folds = f;
                }
                if let Some(s) = seed {
                    config.seed = s;
                }
            }
            cmd_crossval(&pairs, &labels, &out, &config)
        }
        Command::Label {
            pairs,
            model,
            out,
            summary,
        } => cmd_label(&pairs, &model, &out, summary),
        Command::Check {
            inputs,
            anomalous,
            out,
            json,
            lenient,
        } => {
            if !config_from_file && lenient {
                config.lenient_types = true;
            }
            cmd_check(&inputs, &anomalous, out.as_deref(), json.as_deref(), &config)
        }
        Command::Report { findings, out } => cmd_report(&findings, out.as_deref()),
    }
}

fn apply_tuning(config: &mut RunConfig, tuning: &TuningFlags) -> Result<(), CliError> {
    let t = &mut config.thresholds;
    if let Some(v) = tuning.p_a {
        t.p_a = v;
    }
    if let Some(v) = tuning.p_prop {
        t.p_prop = v;
    }
    if let Some(v) = tuning.p_ca {
        t.p_ca = v;
    }
    if let Some(v) = tuning.p_cprop {
        t.p_cprop = v;
    }
    if let Some(v) = tuning.min_support {
        config.min_support = v;
    }
    config
        .thresholds
        .validate()
        .map_err(CliError::Usage)?;
    if config.min_support == 0 {
        return Err(CliError::Usage("min_support must be >= 1".to_string()));
    }
    Ok(())
}

/// Extensions scanned: JavaScript always, TypeScript in lenient mode.
fn wanted_extension(path: &Path, lenient: bool) -> bool {
    match path.extension().and_then(|e| e.to_str()) {
        Some("js" | "mjs" | "cjs") => true,
        Some("ts") => lenient,
        _ => false,
    }
}

/// Walks the inputs and reads every matching source file, sorted by path.
pub fn discover_sources(inputs: &[PathBuf], lenient: bool) -> Result<Vec<SourceFile>, CliError> {
    let mut paths: Vec<PathBuf> = Vec::new();
    for input in inputs {
        if !input.exists() {
            return Err(CliError::Input(format!(
                "input `{}` does not exist",
                input.display()
            )));
        }
        if input.is_file() {
            paths.push(input.clone());
            continue;
        }
        for entry in walkdir::WalkDir::new(input).sort_by_file_name() {
            let entry = entry.map_err(|e| CliError::Input(e.to_string()))?;
            if entry.file_type().is_file() && wanted_extension(entry.path(), lenient) {
                paths.push(entry.path().to_path_buf());
            }
        }
    }
    paths.sort();
    paths.dedup();
    let mut files = Vec::new();
    for p in paths {
        match SourceFile::read(&p) {
            Ok(f) => files.push(f),
            Err(e) => eprintln!("warning: skipping {}: {e}", p.display()),
        }
    }
    Ok(files)
}

/// Parses and mines every file; parse failures are logged and skipped.
pub fn mine_files(files: &[SourceFile], config: &RunConfig) -> (CountTable, Vec<Observation>, Vec<String>) {
    let parse_opts = config.parse_options();
    let infer_opts = config.infer_options();
    let per_file: Vec<Result<Vec<Observation>, String>> = files
        .par_iter()
        .map(|file| {
            let ast = crate::frontend::parse_with(file, parse_opts)
                .map_err(|e| format!("{}: {e}", file.path.display()))?;
            let scopes = crate::access_paths::resolve_scopes(&ast);
            let paths = crate::access_paths::infer_paths(&ast, &scopes, &infer_opts);
            Ok(extract(&ast, &paths))
        })
        .collect();
    let mut observations = Vec::new();
    let mut errors = Vec::new();
    let mut table = CountTable::new();
    for result in per_file {
        match result {
            Ok(obs) => {
                table = merge(table, aggregate(obs.iter().cloned()));
                observations.extend(obs);
            }
            Err(e) => errors.push(e),
        }
    }
    observations.sort_by(|a, b| (&a.span, &a.key).cmp(&(&b.span, &b.key)));
    (table, observations, errors)
}

fn cmd_mine(
    inputs: &[PathBuf],
    out: &Path,
    obs_log: Option<&Path>,
    config: &RunConfig,
) -> Result<i32, CliError> {
    let files = discover_sources(inputs, config.lenient_types)?;
    let (table, observations, errors) = mine_files(&files, config);
    for e in &errors {
        eprintln!("warning: parse error in {e}");
    }
    miner::save_table_to(&table, out)?;
    if let Some(log) = obs_log {
        let f = std::fs::File::create(log).map_err(CliError::from)?;
        miner::save_observations(&observations, std::io::BufWriter::new(f))?;
    }
    println!(
        "mined {} observations ({} unique pairs) from {} files",
        table.total(),
        table.unique_pairs(),
        files.len()
    );
    Ok(EXIT_OK)
}

fn cmd_classify(pairs: &Path, out: &Path, config: &RunConfig) -> Result<i32, CliError> {
    let table = miner::load_table_from(pairs)?;
    let classes = classify_all(
        &table,
        &config.thresholds,
        config.min_support,
        &config.excluded_set(),
    );
    let mut counts = [0u64; 3];
    let anomalous: Vec<PairKey> = classes
        .iter()
        .map(|(key, class)| {
            match class {
                Classification::Expected => counts[0] += 1,
                Classification::Anomalous => counts[1] += 1,
                Classification::Unknown => counts[2] += 1,
            }
            (key, class)
        })
        .filter(|(_, c)| **c == Classification::Anomalous)
        .map(|(k, _)| k.clone())
        .collect();
    let f = std::fs::File::create(out)?;
    miner::save_pair_list(&anomalous, std::io::BufWriter::new(f))?;
    println!(
        "expected {} / anomalous {} / unknown {}",
        counts[0], counts[1], counts[2]
    );
    Ok(EXIT_OK)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "NA".to_string())
}

fn config_csv(c: &ModelConfig) -> String {
    format!("{},{},{},{}", c.p_a, c.p_prop, c.p_ca, c.p_cprop)
}

fn cmd_sweep(pairs: &Path, labels: &Path, out: &Path, config: &RunConfig) -> Result<i32, CliError> {
    let table = miner::load_table_from(pairs)?;
    let labels = load_labels(labels)?;
    let result = sweep(
        &table,
        &labels,
        &config.rarity_grid,
        &config.confidence_grid,
        &config.excluded_set(),
    )?;
    let mut text = String::from("p_a,p_prop,p_ca,p_cprop,precision,recall,anomalous_count\n");
    for p in &result.points {
        text.push_str(&format!(
            "{},{},{},{}\n",
            config_csv(&p.config),
            fmt_opt(p.precision),
            p.recall,
            p.anomalous_count
        ));
    }
    std::fs::write(out, text)?;
    let best = result.optimal_point();
    println!(
        "evaluated {} configurations; pareto front size {}",
        result.points.len(),
        result.pareto.len()
    );
    println!(
        "optimal ({}) precision {} recall {} anomalous {}",
        config_csv(&best.config),
        fmt_opt(best.precision),
        best.recall,
        best.anomalous_count
    );
    Ok(EXIT_OK)
}

fn cmd_crossval(pairs: &Path, labels: &Path, out: &Path, config: &RunConfig) -> Result<i32, CliError> {
    let table = miner::load_table_from(pairs)?;
    let labels = load_labels(labels)?;
    let rows = cross_validate(
        &table,
        &labels,
        config.folds,
        config.seed,
        &config.rarity_grid,
        &config.confidence_grid,
        &config.excluded_set(),
    )?;
    let mut text = String::from(
        "fold,p_a,p_prop,p_ca,p_cprop,train_precision,train_recall,validation_precision,validation_recall\n",
    );
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.fold,
            config_csv(&r.config),
            r.train_precision,
            r.train_recall,
            fmt_opt(r.validation_precision),
            fmt_opt(r.validation_recall)
        ));
    }
    std::fs::write(out, text)?;
    println!("{} folds written (seed {})", rows.len(), config.seed);
    Ok(EXIT_OK)
}

fn load_labels(path: &Path) -> Result<LabelSet, CliError> {
    let f = std::fs::File::open(path)?;
    Ok(LabelSet::load(
        std::io::BufReader::new(f),
        &path.display().to_string(),
    )?)
}

fn cmd_label(pairs: &Path, model: &Path, out: &Path, summary: bool) -> Result<i32, CliError> {
    let table = miner::load_table_from(pairs)?;
    let model = load_model(model)?;
    let (labels, roots) = build_validation_set(&table, &model)?;
    let f = std::fs::File::create(out)?;
    let mut w = std::io::BufWriter::new(f);
    labels.save(&mut w)?;
    w.flush()?;
    if summary {
        println!("root\tcorrect(unique)\tincorrect(unique)\tunclassified(unique)");
        for r in &roots {
            println!(
                "{}\t{} ({})\t{} ({})\t{} ({})",
                r.root,
                r.correct,
                r.correct_unique,
                r.incorrect,
                r.incorrect_unique,
                r.unclassified,
                r.unclassified_unique
            );
        }
    }
    println!(
        "labeled {} pairs ({} incorrect)",
        labels.len(),
        labels.incorrect_count()
    );
    Ok(EXIT_OK)
}

fn cmd_check(
    inputs: &[PathBuf],
    anomalous: &Path,
    out: Option<&Path>,
    json: Option<&Path>,
    config: &RunConfig,
) -> Result<i32, CliError> {
    let files = discover_sources(inputs, config.lenient_types)?;
    let f = std::fs::File::open(anomalous)?;
    let pairs: BTreeSet<PairKey> = miner::load_pair_list(
        std::io::BufReader::new(f),
        &anomalous.display().to_string(),
    )?
    .into_iter()
    .collect();
    let report = check(&files, &pairs, &config.check_options());
    for issue in &report.issues {
        eprintln!("warning: {}: {}", issue.file, issue.message);
    }
    let text = render_text_report(&report);
    match out {
        Some(path) => std::fs::write(path, &text)?,
        None => print!("{text}"),
    }
    if let Some(path) = json {
        let doc = render_json_report(&report);
        std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    }
    if report.unsafe_count() > 0 {
        Ok(EXIT_UNSAFE)
    } else {
        Ok(EXIT_OK)
    }
}

fn cmd_report(findings: &Path, out: Option<&Path>) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(findings)?;
    let doc = load_json_report(&text)?;
    let mut counts: std::collections::BTreeMap<Vec<String>, u64> = std::collections::BTreeMap::new();
    for set in doc.heuristic_sets() {
        let key: Vec<String> = set.iter().map(|h| h.to_string()).collect();
        *counts.entry(key).or_default() += 1;
    }
    let mut text = String::new();
    for (set, count) in &counts {
        text.push_str(&format!("{}\t{count}\n", set.join("+")));
    }
    match out {
        Some(path) => std::fs::write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

/// Overlap counts straight from in-memory findings, used by tests and by
/// the `report` subcommand after a `check --json` round trip.
pub fn overlap_lines(findings: &[crate::checker::Finding]) -> String {
    let mut text = String::new();
    for (set, count) in heuristic_overlap_report(findings) {
        let names: Vec<String> = set.iter().map(|h| h.to_string()).collect();
        text.push_str(&format!("{}\t{count}\n", names.join("+")));
    }
    text
}
