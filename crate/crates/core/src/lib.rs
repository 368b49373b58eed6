//! Corpus-driven detection of property-access errors in JavaScript.
//!
//! The pipeline has two phases. The mining phase parses a corpus, abstracts
//! values as access paths, and aggregates ⟨path, property⟩ pair counts; a
//! binomial-CDF rarity test then classifies pairs as expected, anomalous, or
//! unknown. The checking phase locates instances of anomalous pairs in a
//! target codebase and suppresses likely-intentional uses through five local
//! data-flow heuristics.

pub mod access_paths;
pub mod checker;
pub mod cli;
pub mod config;
pub mod frontend;
pub mod miner;
pub mod stats;
pub mod validation;

pub use cli::run;
