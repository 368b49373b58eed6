//! Shared test support: independent oracles and testdata helpers.
// not every integration test uses every oracle
#![allow(dead_code)]

use proplint::frontend::{BlockId, Cfg};
use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

pub fn testdata(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("testdata")
        .join(rel)
}

/// Direct-summation binomial CDF: terms in log space, Kahan accumulation.
/// Independent of the continued-fraction implementation under test.
pub fn bcdf_oracle(k: u64, n: u64, p: f64) -> f64 {
    if k >= n || p == 0.0 {
        return 1.0;
    }
    if p == 1.0 {
        return 0.0;
    }
    let mut ln_fact = vec![0.0f64; (n + 1) as usize];
    for i in 1..=n as usize {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in 0..=k {
        let ln_term = ln_fact[n as usize]
            - ln_fact[i as usize]
            - ln_fact[(n - i) as usize]
            + i as f64 * ln_p
            + (n - i) as f64 * ln_q;
        let term = ln_term.exp();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum.min(1.0)
}

/// Brute-force dominator sets by enumerating all simple paths from the
/// entry: A dominates B iff every such path to B contains A. Intended for
/// graphs with at most 8 blocks.
pub fn brute_force_dominators(cfg: &Cfg) -> HashMap<BlockId, BTreeSet<BlockId>> {
    let entry = cfg.entry;
    let mut dom: HashMap<BlockId, BTreeSet<BlockId>> = HashMap::new();
    let mut path: Vec<BlockId> = vec![entry];
    let mut on_path: BTreeSet<BlockId> = [entry].into_iter().collect();
    enumerate(cfg, entry, &mut path, &mut on_path, &mut dom);
    dom
}

fn enumerate(
    cfg: &Cfg,
    at: BlockId,
    path: &mut Vec<BlockId>,
    on_path: &mut BTreeSet<BlockId>,
    dom: &mut HashMap<BlockId, BTreeSet<BlockId>>,
) {
    let nodes: BTreeSet<BlockId> = path.iter().copied().collect();
    dom.entry(at)
        .and_modify(|set| {
            *set = set.intersection(&nodes).copied().collect();
        })
        .or_insert(nodes);
    for &succ in &cfg.block(at).succs {
        if on_path.contains(&succ) {
            continue; // simple paths only
        }
        path.push(succ);
        on_path.insert(succ);
        enumerate(cfg, succ, path, on_path, dom);
        path.pop();
        on_path.remove(&succ);
    }
}

/// Immediate dominators derived from brute-force dominator sets: the
/// dominator (other than the block itself) with the largest dominator set.
pub fn brute_force_idoms(dom: &HashMap<BlockId, BTreeSet<BlockId>>, entry: BlockId) -> HashMap<BlockId, BlockId> {
    let mut idoms = HashMap::new();
    for (&b, doms) in dom {
        if b == entry {
            continue;
        }
        let candidates: Vec<BlockId> = doms.iter().copied().filter(|&d| d != b).collect();
        let idom = candidates
            .iter()
            .copied()
            .max_by_key(|d| dom.get(d).map(|s| s.len()).unwrap_or(0));
        if let Some(d) = idom {
            idoms.insert(b, d);
        }
    }
    idoms
}
