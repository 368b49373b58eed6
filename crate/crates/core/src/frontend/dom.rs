use super::cfg::{BlockId, Cfg};
use std::collections::HashMap;

/// Immediate-dominator map over a [`Cfg`]. The entry block has no entry in
/// the map; unreachable blocks are likewise absent.
#[derive(Debug, Clone)]
pub struct DomInfo {
    idom: HashMap<BlockId, BlockId>,
    entry: BlockId,
}

impl DomInfo {
    pub fn idom(&self, b: BlockId) -> Option<BlockId> {
        self.idom.get(&b).copied()
    }

    pub fn idom_map(&self) -> &HashMap<BlockId, BlockId> {
        &self.idom
    }

    /// Whether `a` dominates `b` (reflexive).
    pub fn dominates(&self, a: BlockId, b: BlockId) -> bool {
        let mut cur = b;
        loop {
            if cur == a {
                return true;
            }
            if cur == self.entry {
                return false;
            }
            match self.idom(cur) {
                Some(up) => cur = up,
                None => return false, // unreachable block
            }
        }
    }

    pub fn strictly_dominates(&self, a: BlockId, b: BlockId) -> bool {
        a != b && self.dominates(a, b)
    }

    /// Dominance frontiers, computed from the idom relation.
    pub fn frontiers(&self, cfg: &Cfg) -> HashMap<BlockId, Vec<BlockId>> {
        let mut df: HashMap<BlockId, Vec<BlockId>> = HashMap::new();
        for b in cfg.block_ids() {
            let preds = &cfg.block(b).preds;
            if preds.len() < 2 {
                continue;
            }
            let Some(idom_b) = self.idom(b) else { continue };
            for &p in preds {
                let mut runner = p;
                loop {
                    if runner == idom_b {
                        break;
                    }
                    let entry = df.entry(runner).or_default();
                    if !entry.contains(&b) {
                        entry.push(b);
                    }
                    match self.idom(runner) {
                        Some(up) if runner != self.entry => runner = up,
                        _ => break,
                    }
                }
            }
        }
        df
    }
}

/// Iterative dominator computation (Cooper–Harvey–Kennedy) over the blocks
/// reachable from the entry.
pub fn dominators(cfg: &Cfg) -> DomInfo {
    let entry = cfg.entry;
    let n = cfg.len();

    // reverse postorder over reachable blocks
    let mut postorder: Vec<BlockId> = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut stack: Vec<(BlockId, usize)> = vec![(entry, 0)];
    seen[entry.index()] = true;
    while let Some((b, next)) = stack.pop() {
        let succs = &cfg.block(b).succs;
        if next < succs.len() {
            stack.push((b, next + 1));
            let s = succs[next];
            if !seen[s.index()] {
                seen[s.index()] = true;
                stack.push((s, 0));
            }
        } else {
            postorder.push(b);
        }
    }
    let mut po_num = vec![usize::MAX; n];
    for (i, &b) in postorder.iter().enumerate() {
        po_num[b.index()] = i;
    }
    let rpo: Vec<BlockId> = postorder.iter().rev().copied().collect();

    let mut idom: Vec<Option<BlockId>> = vec![None; n];
    idom[entry.index()] = Some(entry);

    let intersect = |idom: &[Option<BlockId>], mut a: BlockId, mut b: BlockId| -> BlockId {
        while a != b {
            while po_num[a.index()] < po_num[b.index()] {
                a = idom[a.index()].expect("processed block");
            }
            while po_num[b.index()] < po_num[a.index()] {
                b = idom[b.index()].expect("processed block");
            }
        }
        a
    };

    let mut changed = true;
    while changed {
        changed = false;
        for &b in &rpo {
            if b == entry {
                continue;
            }
            let mut new_idom: Option<BlockId> = None;
            for &p in &cfg.block(b).preds {
                if idom[p.index()].is_none() {
                    continue;
                }
                new_idom = Some(match new_idom {
                    None => p,
                    Some(cur) => intersect(&idom, cur, p),
                });
            }
            if let Some(ni) = new_idom {
                if idom[b.index()] != Some(ni) {
                    idom[b.index()] = Some(ni);
                    changed = true;
                }
            }
        }
    }

    let mut map = HashMap::new();
    for b in cfg.block_ids() {
        if b == entry {
            continue;
        }
        if let Some(d) = idom[b.index()] {
            map.insert(b, d);
        }
    }
    DomInfo { idom: map, entry }
}
