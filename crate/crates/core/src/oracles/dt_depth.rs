//! Exact eps-error decision-tree depth by memoized minimax search.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::oracles::{check_cap, TruthTable, DT_CAP, EPS_SLACK};

/// Smallest depth k admitting a tree T with Pr[T(x) != f(x)] <= eps.
///
/// The search minimizes the number of misclassified points: a subtree over a
/// subcube may spend any part of the global error budget, so the recursion
/// tracks exact counts and the top-level test is `count <= eps * 2^d`.
/// Memoized per (restriction, remaining depth); the outer loop deepens
/// iteratively.
pub fn exact_dt_complexity(t: &TruthTable, eps: f64) -> Result<usize> {
    check_cap("decision-tree depth search", DT_CAP, t.dimension())?;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::invalid_param("eps", format!("{eps} is not in [0,1)")));
    }
    let d = t.dimension();
    let budget = eps * (1u64 << d) as f64 + EPS_SLACK;
    let mut search = DepthSearch {
        table: t,
        memo: HashMap::new(),
    };
    for depth in 0..=d {
        if search.min_errors(0, 0, depth) as f64 <= budget {
            return Ok(depth);
        }
    }
    unreachable!("a depth-d tree computes f exactly");
}

struct DepthSearch<'a> {
    table: &'a TruthTable,
    /// (fixed-coordinate mask, fixed values, remaining depth) -> least
    /// misclassified count within that subcube.
    memo: HashMap<(u32, u32, u8), u64>,
}

impl DepthSearch<'_> {
    fn min_errors(&mut self, set_mask: u32, val_mask: u32, depth: usize) -> u64 {
        let d = self.table.dimension();
        let free = d - set_mask.count_ones() as usize;
        if depth >= free {
            // enough budget to split every remaining feature
            return 0;
        }
        let key = (set_mask, val_mask, depth as u8);
        if let Some(&e) = self.memo.get(&key) {
            return e;
        }
        let mut best = self.leaf_errors(set_mask, val_mask);
        if depth > 0 && best > 0 {
            for i in 0..d {
                let bit = 1u32 << i;
                if set_mask & bit != 0 {
                    continue;
                }
                let e = self.min_errors(set_mask | bit, val_mask, depth - 1)
                    + self.min_errors(set_mask | bit, val_mask | bit, depth - 1);
                if e < best {
                    best = e;
                    if best == 0 {
                        break;
                    }
                }
            }
        }
        self.memo.insert(key, best);
        best
    }

    /// Misclassifications of the best constant label on the subcube.
    fn leaf_errors(&self, set_mask: u32, val_mask: u32) -> u64 {
        let d = self.table.dimension();
        let free: Vec<usize> = (0..d).filter(|i| set_mask & (1 << i) == 0).collect();
        let base = val_mask as usize;
        let mut plus = 0u64;
        for sub in 0..1usize << free.len() {
            let code = free
                .iter()
                .enumerate()
                .fold(base, |acc, (j, &pos)| acc | (((sub >> j) & 1) << pos));
            if self.table.label(code).is_plus() {
                plus += 1;
            }
        }
        let total = 1u64 << free.len();
        plus.min(total - plus)
    }
}
