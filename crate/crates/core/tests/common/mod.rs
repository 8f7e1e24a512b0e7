//! Reference implementations shared by integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use gas_core::lexicon::{SenseId, SenseInventory, SenseRecord};

/// Nodes reachable from `start` in at most `depth` steps along `edges`,
/// ordered by shortest walk length and then by the lexicographically
/// smallest sequence of edge positions among shortest walks. Computed by
/// relaxing whole walks level by level rather than with a queue.
pub fn walk_order<F>(inv: &SenseInventory, start: &str, depth: usize, edges: F) -> Vec<String>
where
    F: Fn(&SenseRecord) -> &Vec<SenseId>,
{
    let mut best: HashMap<String, (usize, Vec<usize>)> = HashMap::new();
    let mut level: BTreeMap<String, Vec<usize>> = BTreeMap::from([(start.to_string(), Vec::new())]);
    for len in 1..=depth {
        let mut next: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (node, key) in &level {
            let rec = inv.get_str(node).expect("node exists");
            for (pos, child) in edges(rec).iter().enumerate() {
                let mut k = key.clone();
                k.push(pos);
                let slot = next.entry(child.as_str().to_string()).or_insert_with(|| k.clone());
                if k < *slot {
                    *slot = k;
                }
            }
        }
        for (node, key) in &next {
            if node != start {
                best.entry(node.clone()).or_insert((len, key.clone()));
            }
        }
        level = next;
    }
    let mut out: Vec<(usize, Vec<usize>, String)> = best.into_iter().map(|(n, (l, k))| (l, k, n)).collect();
    out.sort();
    out.into_iter().map(|(_, _, n)| n).collect()
}

/// Expected `(hypernym side, hyponym side)` for a gloss expansion.
pub fn expected_expansion(inv: &SenseInventory, start: &str, depth: usize, cap: Option<usize>) -> (Vec<String>, Vec<String>) {
    let mut hyper = walk_order(inv, start, depth, |r| &r.hypernyms);
    let mut hypo: Vec<String> = walk_order(inv, start, depth, |r| &r.hyponyms)
        .into_iter()
        .filter(|n| !hyper.contains(n))
        .collect();
    if let Some(c) = cap {
        hyper.truncate(c);
        hypo.truncate(c);
    }
    (hyper, hypo)
}
