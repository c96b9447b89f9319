//! Partition refinement for deterministic machines.

use std::collections::BTreeMap;

/// Coarsest partition of a partial deterministic machine in which merged
/// states agree on acceptance and on the (letter, target class) picture.
/// A missing letter means rejection in every state, so omitting absent
/// letters from the signature is sound as long as the machine is trim.
pub(crate) fn moore_partition(moves: &[BTreeMap<usize, usize>], accepting: &[bool]) -> Vec<usize> {
    let n = moves.len();
    let mut class: Vec<usize> = accepting.iter().map(|&a| a as usize).collect();
    loop {
        let mut sig_map: BTreeMap<(usize, Vec<(usize, usize)>), usize> = BTreeMap::new();
        let mut next = vec![0usize; n];
        for v in 0..n {
            let sig: Vec<(usize, usize)> = moves[v]
                .iter()
                .map(|(&letter, &w)| (letter, class[w]))
                .collect();
            let fresh = sig_map.len();
            let id = *sig_map.entry((class[v], sig)).or_insert(fresh);
            next[v] = id;
        }
        if next == class {
            return class;
        }
        class = next;
    }
}
