//! Reachability trimming shared by the automata types: keep exactly the
//! nodes that lie on some path from the initial node to an accepting node.

/// Returns a keep-mask over `n` nodes: `mask[v]` is true iff `v` is reachable
/// from `initial` and can reach a node marked accepting.
pub(crate) fn trim_mask(
    n: usize,
    edges: &[(usize, usize)],
    initial: usize,
    accepting: &[bool],
) -> Vec<bool> {
    let mut fwd = vec![Vec::new(); n];
    let mut bwd = vec![Vec::new(); n];
    for &(a, b) in edges {
        fwd[a].push(b);
        bwd[b].push(a);
    }

    let reach = |starts: Vec<usize>, adj: &[Vec<usize>]| -> Vec<bool> {
        let mut seen = vec![false; n];
        let mut stack = starts;
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    };

    let from_init = reach(vec![initial], &fwd);
    let acc_starts: Vec<usize> = (0..n).filter(|&v| accepting[v]).collect();
    let to_acc = reach(acc_starts, &bwd);

    (0..n).map(|v| from_init[v] && to_acc[v]).collect()
}
