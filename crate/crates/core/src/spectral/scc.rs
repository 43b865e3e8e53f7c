//! Strongly connected components and the condensation DAG.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use super::NonNegIntMatrix;

/// Components in deterministic topological order plus the component-level DAG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    /// Each component's member indices in ascending order. Components are listed
    /// in topological order of the condensation, ties broken by smallest member.
    pub components: Vec<Vec<usize>>,
    /// `component_of[v]` is the position of `v`'s component in `components`.
    pub component_of: Vec<usize>,
    /// Edges `(from, to)` between distinct components, sorted and deduplicated.
    pub edges: Vec<(usize, usize)>,
}

impl Condensation {
    /// True when component `c` carries at least one cycle (size ≥ 2 or a self-loop).
    pub fn is_cyclic(&self, a: &NonNegIntMatrix, c: usize) -> bool {
        let comp = &self.components[c];
        comp.len() > 1 || a.has_edge(comp[0], comp[0])
    }
}

/// Tarjan's algorithm, iterative, followed by a Kahn ordering of the condensation.
pub fn scc_decompose(a: &NonNegIntMatrix) -> Condensation {
    let n = a.dim();
    let adj: Vec<Vec<usize>> = (0..n).map(|i| a.successors(i).collect()).collect();

    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut raw: Vec<Vec<usize>> = Vec::new();
    let mut next = 0usize;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        // (vertex, next successor position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    raw.push(comp);
                }
            }
        }
    }

    let mut raw_of = vec![0usize; n];
    for (c, comp) in raw.iter().enumerate() {
        for &v in comp {
            raw_of[v] = c;
        }
    }
    let k = raw.len();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    let mut indeg = vec![0usize; k];
    for v in 0..n {
        for &w in &adj[v] {
            let (cv, cw) = (raw_of[v], raw_of[w]);
            if cv != cw && succ[cv].insert(cw) {
                indeg[cw] += 1;
            }
        }
    }

    // Kahn with a min-heap on the smallest member index.
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..k)
        .filter(|&c| indeg[c] == 0)
        .map(|c| Reverse((raw[c][0], c)))
        .collect();
    let mut order = Vec::with_capacity(k);
    while let Some(Reverse((_, c))) = heap.pop() {
        order.push(c);
        for &d in &succ[c] {
            indeg[d] -= 1;
            if indeg[d] == 0 {
                heap.push(Reverse((raw[d][0], d)));
            }
        }
    }
    debug_assert_eq!(order.len(), k);

    let mut position = vec![0usize; k];
    for (p, &c) in order.iter().enumerate() {
        position[c] = p;
    }
    let components: Vec<Vec<usize>> = order.iter().map(|&c| raw[c].clone()).collect();
    let component_of: Vec<usize> = (0..n).map(|v| position[raw_of[v]]).collect();
    let mut edges: Vec<(usize, usize)> = succ
        .iter()
        .enumerate()
        .flat_map(|(c, ds)| ds.iter().map(move |&d| (c, d)))
        .map(|(c, d)| (position[c], position[d]))
        .collect();
    edges.sort_unstable();

    Condensation { components, component_of, edges }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(text: &str) -> NonNegIntMatrix {
        text.parse().unwrap()
    }

    #[test]
    fn identity_gives_singletons() {
        let c = scc_decompose(&NonNegIntMatrix::identity(3));
        assert_eq!(c.components, vec![vec![0], vec![1], vec![2]]);
        assert!(c.edges.is_empty());
    }

    #[test]
    fn golden_mean_is_one_component() {
        let c = scc_decompose(&m("1 1 / 1 0"));
        assert_eq!(c.components, vec![vec![0, 1]]);
    }

    #[test]
    fn strictly_upper_triangular_is_a_chain() {
        let c = scc_decompose(&m("0 1 1 / 0 0 1 / 0 0 0"));
        assert_eq!(c.components, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(c.edges, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn topological_order_with_index_ties() {
        // 2 -> 0, 1 isolated, {3,4} cycle feeding 0.
        let c = scc_decompose(&m(
            "0 0 0 0 0 / 0 0 0 0 0 / 1 0 0 0 0 / 1 0 0 0 1 / 0 0 0 1 0",
        ));
        assert_eq!(c.components, vec![vec![1], vec![2], vec![3, 4], vec![0]]);
        assert_eq!(c.component_of, vec![3, 0, 1, 2, 2]);
        for &(a, b) in &c.edges {
            assert!(a < b);
        }
    }
}
