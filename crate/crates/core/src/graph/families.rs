use std::collections::HashSet;

use rand::Rng;

use super::Graph;
use crate::error::{Error, Result};
use crate::rng;

pub fn build_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::invalid(format!("cycle needs n >= 3, got {n}")));
    }
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
}

pub fn build_complete(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::invalid(format!("complete graph needs n >= 2, got {n}")));
    }
    Graph::from_edges(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))))
}

/// Star structure of a caterpillar tree.
///
/// Star `i` is internal node `internal_nodes[i]` together with its `d`
/// neighbours. Its two external vertices are the neighbours it shares with the
/// adjacent stars; an end star has only one such neighbour and uses its
/// lowest-index leaf as the second (a lone star uses its two lowest leaves).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaterpillarLayout {
    path_length: usize,
    degree: usize,
    internal_nodes: Vec<usize>,
    leaves: Vec<Vec<usize>>,
    external_pairs: Vec<(usize, usize)>,
    counted_leaves: Vec<Vec<usize>>,
}

impl CaterpillarLayout {
    pub fn path_length(&self) -> usize {
        self.path_length
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn star_count(&self) -> usize {
        self.path_length
    }

    pub fn internal_nodes(&self) -> &[usize] {
        &self.internal_nodes
    }

    pub fn root(&self, star: usize) -> usize {
        self.internal_nodes[star]
    }

    /// Every leaf attached to the star, external or not.
    pub fn leaves(&self, star: usize) -> &[usize] {
        &self.leaves[star]
    }

    pub fn external_pair(&self, star: usize) -> (usize, usize) {
        self.external_pairs[star]
    }

    /// Leaves whose defection is counted by the star observable: all leaves
    /// minus the two external vertices.
    pub fn counted_leaves(&self, star: usize) -> &[usize] {
        &self.counted_leaves[star]
    }
}

/// Builds the `(n, d)`-caterpillar: a tree whose internal nodes form a path of
/// `n` nodes, each of degree `d`.
///
/// Internal nodes are numbered `0..n` along the path; leaves follow, star by
/// star. `n = 1` gives the star `K_{1,d}`.
pub fn build_caterpillar(n: usize, d: usize) -> Result<(Graph, CaterpillarLayout)> {
    if n < 1 || d < 3 {
        return Err(Error::invalid(format!(
            "caterpillar needs n >= 1 and d >= 3, got n = {n}, d = {d}"
        )));
    }
    let node_count = n * (d - 1) + 2;
    let mut edges: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    let mut next = n;
    let mut leaves = Vec::with_capacity(n);
    for i in 0..n {
        let path_neighbors = usize::from(i > 0) + usize::from(i + 1 < n);
        let own: Vec<usize> = (next..next + d - path_neighbors).collect();
        next += own.len();
        edges.extend(own.iter().map(|&leaf| (i, leaf)));
        leaves.push(own);
    }
    debug_assert_eq!(next, node_count);

    let external_pairs: Vec<(usize, usize)> = (0..n)
        .map(|i| match (i > 0, i + 1 < n) {
            (true, true) => (i - 1, i + 1),
            (false, true) => (leaves[i][0], i + 1),
            (true, false) => (i - 1, leaves[i][0]),
            (false, false) => (leaves[i][0], leaves[i][1]),
        })
        .collect();
    let counted_leaves = leaves
        .iter()
        .zip(&external_pairs)
        .map(|(own, &(a, b))| own.iter().copied().filter(|&l| l != a && l != b).collect())
        .collect();

    let graph = Graph::from_edges(node_count, edges)?;
    let layout = CaterpillarLayout {
        path_length: n,
        degree: d,
        internal_nodes: (0..n).collect(),
        leaves,
        external_pairs,
        counted_leaves,
    };
    Ok((graph, layout))
}

pub const RANDOM_REGULAR_MAX_RESTARTS: usize = 10_000;

/// Consecutive rejected stub pairs tolerated before checking whether any legal
/// pair remains at all.
const STALL_CHECK: usize = 64;

/// Random simple `d`-regular graph on `n` nodes from the pairing model.
///
/// Stubs are matched one pair at a time; a pair that would create a loop or
/// a multi-edge is redrawn, and the whole matching restarts only when no legal
/// pair is left. Deterministic given `seed`.
pub fn build_random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if n == 0 || d >= n || !(n * d).is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "random regular graph needs d < n and n*d even, got n = {n}, d = {d}"
        )));
    }
    let mut rng = rng::seeded(seed);
    for _ in 0..RANDOM_REGULAR_MAX_RESTARTS {
        if let Some(edges) = try_pairing(n, d, &mut rng) {
            return Graph::from_edges(n, edges);
        }
    }
    Err(Error::GenerationFailed {
        attempts: RANDOM_REGULAR_MAX_RESTARTS,
    })
}

fn try_pairing(n: usize, d: usize, rng: &mut impl Rng) -> Option<Vec<(usize, usize)>> {
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut present = HashSet::with_capacity(n * d / 2);
    let mut edges = Vec::with_capacity(n * d / 2);
    let legal = |a: usize, b: usize, present: &HashSet<(usize, usize)>| {
        a != b && !present.contains(&(a.min(b), a.max(b)))
    };
    while !stubs.is_empty() {
        let mut rejected = 0;
        let (i, j) = loop {
            let i = rng.random_range(0..stubs.len());
            let j = rng.random_range(0..stubs.len());
            if i != j && legal(stubs[i], stubs[j], &present) {
                break (i, j);
            }
            rejected += 1;
            if rejected % STALL_CHECK == 0 {
                let any = (0..stubs.len())
                    .any(|x| (x + 1..stubs.len()).any(|y| legal(stubs[x], stubs[y], &present)));
                if !any {
                    return None;
                }
            }
        };
        let (a, b) = (stubs[i], stubs[j]);
        present.insert((a.min(b), a.max(b)));
        edges.push((a.min(b), a.max(b)));
        let (hi, lo) = (i.max(j), i.min(j));
        stubs.swap_remove(hi);
        stubs.swap_remove(lo);
    }
    edges.sort_unstable();
    Some(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles() {
        assert!(build_cycle(2).is_err());
        let c3 = build_cycle(3).unwrap();
        assert_eq!(c3.edge_count(), 3);
        assert_eq!(c3.degrees(), vec![2; 3]);
        let c6 = build_cycle(6).unwrap();
        assert_eq!(c6.edge_count(), 6);
        assert!(c6.is_connected() && c6.is_consistent());
        assert!(c6.find_edge(5, 0).is_some());
    }

    #[test]
    fn complete_graphs() {
        assert!(build_complete(1).is_err());
        assert_eq!(build_complete(2).unwrap().edges(), &[(0, 1)]);
        let k4 = build_complete(4).unwrap();
        assert_eq!(k4.edge_count(), 6);
        assert_eq!(k4.degrees(), vec![3; 4]);
    }

    #[test]
    fn caterpillar_sizes() {
        for (n, d, nodes) in [(3, 7, 20), (11, 16, 167), (2, 3, 6), (1, 16, 17)] {
            let (g, layout) = build_caterpillar(n, d).unwrap();
            assert_eq!(g.node_count(), nodes);
            assert_eq!(g.edge_count(), nodes - 1);
            assert!(g.is_tree() && g.is_consistent());
            for star in 0..n {
                assert_eq!(g.degree(layout.root(star)), d);
                assert_eq!(layout.counted_leaves(star).len(), d - 2);
            }
        }
        assert!(build_caterpillar(0, 5).is_err());
        assert!(build_caterpillar(3, 2).is_err());
    }

    #[test]
    fn caterpillar_layout_details() {
        let (g, layout) = build_caterpillar(2, 3).unwrap();
        // two adjacent internal nodes with two leaves each
        assert_eq!(layout.leaves(0), &[2, 3]);
        assert_eq!(layout.leaves(1), &[4, 5]);
        assert_eq!(layout.external_pair(0), (2, 1));
        assert_eq!(layout.external_pair(1), (0, 4));
        assert!(g.find_edge(0, 1).is_some());

        let (_, layout) = build_caterpillar(3, 7).unwrap();
        assert_eq!(layout.external_pair(1), (0, 2));
        assert_eq!(layout.counted_leaves(1).len(), 5);
        // the internal path is induced
        let internal = layout.internal_nodes();
        assert_eq!(internal, &[0, 1, 2]);
    }

    #[test]
    fn random_regular() {
        let k4 = build_random_regular(4, 3, 5).unwrap();
        assert_eq!(k4.to_edge_list(), build_complete(4).unwrap().to_edge_list());
        let g = build_random_regular(8, 3, 1).unwrap();
        assert_eq!(g.degrees(), vec![3; 8]);
        assert!(g.is_consistent());
        assert!(build_random_regular(5, 3, 1).is_err());
        assert!(build_random_regular(4, 4, 1).is_err());
    }

    #[test]
    fn random_regular_dense_case_succeeds() {
        let g = build_random_regular(16, 8, 3).unwrap();
        assert_eq!(g.degrees(), vec![8; 16]);
    }

    #[test]
    fn random_regular_depends_on_seed() {
        let a = build_random_regular(16, 4, 1).unwrap();
        let b = build_random_regular(16, 4, 2).unwrap();
        let a2 = build_random_regular(16, 4, 1).unwrap();
        assert_eq!(a, a2);
        assert_ne!(a.to_edge_list(), b.to_edge_list());
        assert_eq!(b.degrees(), vec![4; 16]);
    }
}
