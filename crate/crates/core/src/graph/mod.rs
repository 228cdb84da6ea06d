//! Undirected simple graphs, the graph families studied here and their
//! expansion constants.

mod expansion;
mod families;

pub use expansion::{expansion_constant, expansion_upper_estimate, Expansion, ENUMERATION_LIMIT};
pub use families::{
    build_caterpillar, build_complete, build_cycle, build_random_regular, CaterpillarLayout,
    RANDOM_REGULAR_MAX_RESTARTS,
};

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Immutable undirected simple graph.
///
/// Edges are stored as `(u, v)` with `u < v`; `incidence[v]` lists the indices
/// of the edges touching `v`, in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    incidence: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and out-of-range
    /// endpoints. Edge indices follow the iteration order of `edges`.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if node_count == 0 {
            return Err(Error::invalid("graph needs at least one node"));
        }
        let mut seen = HashSet::new();
        let mut list = Vec::new();
        let mut incidence = vec![Vec::new(); node_count];
        for (a, b) in edges {
            if a >= node_count || b >= node_count {
                return Err(Error::invalid(format!(
                    "edge ({a}, {b}) out of range for {node_count} nodes"
                )));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at node {a}")));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(Error::invalid(format!("duplicate edge {key:?}")));
            }
            let index = list.len();
            list.push(key);
            incidence[key.0].push(index);
            incidence[key.1].push(index);
        }
        Ok(Graph {
            node_count,
            edges: list,
            incidence,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, index: usize) -> (usize, usize) {
        self.edges[index]
    }

    #[inline]
    pub fn incidence(&self, node: usize) -> &[usize] {
        &self.incidence[node]
    }

    #[inline]
    pub fn degree(&self, node: usize) -> usize {
        self.incidence[node].len()
    }

    /// The endpoint of `edge` opposite to `node`.
    #[inline]
    pub fn other_end(&self, edge: usize, node: usize) -> usize {
        let (a, b) = self.edges[edge];
        if a == node {
            b
        } else {
            a
        }
    }

    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.incidence[node]
            .iter()
            .map(move |&e| self.other_end(e, node))
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.node_count || v >= self.node_count {
            return None;
        }
        self.incidence[u]
            .iter()
            .copied()
            .find(|&e| self.other_end(e, u) == v && u != v)
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.incidence.iter().map(Vec::len).collect()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        reached == self.node_count
    }

    pub fn is_tree(&self) -> bool {
        self.edge_count() + 1 == self.node_count && self.is_connected()
    }

    /// Checks that edges and incidence lists describe the same graph.
    pub fn is_consistent(&self) -> bool {
        let mut count = vec![0usize; self.edges.len()];
        for (v, list) in self.incidence.iter().enumerate() {
            for &e in list {
                let Some(&(a, b)) = self.edges.get(e) else {
                    return false;
                };
                if a != v && b != v {
                    return false;
                }
                count[e] += 1;
            }
        }
        count.iter().all(|&c| c == 2)
            && self
                .edges
                .iter()
                .all(|&(a, b)| a < b && b < self.node_count)
    }

    /// Graph with node `v` renamed to `permutation[v]`.
    pub fn relabel(&self, permutation: &[usize]) -> Result<Graph> {
        if permutation.len() != self.node_count {
            return Err(Error::invalid("permutation length differs from node count"));
        }
        let mut hit = vec![false; self.node_count];
        for &p in permutation {
            if p >= self.node_count || std::mem::replace(&mut hit[p], true) {
                return Err(Error::invalid("not a permutation"));
            }
        }
        Graph::from_edges(
            self.node_count,
            self.edges
                .iter()
                .map(|&(a, b)| (permutation[a], permutation[b])),
        )
    }

    /// Edge-list text: a header line `n m`, then one `u v` line per edge
    /// (0-based, `u < v`), edges sorted lexicographically.
    pub fn to_edge_list(&self) -> String {
        let mut sorted = self.edges.clone();
        sorted.sort_unstable();
        let mut out = String::with_capacity(8 * (sorted.len() + 1));
        let _ = writeln!(out, "{} {}", self.node_count, sorted.len());
        for (a, b) in sorted {
            let _ = writeln!(out, "{a} {b}");
        }
        out
    }

    /// Parses the format written by [`Graph::to_edge_list`]. The resulting
    /// edge indices follow the sorted order.
    pub fn from_edge_list(text: &str) -> Result<Graph> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty edge list".into()))?;
        let (n, m) = parse_pair(header)?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let (a, b) = parse_pair(line)?;
            edges.push((a.min(b), a.max(b)));
        }
        if edges.len() != m {
            return Err(Error::Parse(format!(
                "header announces {m} edges, found {}",
                edges.len()
            )));
        }
        edges.sort_unstable();
        Graph::from_edges(n, edges)
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse(format!("expected two integers in `{line}`")))?
            .parse()
            .map_err(|e| Error::Parse(format!("`{line}`: {e}")))
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(Error::Parse(format!("trailing tokens in `{line}`")));
    }
    Ok((a, b))
}
