//! The `(α, β)`-expansion constant
//! `ρ(G) = min { |E(U, Uᶜ)| / vol(U) : α ≤ |U| ≤ β }`.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;

use super::Graph;
use crate::error::{Error, Result};
use crate::{rng, Ratio};

/// Node count up to which every subset is enumerated.
pub const ENUMERATION_LIMIT: usize = 24;

/// Above [`ENUMERATION_LIMIT`], exact enumeration is still attempted when the
/// number of admissible subsets is at most this many.
const SUBSET_BUDGET: u128 = 1 << ENUMERATION_LIMIT;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub value: Ratio,
    /// A minimising set, sorted. Lexicographically smallest among ties when
    /// `exact`.
    pub set: Vec<usize>,
    /// `false` when `value` comes from randomized search and is only an upper
    /// bound on the true constant.
    pub exact: bool,
}

fn check_range(g: &Graph, alpha: usize, beta: usize) -> Result<()> {
    if alpha == 0 || alpha > beta || beta >= g.node_count() {
        return Err(Error::invalid(format!(
            "need 0 < alpha <= beta < n, got alpha = {alpha}, beta = {beta}, n = {}",
            g.node_count()
        )));
    }
    Ok(())
}

/// Exact expansion constant by exhaustive enumeration.
///
/// Graphs with at most [`ENUMERATION_LIMIT`] nodes are enumerated in Gray-code
/// order over all subsets; larger graphs are accepted only when the number of
/// subsets with size in `[alpha, beta]` stays within `2^24`. Sets of zero
/// volume are skipped.
pub fn expansion_constant(g: &Graph, alpha: usize, beta: usize) -> Result<Expansion> {
    check_range(g, alpha, beta)?;
    let n = g.node_count();
    if n <= ENUMERATION_LIMIT {
        return gray_code_search(g, alpha, beta);
    }
    let total: u128 = (alpha..=beta).map(|k| binomial(n, k)).sum();
    if total > SUBSET_BUDGET {
        return Err(Error::SizeLimit {
            nodes: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    combination_search(g, alpha, beta)
}

#[derive(Clone, Copy)]
struct Candidate {
    boundary: u64,
    volume: u64,
}

impl Candidate {
    fn cmp_ratio(&self, other: &Candidate) -> Ordering {
        (self.boundary * other.volume).cmp(&(other.boundary * self.volume))
    }
}

/// Lexicographic order of the sorted element lists of two bitmask sets.
fn lex_cmp(a: u32, b: u32) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let low = (a ^ b).trailing_zeros();
    let above = !((2u64 << low) - 1) as u32;
    if a & (1 << low) != 0 {
        // `a` holds the first differing element; `b` is smaller only if it ends here.
        if b & above != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    } else if a & above != 0 {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

fn gray_code_search(g: &Graph, alpha: usize, beta: usize) -> Result<Expansion> {
    let n = g.node_count();
    let adjacency: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).fold(0u32, |m, w| m | (1 << w)))
        .collect();
    let degree: Vec<u64> = (0..n).map(|v| g.degree(v) as u64).collect();

    let mut mask = 0u32;
    let mut size = 0usize;
    let mut volume = 0u64;
    let mut boundary = 0i64;
    let mut best: Option<(Candidate, u32)> = None;

    for k in 1u64..(1u64 << n) {
        let v = k.trailing_zeros() as usize;
        let bit = 1u32 << v;
        let deg = degree[v] as i64;
        if mask & bit == 0 {
            let inside = (adjacency[v] & mask).count_ones() as i64;
            boundary += deg - 2 * inside;
            mask |= bit;
            size += 1;
            volume += degree[v];
        } else {
            mask &= !bit;
            let inside = (adjacency[v] & mask).count_ones() as i64;
            boundary -= deg - 2 * inside;
            size -= 1;
            volume -= degree[v];
        }
        if size < alpha || size > beta || volume == 0 {
            continue;
        }
        let cand = Candidate {
            boundary: boundary as u64,
            volume,
        };
        let better = match &best {
            None => true,
            Some((b, bmask)) => match cand.cmp_ratio(b) {
                Ordering::Less => true,
                Ordering::Equal => lex_cmp(mask, *bmask) == Ordering::Less,
                Ordering::Greater => false,
            },
        };
        if better {
            best = Some((cand, mask));
        }
    }

    let (cand, mask) =
        best.ok_or_else(|| Error::invalid("no admissible set with positive volume"))?;
    Ok(Expansion {
        value: Ratio::new(cand.boundary, cand.volume),
        set: (0..n).filter(|&v| mask & (1 << v) != 0).collect(),
        exact: true,
    })
}

fn set_cut(g: &Graph, set: &[usize], member: &mut [bool]) -> Candidate {
    for &v in set {
        member[v] = true;
    }
    let mut boundary = 0u64;
    let mut volume = 0u64;
    for &v in set {
        volume += g.degree(v) as u64;
        boundary += g.neighbors(v).filter(|&w| !member[w]).count() as u64;
    }
    for &v in set {
        member[v] = false;
    }
    Candidate { boundary, volume }
}

fn combination_search(g: &Graph, alpha: usize, beta: usize) -> Result<Expansion> {
    let n = g.node_count();
    let mut member = vec![false; n];
    let mut best: Option<(Candidate, Vec<usize>)> = None;
    for k in alpha..=beta {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            let cand = set_cut(g, &combo, &mut member);
            if cand.volume > 0 {
                let better = match &best {
                    None => true,
                    Some((b, bset)) => match cand.cmp_ratio(b) {
                        Ordering::Less => true,
                        Ordering::Equal => combo < *bset,
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((cand, combo.clone()));
                }
            }
            // next k-combination in lexicographic order
            let Some(i) = (0..k).rev().find(|&i| combo[i] < n - k + i) else {
                break;
            };
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    let (cand, set) =
        best.ok_or_else(|| Error::invalid("no admissible set with positive volume"))?;
    Ok(Expansion {
        value: Ratio::new(cand.boundary, cand.volume),
        set,
        exact: true,
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Randomized search for sets with small boundary-to-volume ratio.
///
/// Half of the samples grow a set by breadth-first search from a random node
/// (connected sets tend to have small boundary), the rest are uniform random
/// sets. Since every candidate is admissible, the result is an upper bound on
/// the expansion constant; it is flagged with `exact = false`.
pub fn expansion_upper_estimate(
    g: &Graph,
    alpha: usize,
    beta: usize,
    samples: usize,
    seed: u64,
) -> Result<Expansion> {
    check_range(g, alpha, beta)?;
    let n = g.node_count();
    let mut rng = rng::seeded(seed);
    let mut member = vec![false; n];
    let mut nodes: Vec<usize> = (0..n).collect();
    let mut best: Option<(Candidate, Vec<usize>)> = None;

    for s in 0..samples.max(1) {
        let size = rng.random_range(alpha..=beta);
        let mut set = if s % 2 == 0 {
            bfs_ball(g, rng.random_range(0..n), size, &mut rng)
        } else {
            nodes.shuffle(&mut rng);
            nodes[..size].to_vec()
        };
        set.sort_unstable();
        let cand = set_cut(g, &set, &mut member);
        if cand.volume == 0 {
            continue;
        }
        let better = match &best {
            None => true,
            Some((b, bset)) => match cand.cmp_ratio(b) {
                Ordering::Less => true,
                Ordering::Equal => set < *bset,
                Ordering::Greater => false,
            },
        };
        if better {
            best = Some((cand, set));
        }
    }
    let (cand, set) =
        best.ok_or_else(|| Error::invalid("no admissible set with positive volume"))?;
    Ok(Expansion {
        value: Ratio::new(cand.boundary, cand.volume),
        set,
        exact: false,
    })
}

/// Breadth-first ball of exactly `size` nodes, topped up with random nodes when
/// the component is smaller.
fn bfs_ball(g: &Graph, start: usize, size: usize, rng: &mut impl Rng) -> Vec<usize> {
    let n = g.node_count();
    let mut taken = vec![false; n];
    let mut order = Vec::with_capacity(size);
    let mut queue = std::collections::VecDeque::from([start]);
    taken[start] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        if order.len() == size {
            return order;
        }
        let mut next: Vec<usize> = g.neighbors(v).filter(|&w| !taken[w]).collect();
        next.shuffle(rng);
        for w in next {
            taken[w] = true;
            queue.push_back(w);
        }
    }
    let mut rest: Vec<usize> = (0..n).filter(|&v| !taken[v]).collect();
    rest.shuffle(rng);
    order.extend(rest.into_iter().take(size - order.len()));
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_complete, build_cycle};

    #[test]
    fn lex_order_of_masks() {
        // {0,2} < {1}
        assert_eq!(lex_cmp(0b101, 0b010), Ordering::Less);
        // {0} < {0,1}
        assert_eq!(lex_cmp(0b001, 0b011), Ordering::Less);
        // {0,1,3} > {0,1}
        assert_eq!(lex_cmp(0b1011, 0b0011), Ordering::Greater);
        // {1,2} > {0,5}
        assert_eq!(lex_cmp(0b110, 0b100001), Ordering::Greater);
    }

    #[test]
    fn small_examples() {
        let k4 = build_complete(4).unwrap();
        let e = expansion_constant(&k4, 2, 2).unwrap();
        assert_eq!(e.value, Ratio::new(2, 3));
        assert_eq!(e.set, vec![0, 1]);

        let c6 = build_cycle(6).unwrap();
        let e = expansion_constant(&c6, 3, 3).unwrap();
        assert_eq!(e.value, Ratio::new(1, 3));
        assert_eq!(e.set, vec![0, 1, 2]);

        let k10 = build_complete(10).unwrap();
        assert_eq!(expansion_constant(&k10, 2, 5).unwrap().value, Ratio::new(5, 9));
    }

    #[test]
    fn large_sparse_range_uses_combinations() {
        let c100 = build_cycle(100).unwrap();
        let e = expansion_constant(&c100, 3, 3).unwrap();
        assert_eq!(e.value, Ratio::new(1, 3));
        assert_eq!(e.set, vec![0, 1, 2]);
        assert!(matches!(
            expansion_constant(&c100, 3, 50),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn range_checks() {
        let k4 = build_complete(4).unwrap();
        assert!(expansion_constant(&k4, 0, 2).is_err());
        assert!(expansion_constant(&k4, 3, 2).is_err());
        assert!(expansion_constant(&k4, 1, 4).is_err());
    }

    #[test]
    fn estimate_is_an_upper_bound() {
        let c20 = build_cycle(20).unwrap();
        let exact = expansion_constant(&c20, 4, 8).unwrap();
        let est = expansion_upper_estimate(&c20, 4, 8, 200, 1).unwrap();
        assert!(!est.exact);
        assert!(est.value >= exact.value);
        // a BFS ball on a cycle is an arc, which is optimal
        assert_eq!(est.value, exact.value);
    }
}
