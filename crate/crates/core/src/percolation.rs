//! Oriented percolation: the four-node block, towers of blocks, the lattice
//! `P` and its planar dual.
//!
//! Lattice sites are `(i, j)` with `1 ≤ i ≤ width`, `0 ≤ j ≤ height` and
//! `i + j` even. Site `(i, j)` has directed edges up-left to `(i − 1, j + 1)`
//! and up-right to `(i + 1, j + 1)`; edges leaving the strip are absent. Edges
//! are numbered level by level, sites left to right, up-left before up-right,
//! and every simulation draws exactly one uniform per edge in that order, so
//! runs at different `p′` with the same seed are coupled.
//!
//! Dual sites are the `(i, j)` in the same strip with `i + j` odd. The dual
//! move `(a, b) → (a − 1, b + 1)` crosses the primal edge
//! `(a − 1, b) → (a, b + 1)` and is open iff that edge is closed; likewise
//! `(a, b) → (a − 1, b − 1)` crosses `(a, b − 1) → (a − 1, b)`. The two
//! rightward moves cross the reversed (never open) copies of primal edges and
//! are always open. Dual paths run from the right boundary `i = width` to the
//! left boundary `i = 1` and never leave the strip.

use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng;
use crate::stats::Estimate;

/// Open probabilities of the block edges `e_0 = (v00, v01)`,
/// `e_1 = (v10, v11)`, `e_01 = (v00, v11)` and `e_10 = (v10, v01)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockParams {
    pub p0: f64,
    pub p1: f64,
    pub p01: f64,
    pub p10: f64,
}

impl BlockParams {
    pub fn new(p0: f64, p1: f64, p01: f64, p10: f64) -> Result<Self> {
        for (name, p) in [("p0", p0), ("p1", p1), ("p01", p01), ("p10", p10)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(BlockParams { p0, p1, p01, p10 })
    }

    /// Straight edges `p_s`, cross edges `p_x`.
    pub fn symmetric(straight: f64, cross: f64) -> Result<Self> {
        Self::new(straight, straight, cross, cross)
    }

    /// Exact law of the block output given its input.
    pub fn output_law(&self, input: (bool, bool)) -> [[f64; 2]; 2] {
        let (s00, s10) = input;
        let reach = |a: bool, pa: f64, b: bool, pb: f64| {
            let miss_a = if a { 1.0 - pa } else { 1.0 };
            let miss_b = if b { 1.0 - pb } else { 1.0 };
            1.0 - miss_a * miss_b
        };
        let left = reach(s00, self.p0, s10, self.p10);
        let right = reach(s10, self.p1, s00, self.p01);
        let mut law = [[0.0; 2]; 2];
        for (l, pl) in [(0, 1.0 - left), (1, left)] {
            for (r, pr) in [(0, 1.0 - right), (1, right)] {
                law[l][r] = pl * pr;
            }
        }
        law
    }
}

/// One block: state 1 travels from `(s00, s10)` along open edges to
/// `(s01, s11)`. Always consumes four uniforms.
pub fn simulate_block<R: Rng + ?Sized>(params: &BlockParams, input: (bool, bool), rng: &mut R) -> (bool, bool) {
    let (s00, s10) = input;
    let e0 = rng.random::<f64>() < params.p0;
    let e1 = rng.random::<f64>() < params.p1;
    let e01 = rng.random::<f64>() < params.p01;
    let e10 = rng.random::<f64>() < params.p10;
    let s01 = (s00 && e0) || (s10 && e10);
    let s11 = (s10 && e1) || (s00 && e01);
    (s01, s11)
}

/// `height` blocks stacked, each output feeding the next input.
pub fn simulate_tower<R: Rng + ?Sized>(
    params: &BlockParams,
    height: u64,
    bottom: (bool, bool),
    rng: &mut R,
) -> Result<(bool, bool)> {
    if height == 0 {
        return Err(Error::invalid("tower height must be at least 1"));
    }
    let mut state = bottom;
    for _ in 0..height {
        state = simulate_block(params, state, rng);
    }
    Ok(state)
}

/// Shape of the lattice and its open probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PercLattice {
    width: usize,
    height: usize,
    p_open: f64,
}

impl PercLattice {
    pub fn new(width: usize, height: usize, p_open: f64) -> Result<Self> {
        if width == 0 {
            return Err(Error::invalid("lattice width must be at least 1"));
        }
        if !(0.0..=1.0).contains(&p_open) {
            return Err(Error::invalid(format!("open probability must lie in [0, 1], got {p_open}")));
        }
        Ok(PercLattice {
            width,
            height,
            p_open,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn p_open(&self) -> f64 {
        self.p_open
    }

    pub fn with_p(&self, p_open: f64) -> Result<Self> {
        Self::new(self.width, self.height, p_open)
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.width, self.height)
    }

    /// Level-0 condition with every site set.
    pub fn full_init(&self) -> Vec<bool> {
        (1..=self.width).map(|i| i % 2 == 0).collect()
    }
}

/// Edge numbering for a `width × height` strip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    width: usize,
    height: usize,
    /// Index of the first edge of every level, plus the total at the end.
    level_start: Vec<usize>,
}

impl Shape {
    pub fn new(width: usize, height: usize) -> Self {
        let mut level_start = Vec::with_capacity(height + 1);
        let mut total = 0;
        for j in 0..height {
            level_start.push(total);
            total += level_sites(width, j)
                .map(|i| usize::from(i > 1) + usize::from(i < width))
                .sum::<usize>();
        }
        level_start.push(total);
        Shape {
            width,
            height,
            level_start,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn edge_count(&self) -> usize {
        *self.level_start.last().unwrap_or(&0)
    }

    pub fn is_site(&self, i: usize, j: usize) -> bool {
        i >= 1 && i <= self.width && j <= self.height && (i + j).is_multiple_of(2)
    }

    /// Index of the primal edge from site `(i, j)` towards `i − 1` (`left`)
    /// or `i + 1`.
    pub fn edge_index(&self, i: usize, j: usize, left: bool) -> Option<usize> {
        if !self.is_site(i, j) || j >= self.height {
            return None;
        }
        if (left && i == 1) || (!left && i == self.width) {
            return None;
        }
        let mut idx = self.level_start[j];
        for k in level_sites(self.width, j).take_while(|&k| k < i) {
            idx += usize::from(k > 1) + usize::from(k < self.width);
        }
        if !left && i > 1 {
            idx += 1;
        }
        Some(idx)
    }

    /// Every edge as `(i, j, left)`, in index order.
    pub fn edges(&self) -> Vec<(usize, usize, bool)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for j in 0..self.height {
            for i in level_sites(self.width, j) {
                if i > 1 {
                    out.push((i, j, true));
                }
                if i < self.width {
                    out.push((i, j, false));
                }
            }
        }
        out
    }
}

fn level_sites(width: usize, j: usize) -> impl Iterator<Item = usize> {
    let first = if j.is_multiple_of(2) { 2 } else { 1 };
    (first..=width).step_by(2)
}

/// A complete assignment of open/closed edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeConfig {
    shape: Shape,
    open: Vec<bool>,
}

impl EdgeConfig {
    pub fn new(shape: Shape, open: Vec<bool>) -> Result<Self> {
        if open.len() != shape.edge_count() {
            return Err(Error::invalid(format!(
                "expected {} edge states, got {}",
                shape.edge_count(),
                open.len()
            )));
        }
        Ok(EdgeConfig { shape, open })
    }

    /// Configuration whose edge `k` is bit `k` of `mask`.
    pub fn from_mask(shape: Shape, mask: u64) -> Self {
        let open = (0..shape.edge_count()).map(|k| mask >> k & 1 == 1).collect();
        EdgeConfig { shape, open }
    }

    pub fn sample<R: Rng + ?Sized>(shape: Shape, p_open: f64, rng: &mut R) -> Self {
        let open = (0..shape.edge_count()).map(|_| rng.random::<f64>() < p_open).collect();
        EdgeConfig { shape, open }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn is_open(&self, i: usize, j: usize, left: bool) -> bool {
        self.shape.edge_index(i, j, left).is_some_and(|k| self.open[k])
    }

    /// Propagates level-0 states (indexed `i − 1`) to the top level.
    pub fn propagate(&self, init: &[bool]) -> Vec<bool> {
        let w = self.shape.width;
        let mut level = level_zero(w, init);
        let mut k = 0;
        for j in 0..self.shape.height {
            let mut next = vec![false; w];
            for i in level_sites(w, j) {
                if i > 1 {
                    next[i - 2] |= level[i - 1] && self.open[k];
                    k += 1;
                }
                if i < w {
                    next[i] |= level[i - 1] && self.open[k];
                    k += 1;
                }
            }
            level = next;
        }
        level
    }

    /// Open directed path from some level-0 site to some level-`height` site.
    pub fn primal_crossing(&self) -> bool {
        let all = vec![true; self.shape.width];
        self.propagate(&all).iter().any(|&s| s)
    }

    /// Open dual path from the right boundary to the left boundary.
    pub fn dual_crossing(&self) -> bool {
        let w = self.shape.width;
        let h = self.shape.height;
        let is_dual = |a: usize, b: usize| a >= 1 && a <= w && b <= h && (a + b) % 2 == 1;
        let id = |a: usize, b: usize| b * w + (a - 1);
        let mut seen = vec![false; w * (h + 1)];
        let mut queue = VecDeque::new();
        for b in 0..=h {
            if is_dual(w, b) {
                seen[id(w, b)] = true;
                queue.push_back((w, b));
            }
        }
        while let Some((a, b)) = queue.pop_front() {
            if a == 1 {
                return true;
            }
            let mut moves: [Option<(usize, usize)>; 4] = [None; 4];
            // leftward moves cross primal edges
            if b < h && !self.is_open(a - 1, b, false) {
                moves[0] = Some((a - 1, b + 1));
            }
            if b >= 1 && !self.is_open(a, b - 1, true) {
                moves[1] = Some((a - 1, b - 1));
            }
            // rightward moves cross the never-open reversed edges
            if a < w {
                moves[2] = Some((a + 1, b + 1));
                if b >= 1 {
                    moves[3] = Some((a + 1, b - 1));
                }
            }
            for (na, nb) in moves.into_iter().flatten() {
                if is_dual(na, nb) && !seen[id(na, nb)] {
                    seen[id(na, nb)] = true;
                    queue.push_back((na, nb));
                }
            }
        }
        false
    }
}

fn level_zero(width: usize, init: &[bool]) -> Vec<bool> {
    (1..=width)
        .map(|i| i % 2 == 0 && init.get(i - 1).copied().unwrap_or(false))
        .collect()
}

/// Runs the lattice level by level, drawing edges on demand; returns the
/// top-level states indexed `i − 1`. Sites off the parity set are `false`,
/// as are entries of `init` at odd `i`.
pub fn simulate_lattice<R: Rng + ?Sized>(lat: &PercLattice, init: &[bool], rng: &mut R) -> Vec<bool> {
    let w = lat.width;
    let p = lat.p_open;
    let mut level = level_zero(w, init);
    let mut next = vec![false; w];
    for j in 0..lat.height {
        next.iter_mut().for_each(|s| *s = false);
        for i in level_sites(w, j) {
            if i > 1 {
                let open = rng.random::<f64>() < p;
                next[i - 2] |= level[i - 1] && open;
            }
            if i < w {
                let open = rng.random::<f64>() < p;
                next[i] |= level[i - 1] && open;
            }
        }
        std::mem::swap(&mut level, &mut next);
    }
    level
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PercRecord {
    pub replica: u64,
    pub survived: bool,
    pub top_ones: usize,
}

/// Independent replicas, replica `r` seeded from `mix64(master_seed, r)`.
pub fn run_replicas(lat: &PercLattice, init: &[bool], replicas: u64, master_seed: u64) -> Vec<PercRecord> {
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::replica_rng(master_seed, r);
            let top = simulate_lattice(lat, init, &mut rng);
            let top_ones = top.iter().filter(|&&s| s).count();
            PercRecord {
                replica: r,
                survived: top_ones > 0,
                top_ones,
            }
        })
        .collect()
}

/// Monte Carlo estimate of `P[some top-level site is 1]`.
pub fn crossing_probability_mc(
    lat: &PercLattice,
    init: &[bool],
    replicas: u64,
    master_seed: u64,
) -> Result<Estimate> {
    if replicas == 0 {
        return Err(Error::invalid("replicas must be at least 1"));
    }
    let hits = run_replicas(lat, init, replicas, master_seed)
        .iter()
        .filter(|r| r.survived)
        .count() as u64;
    Ok(Estimate::from_binomial(hits, replicas))
}

/// Largest edge count enumerated exhaustively.
pub const EXHAUSTIVE_EDGE_LIMIT: usize = 26;

fn check_exhaustive(shape: &Shape) -> Result<()> {
    if shape.edge_count() > EXHAUSTIVE_EDGE_LIMIT {
        return Err(Error::SizeLimit {
            nodes: shape.edge_count(),
            limit: EXHAUSTIVE_EDGE_LIMIT,
        });
    }
    Ok(())
}

/// Number of surviving edge configurations, bucketed by open-edge count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurvivalPolynomial {
    pub edges: usize,
    pub surviving_by_open: Vec<u64>,
}

impl SurvivalPolynomial {
    pub fn probability(&self, p_open: f64) -> f64 {
        let m = self.edges as i32;
        self.surviving_by_open
            .iter()
            .enumerate()
            .map(|(k, &c)| c as f64 * p_open.powi(k as i32) * (1.0 - p_open).powi(m - k as i32))
            .sum()
    }
}

/// Enumerates every edge configuration and counts those in which a top-level
/// site ends in state 1.
pub fn survival_polynomial(shape: &Shape, init: &[bool]) -> Result<SurvivalPolynomial> {
    check_exhaustive(shape)?;
    let m = shape.edge_count();
    let counts = (0..1u64 << m)
        .into_par_iter()
        .fold(
            || vec![0u64; m + 1],
            |mut acc, mask| {
                let cfg = EdgeConfig::from_mask(shape.clone(), mask);
                if cfg.propagate(init).iter().any(|&s| s) {
                    acc[mask.count_ones() as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; m + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(SurvivalPolynomial {
        edges: m,
        surviving_by_open: counts,
    })
}

pub fn exhaustive_crossing_probability(lat: &PercLattice, init: &[bool]) -> Result<f64> {
    Ok(survival_polynomial(&lat.shape(), init)?.probability(lat.p_open))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualityReport {
    pub configurations: u64,
    /// Configurations where primal and dual crossings coexist or are both absent.
    pub exceptions: u64,
}

/// Checks over every edge configuration that exactly one of the primal and
/// dual crossings exists.
pub fn verify_duality(shape: &Shape) -> Result<DualityReport> {
    check_exhaustive(shape)?;
    let total = 1u64 << shape.edge_count();
    let exceptions = (0..total)
        .into_par_iter()
        .filter(|&mask| {
            let cfg = EdgeConfig::from_mask(shape.clone(), mask);
            cfg.primal_crossing() == cfg.dual_crossing()
        })
        .count() as u64;
    Ok(DualityReport {
        configurations: total,
        exceptions,
    })
}
