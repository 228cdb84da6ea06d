//! The win-stay lose-shift process on a graph.
//!
//! Two clocks are supported. In [`Mode::Continuous`] every edge rings at rate
//! one; this is simulated by superposition, drawing a global `Exp(|E|)` waiting
//! time and then a uniform edge. In [`Mode::SpedUp`] the discrete chain only
//! picks among *active* edges (at least one defecting endpoint), which skips
//! the `(C, C)` no-ops and leaves continuous time untouched.

mod observe;

pub use observe::{
    record_projection, write_defector_traces, write_projections, DefectorTrace, Observer,
    Projection, ProjectionParams, ProjectionRecorder, TracePoint, TripletMap,
};

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CaterpillarLayout, Graph};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    C,
    D,
}

/// Outcome of one edge update, named after what happens to the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    /// `(C, C) → (C, C)`
    Stay,
    /// `(C, D)` or `(D, C) → (D, D)`
    Spread,
    /// `(D, D) → (C, C)`
    Cooperate,
}

impl Transition {
    pub fn defector_delta(self) -> i64 {
        match self {
            Transition::Stay => 0,
            Transition::Spread => 1,
            Transition::Cooperate => -2,
        }
    }
}

/// The win-stay lose-shift update of one played pair.
#[inline]
pub fn wsls(a: Action, b: Action) -> (Action, Action) {
    use Action::*;
    match (a, b) {
        (C, C) => (C, C),
        (C, D) | (D, C) => (D, D),
        (D, D) => (C, C),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    actions: Vec<Action>,
    defectors: usize,
}

impl Configuration {
    pub fn all_defect(node_count: usize) -> Self {
        Configuration {
            actions: vec![Action::D; node_count],
            defectors: node_count,
        }
    }

    pub fn all_cooperate(node_count: usize) -> Self {
        Configuration {
            actions: vec![Action::C; node_count],
            defectors: 0,
        }
    }

    /// The initial state of the process: every node defects.
    pub fn init_all_defect(graph: &Graph) -> Self {
        Self::all_defect(graph.node_count())
    }

    pub fn from_actions(actions: Vec<Action>) -> Self {
        let defectors = actions.iter().filter(|&&a| a == Action::D).count();
        Configuration { actions, defectors }
    }

    /// Decodes bit `v` of `mask` as node `v` (set bit = `D`).
    pub fn from_mask(node_count: usize, mask: u64) -> Self {
        Self::from_actions(
            (0..node_count)
                .map(|v| if mask >> v & 1 == 1 { Action::D } else { Action::C })
                .collect(),
        )
    }

    pub fn to_mask(&self) -> u64 {
        self.actions
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == Action::D)
            .fold(0, |m, (v, _)| m | 1 << v)
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    #[inline]
    pub fn get(&self, node: usize) -> Action {
        self.actions[node]
    }

    pub fn set(&mut self, node: usize, action: Action) {
        match (self.actions[node], action) {
            (Action::C, Action::D) => self.defectors += 1,
            (Action::D, Action::C) => self.defectors -= 1,
            _ => {}
        }
        self.actions[node] = action;
    }

    #[inline]
    pub fn defector_count(&self) -> usize {
        self.defectors
    }

    /// Full recount, independent of the maintained counter.
    pub fn recount(&self) -> usize {
        self.actions.iter().filter(|&&a| a == Action::D).count()
    }

    #[inline]
    pub fn is_all_cooperate(&self) -> bool {
        self.defectors == 0
    }

    /// Plays edge `(u, v)` of `graph`.
    pub fn apply_wsls(&mut self, graph: &Graph, u: usize, v: usize) -> Result<Transition> {
        if graph.find_edge(u, v).is_none() {
            return Err(Error::NotAnEdge { u, v });
        }
        Ok(self.play(u, v))
    }

    #[inline]
    fn play(&mut self, u: usize, v: usize) -> Transition {
        use Action::*;
        match (self.actions[u], self.actions[v]) {
            (C, C) => Transition::Stay,
            (D, D) => {
                self.actions[u] = C;
                self.actions[v] = C;
                self.defectors -= 2;
                Transition::Cooperate
            }
            (C, D) => {
                self.actions[u] = D;
                self.defectors += 1;
                Transition::Spread
            }
            (D, C) => {
                self.actions[v] = D;
                self.defectors += 1;
                Transition::Spread
            }
        }
    }

    #[inline]
    fn is_active(&self, (u, v): (usize, usize)) -> bool {
        self.actions[u] == Action::D || self.actions[v] == Action::D
    }
}

/// Number of defecting leaves of a caterpillar star, not counting its root or
/// its two external vertices.
pub fn star_defector_count(
    layout: &CaterpillarLayout,
    config: &Configuration,
    star: usize,
) -> Result<usize> {
    if star >= layout.star_count() {
        return Err(Error::invalid(format!(
            "star {star} out of range for {} stars",
            layout.star_count()
        )));
    }
    Ok(layout
        .counted_leaves(star)
        .iter()
        .filter(|&&leaf| config.get(leaf) == Action::D)
        .count())
}

/// Coarse-grains a star: `true` iff `count > d/4 − 2`.
#[inline]
pub fn sigma_threshold(count: usize, degree: usize) -> bool {
    4 * count + 8 > degree
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Continuous,
    #[serde(alias = "sped-up")]
    SpedUp,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(Mode::Continuous),
            "spedup" | "sped-up" => Ok(Mode::SpedUp),
            other => Err(Error::invalid(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub configuration: Configuration,
    /// Continuous time, in units of the per-edge clock rate.
    pub time: f64,
    /// Edge events processed.
    pub steps: u64,
    pub rng: SimRng,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub edge: usize,
    /// Continuous-time increment; zero in the sped-up chain.
    pub dt: f64,
    pub transition: Transition,
}

/// Swap-remove index set of the active edges.
#[derive(Debug, Clone)]
struct ActiveEdges {
    list: Vec<u32>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl ActiveEdges {
    fn build(graph: &Graph, config: &Configuration) -> Self {
        let mut set = ActiveEdges {
            list: Vec::new(),
            pos: vec![ABSENT; graph.edge_count()],
        };
        for (e, &pair) in graph.edges().iter().enumerate() {
            if config.is_active(pair) {
                set.insert(e);
            }
        }
        set
    }

    #[inline]
    fn insert(&mut self, e: usize) {
        if self.pos[e] == ABSENT {
            self.pos[e] = self.list.len() as u32;
            self.list.push(e as u32);
        }
    }

    #[inline]
    fn remove(&mut self, e: usize) {
        let p = self.pos[e];
        if p != ABSENT {
            let last = self.list.pop().expect("non-empty");
            if last as usize != e {
                self.list[p as usize] = last;
                self.pos[last as usize] = p;
            }
            self.pos[e] = ABSENT;
        }
    }
}

/// A running replica over a shared graph.
#[derive(Debug, Clone)]
pub struct Simulation<'g> {
    graph: &'g Graph,
    state: SimState,
    active: Option<ActiveEdges>,
}

impl<'g> Simulation<'g> {
    pub fn new(graph: &'g Graph, configuration: Configuration, rng: SimRng) -> Result<Self> {
        if configuration.len() != graph.node_count() {
            return Err(Error::invalid(format!(
                "configuration has {} nodes, graph has {}",
                configuration.len(),
                graph.node_count()
            )));
        }
        Ok(Simulation {
            graph,
            state: SimState {
                configuration,
                time: 0.0,
                steps: 0,
                rng,
            },
            active: None,
        })
    }

    pub fn all_defect(graph: &'g Graph, seed: u64) -> Self {
        Self::new(graph, Configuration::init_all_defect(graph), rng::seeded(seed))
            .expect("sizes agree")
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn configuration(&self) -> &Configuration {
        &self.state.configuration
    }

    pub fn into_state(self) -> SimState {
        self.state
    }

    #[inline]
    fn waiting_time(&mut self) -> f64 {
        let e: f64 = self.state.rng.sample(Exp1);
        e / self.graph.edge_count() as f64
    }

    #[inline]
    fn fire_uniform(&mut self, dt: f64) -> Event {
        let edge = self.state.rng.random_range(0..self.graph.edge_count());
        let (u, v) = self.graph.edge(edge);
        let transition = self.state.configuration.play(u, v);
        self.state.time += dt;
        self.state.steps += 1;
        if transition != Transition::Stay {
            self.active = None;
        }
        Event {
            edge,
            dt,
            transition,
        }
    }

    /// One event of the continuous-time process.
    pub fn step_continuous(&mut self) -> Result<Event> {
        if self.graph.edge_count() == 0 {
            return Err(Error::invalid("continuous dynamics need at least one edge"));
        }
        let dt = self.waiting_time();
        Ok(self.fire_uniform(dt))
    }

    /// One event of the sped-up chain: a uniform choice among active edges.
    pub fn step_spedup(&mut self) -> Result<Event> {
        if self.state.configuration.is_all_cooperate() {
            return Err(Error::Absorbed);
        }
        let graph = self.graph;
        let config = &mut self.state.configuration;
        let active = self
            .active
            .get_or_insert_with(|| ActiveEdges::build(graph, config));
        if active.list.is_empty() {
            return Err(Error::invalid(
                "defectors remain but none has a neighbour; the sped-up chain is stuck",
            ));
        }
        let edge = active.list[self.state.rng.random_range(0..active.list.len())] as usize;
        let (u, v) = graph.edge(edge);
        let transition = config.play(u, v);
        for node in [u, v] {
            for &e in graph.incidence(node) {
                if config.is_active(graph.edge(e)) {
                    active.insert(e);
                } else {
                    active.remove(e);
                }
            }
        }
        self.state.steps += 1;
        Ok(Event {
            edge,
            dt: 0.0,
            transition,
        })
    }

    /// Number of active edges, rebuilding the index if needed.
    pub fn active_edge_count(&mut self) -> usize {
        let graph = self.graph;
        let config = &self.state.configuration;
        self.active
            .get_or_insert_with(|| ActiveEdges::build(graph, config))
            .list
            .len()
    }

    /// Runs until all-cooperate or until `cap` is exceeded, feeding observers.
    ///
    /// `cap` bounds continuous time in [`Mode::Continuous`] (the first event
    /// past it is discarded) and the step count in [`Mode::SpedUp`].
    /// Continuous-time observers sample left-continuously: a sample at `s`
    /// sees the state before any event at time `s`. Sped-up observers sample
    /// the state after exactly `s` steps.
    pub fn run(
        &mut self,
        mode: Mode,
        cap: f64,
        observers: &mut [&mut dyn Observer],
    ) -> Result<HittingResult> {
        if !(cap > 0.0) {
            return Err(Error::invalid(format!("cap must be positive, got {cap}")));
        }
        let start_time = self.state.time;
        let start_steps = self.state.steps;
        match mode {
            Mode::Continuous => {
                if self.graph.edge_count() == 0 && !self.state.configuration.is_all_cooperate() {
                    return Err(Error::invalid("continuous dynamics need at least one edge"));
                }
                let limit = start_time + cap;
                while !self.state.configuration.is_all_cooperate() {
                    let dt = self.waiting_time();
                    let next = self.state.time + dt;
                    if next > limit {
                        break;
                    }
                    flush(observers, next, true, &self.state.configuration);
                    self.fire_uniform(dt);
                }
                let converged = self.state.configuration.is_all_cooperate();
                let end = if converged { f64::INFINITY } else { limit };
                flush(observers, end, true, &self.state.configuration);
                if !converged {
                    self.state.time = limit;
                }
                Ok(self.result(converged, cap, Some(start_time), start_steps))
            }
            Mode::SpedUp => {
                let limit = start_steps.saturating_add(cap.floor() as u64);
                while !self.state.configuration.is_all_cooperate() && self.state.steps < limit {
                    flush(
                        observers,
                        (self.state.steps + 1) as f64,
                        false,
                        &self.state.configuration,
                    );
                    self.step_spedup()?;
                }
                let converged = self.state.configuration.is_all_cooperate();
                let end = if converged {
                    f64::INFINITY
                } else {
                    limit as f64
                };
                flush(observers, end, true, &self.state.configuration);
                Ok(self.result(converged, cap, None, start_steps))
            }
        }
    }

    fn result(
        &self,
        converged: bool,
        cap: f64,
        start_time: Option<f64>,
        start_steps: u64,
    ) -> HittingResult {
        HittingResult {
            converged,
            hitting_time: match (converged, start_time) {
                (true, Some(t0)) => Some(self.state.time - t0),
                _ => None,
            },
            steps: self.state.steps - start_steps,
            censored_at: (!converged).then_some(cap),
            final_defectors: self.state.configuration.defector_count(),
            trace: None,
        }
    }
}

fn flush(observers: &mut [&mut dyn Observer], limit: f64, inclusive: bool, config: &Configuration) {
    for obs in observers.iter_mut() {
        while let Some(s) = obs.next_sample() {
            if s < limit || (inclusive && s == limit) {
                obs.record(config);
            } else {
                break;
            }
        }
    }
}

/// Outcome of a run to cooperation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingResult {
    pub converged: bool,
    /// Continuous hitting time of all-cooperate, when converged in
    /// continuous mode.
    pub hitting_time: Option<f64>,
    pub steps: u64,
    /// The cap, when the run was stopped before converging.
    pub censored_at: Option<f64>,
    pub final_defectors: usize,
    pub trace: Option<Vec<TracePoint>>,
}

impl HittingResult {
    /// Hitting time in the units the mode is capped in: continuous time, or
    /// steps for the sped-up chain.
    pub fn value(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Continuous => self.hitting_time.unwrap_or(f64::INFINITY),
            Mode::SpedUp => self.steps as f64,
        }
    }
}

/// Runs from all-defect until cooperation or `cap`, optionally tracing the
/// defector count every `trace_every` clock units up to the cap.
pub fn run_to_cooperation(
    graph: &Graph,
    mode: Mode,
    cap: f64,
    seed: u64,
    trace_every: Option<f64>,
) -> Result<HittingResult> {
    let mut sim = Simulation::all_defect(graph, seed);
    match trace_every {
        None => sim.run(mode, cap, &mut []),
        Some(spacing) => {
            let mut trace = DefectorTrace::new(spacing, cap)?;
            let mut result = sim.run(mode, cap, &mut [&mut trace])?;
            result.trace = Some(trace.into_points());
            Ok(result)
        }
    }
}
