use serde::{Deserialize, Serialize};

use super::summary::summarize_hitting;
use super::{replicate, BlockConfig, ExperimentConfig, GraphKind, Records, Suite, SuiteSummary};
use crate::dynamics::{
    run_to_cooperation, sigma_threshold, star_defector_count, Action, Configuration, Mode, Simulation,
    Transition,
};
use crate::error::{Error, Result};
use crate::graph::{
    build_caterpillar, build_complete, build_cycle, build_random_regular, expansion_constant,
    expansion_upper_estimate, CaterpillarLayout, Graph,
};
use crate::rng::{self, mix64};
use crate::stats::{wilson_interval, Estimate, Z95};
use crate::walk::{
    expansion_rates, ruin_probability, star_escape_bound, ExpansionRates, StarBoundSpec, StarEscapeBound,
    WalkSpec,
};

/// Candidate sets tried when the expansion constant is too large to enumerate.
const ESTIMATE_SAMPLES: usize = 20_000;

pub(super) fn run(suite: Suite, c: &ExperimentConfig) -> Result<(Records, SuiteSummary)> {
    match suite {
        Suite::CycleScaling | Suite::CompleteScaling | Suite::CaterpillarScaling => scaling(suite, c),
        Suite::StarLemma => star_lemma(c),
        Suite::DominationCheck => domination(c),
        Suite::Expander => expander(c),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingRecord {
    pub n: usize,
    pub replica: u64,
    pub seed: u64,
    pub converged: bool,
    pub censored: bool,
    /// Continuous hitting time, when converged in continuous mode.
    pub time: Option<f64>,
    /// Edge events (continuous mode) or chain steps (sped-up mode).
    pub steps: u64,
    pub final_defectors: usize,
    pub nodes: usize,
}

fn scaling(suite: Suite, c: &ExperimentConfig) -> Result<(Records, SuiteSummary)> {
    let mode = c.mode.unwrap_or(Mode::Continuous);
    let cap = c.cap.unwrap_or(f64::INFINITY);
    let mut records = Vec::with_capacity(c.sizes.len() * c.replicas as usize);
    for &n in &c.sizes {
        let graph = match suite {
            Suite::CycleScaling => build_cycle(n)?,
            Suite::CompleteScaling => build_complete(n)?,
            _ => build_caterpillar(n, c.degree.unwrap_or(16))?.0,
        };
        let rows = replicate(c.replicas, |i| {
            let seed = mix64(c.master_seed, i);
            let r = run_to_cooperation(&graph, mode, cap, seed, None)?;
            Ok(HittingRecord {
                n,
                replica: i,
                seed,
                converged: r.converged,
                censored: !r.converged,
                time: r.hitting_time,
                steps: r.steps,
                final_defectors: r.final_defectors,
                nodes: graph.node_count(),
            })
        })?;
        records.extend(rows);
    }
    let rows = summarize_hitting(&records, mode, cap, suite == Suite::CycleScaling);
    Ok((Records::Hitting(records), SuiteSummary::Scaling { mode, cap, rows }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StarOutcome {
    /// Reached `g2` defecting leaves first.
    Upper,
    /// Dropped to `g0` first.
    Lower,
    /// Neither within the horizon.
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarRecord {
    pub replica: u64,
    pub seed: u64,
    pub outcome: StarOutcome,
    pub time: f64,
    pub events: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarSummary {
    pub degree: usize,
    pub g0: f64,
    pub g1: f64,
    pub g2: f64,
    pub horizon: f64,
    pub initial_defectors: usize,
    pub replicas: usize,
    pub upper: usize,
    pub lower: usize,
    pub timeout: usize,
    /// Empirical `P[T_{g2} ≥ T_{g0} ∧ M′]`.
    pub failure_frequency: f64,
    pub failure_stderr: f64,
    pub failure_interval: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<StarEscapeBound<f64>>,
    /// Ruin probability of the comparison walk, when the gaps are integers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walk_ruin_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A lone star with its counted leaves set to `C…C D…D`, the last
/// `⌈g1⌉` defecting; root and external vertices cooperate.
fn star_start(layout: &CaterpillarLayout, nodes: usize, g1: f64) -> Result<(Configuration, usize)> {
    let counted = layout.counted_leaves(0);
    let k = g1.ceil() as usize;
    if k > counted.len() {
        return Err(Error::Config(format!(
            "g1 = {g1} exceeds the {} counted leaves",
            counted.len()
        )));
    }
    let mut config = Configuration::all_cooperate(nodes);
    for &leaf in &counted[counted.len() - k..] {
        config.set(leaf, Action::D);
    }
    Ok((config, k))
}

fn star_lemma(c: &ExperimentConfig) -> Result<(Records, SuiteSummary)> {
    let d = c.degree.unwrap_or(30);
    let (g0, g1) = (c.g0.unwrap_or(2.0), c.g1.unwrap_or(3.0));
    let g2 = d as f64 / 3.0 - 2.0;
    let horizon = c.horizon.unwrap_or(f64::INFINITY);
    if !(g0 < g1 && g1 < g2) || !(horizon > 0.0) {
        return Err(Error::Config(format!(
            "need g0 < g1 < g2 = d/3 - 2 and a positive horizon, got {g0}, {g1}, {g2}, {horizon}"
        )));
    }
    let (graph, layout) = build_caterpillar(1, d)?;
    let (start, initial) = star_start(&layout, graph.node_count(), g1)?;
    let records = replicate(c.replicas, |i| {
        let seed = mix64(c.master_seed, i);
        let mut sim = Simulation::new(&graph, start.clone(), rng::seeded(seed))?;
        let mut count = initial;
        loop {
            let outcome = if count as f64 >= g2 {
                Some(StarOutcome::Upper)
            } else if count as f64 <= g0 {
                Some(StarOutcome::Lower)
            } else {
                None
            };
            if let Some(outcome) = outcome {
                let s = sim.state();
                return Ok(StarRecord {
                    replica: i,
                    seed,
                    outcome,
                    time: s.time,
                    events: s.steps,
                });
            }
            sim.step_continuous()?;
            if sim.state().time > horizon {
                return Ok(StarRecord {
                    replica: i,
                    seed,
                    outcome: StarOutcome::Timeout,
                    time: horizon,
                    events: sim.state().steps - 1,
                });
            }
            count = star_defector_count(&layout, sim.configuration(), 0)?;
        }
    })?;
    let tally = |o: StarOutcome| records.iter().filter(|r| r.outcome == o).count();
    let (upper, lower, timeout) = (tally(StarOutcome::Upper), tally(StarOutcome::Lower), tally(StarOutcome::Timeout));
    let failures = (lower + timeout) as u64;
    let est = Estimate::from_binomial(failures, records.len() as u64);
    let (bound, note) = match StarBoundSpec::new(g0, g1, horizon, d as f64) {
        Ok(spec) => (Some(star_escape_bound(&spec)), None),
        Err(e) => (None, Some(format!("bound not evaluated: {e}"))),
    };
    let integral = |x: f64| x.fract() == 0.0 && x >= 1.0;
    let walk_ruin_probability = (integral(g1 - g0) && integral(g2 - g1))
        .then(|| WalkSpec::new(2.0 / 3.0, (g1 - g0) as u32, (g2 - g1) as u32))
        .transpose()?
        .map(|w| ruin_probability(&w));
    let summary = StarSummary {
        degree: d,
        g0,
        g1,
        g2,
        horizon,
        initial_defectors: initial,
        replicas: records.len(),
        upper,
        lower,
        timeout,
        failure_frequency: est.mean,
        failure_stderr: est.stderr,
        failure_interval: wilson_interval(failures, records.len() as u64, Z95),
        bound,
        walk_ruin_probability,
        note,
    };
    Ok((Records::Star(records), SuiteSummary::StarLemma(summary)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationRecord {
    /// Start class `s̃00 s̃10`, e.g. `"10"`.
    pub class: String,
    pub replica: u64,
    pub seed: u64,
    pub s01: bool,
    pub s11: bool,
    pub left_defectors: usize,
    pub right_defectors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperSetReport {
    /// `both`, `left`, `right` or `either`.
    pub event: &'static str,
    pub empirical: f64,
    pub stderr: f64,
    pub interval: (f64, f64),
    pub block: f64,
    /// `empirical ≥ block − 2·stderr`.
    pub dominated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub class: String,
    pub initial_defectors: (usize, usize),
    pub replicas: usize,
    pub upper_sets: Vec<UpperSetReport>,
    pub dominated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationSummary {
    pub degree: usize,
    pub block_time: f64,
    pub block: BlockConfig,
    pub classes: Vec<ClassReport>,
    pub dominated: bool,
}

type UpperSet = (&'static str, fn(&DominationRecord) -> bool, f64);

/// Smallest leaf-defector count that projects to 1.
fn threshold_count(d: usize) -> usize {
    (0..).find(|&k| sigma_threshold(k, d)).unwrap_or(0)
}

fn domination(c: &ExperimentConfig) -> Result<(Records, SuiteSummary)> {
    let d = c.degree.unwrap_or(20);
    let tau = c.block_time.unwrap_or((d * d) as f64);
    let block_cfg = c.block.unwrap_or(BlockConfig {
        p0: 0.9,
        p1: 0.9,
        p01: 0.01,
        p10: 0.01,
    });
    let block = block_cfg.params()?;
    if d < 8 {
        return Err(Error::Config(format!(
            "domination check needs d >= 8 so that both projected states are reachable, got {d}"
        )));
    }
    let (graph, layout) = build_caterpillar(3, d)?;
    let on = threshold_count(d);
    let mut records = Vec::new();
    let mut classes = Vec::new();
    for (b0, b2) in [(false, false), (true, false), (false, true), (true, true)] {
        let class = format!("{}{}", u8::from(b0), u8::from(b2));
        let mut start = Configuration::all_cooperate(graph.node_count());
        for (star, bit) in [(0, b0), (2, b2)] {
            if bit {
                for &leaf in &layout.counted_leaves(star)[..on] {
                    start.set(leaf, Action::D);
                }
            }
        }
        let rows = replicate(c.replicas, |i| {
            let seed = mix64(c.master_seed, i);
            let mut sim = Simulation::new(&graph, start.clone(), rng::seeded(seed))?;
            sim.run(Mode::Continuous, tau, &mut [])?;
            let left = star_defector_count(&layout, sim.configuration(), 0)?;
            let right = star_defector_count(&layout, sim.configuration(), 2)?;
            Ok(DominationRecord {
                class: class.clone(),
                replica: i,
                seed,
                s01: sigma_threshold(left, d),
                s11: sigma_threshold(right, d),
                left_defectors: left,
                right_defectors: right,
            })
        })?;
        let law = block.output_law((b0, b2));
        let n = rows.len() as u64;
        let events: [UpperSet; 4] = [
            ("both", |r| r.s01 && r.s11, law[1][1]),
            ("left", |r| r.s01, law[1][0] + law[1][1]),
            ("right", |r| r.s11, law[0][1] + law[1][1]),
            ("either", |r| r.s01 || r.s11, 1.0 - law[0][0]),
        ];
        let upper_sets: Vec<UpperSetReport> = events
            .iter()
            .map(|&(event, hit, block_p)| {
                let k = rows.iter().filter(|r| hit(r)).count() as u64;
                let est = Estimate::from_binomial(k, n);
                UpperSetReport {
                    event,
                    empirical: est.mean,
                    stderr: est.stderr,
                    interval: wilson_interval(k, n, Z95),
                    block: block_p,
                    dominated: est.mean >= block_p - 2.0 * est.stderr,
                }
            })
            .collect();
        classes.push(ClassReport {
            class,
            initial_defectors: (if b0 { on } else { 0 }, if b2 { on } else { 0 }),
            replicas: rows.len(),
            dominated: upper_sets.iter().all(|u| u.dominated),
            upper_sets,
        });
        records.extend(rows);
    }
    let summary = DominationSummary {
        degree: d,
        block_time: tau,
        block: block_cfg,
        dominated: classes.iter().all(|c| c.dominated),
        classes,
    };
    Ok((Records::Domination(records), SuiteSummary::Domination(summary)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpanderRecord {
    pub n: usize,
    pub replica: u64,
    pub seed: u64,
    pub converged: bool,
    pub censored: bool,
    pub steps: u64,
    pub final_defectors: usize,
    /// Steps taken with `α ≤ N ≤ β` that added a defector.
    pub ups: u64,
    /// Steps taken with `α ≤ N ≤ β` that removed two.
    pub downs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub numerator: u64,
    pub denominator: u64,
    pub value: f64,
    /// `false` when only a randomized upper estimate was feasible.
    pub exact: bool,
    pub set: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpanderReport {
    pub graph: GraphKind,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    pub alpha: usize,
    pub beta: usize,
    pub expansion: ExpansionReport,
    /// Whether the expansion exceeds one half; unknown when only an upper
    /// estimate above one half is available.
    pub hypothesis_holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rates: Option<ExpansionRates<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub replicas: usize,
    pub censored: usize,
    pub censored_fraction: f64,
    pub censored_interval: (f64, f64),
    pub ups: u64,
    pub downs: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub up_frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub up_stderr: Option<f64>,
}

fn expander_graph(kind: GraphKind, n: usize, degree: Option<usize>, seed: u64) -> Result<Graph> {
    match kind {
        GraphKind::Cycle => build_cycle(n),
        GraphKind::Complete => build_complete(n),
        GraphKind::RandomRegular => {
            let d = degree.ok_or_else(|| Error::Config("random-regular graphs need `degree`".into()))?;
            build_random_regular(n, d, seed)
        }
    }
}

fn expander(c: &ExperimentConfig) -> Result<(Records, SuiteSummary)> {
    let kind = c.graph.unwrap_or(GraphKind::Complete);
    let cap = c.cap.unwrap_or(1e5);
    let limit = cap.floor() as u64;
    let mut records = Vec::new();
    let mut reports = Vec::new();
    for &n in &c.sizes {
        let graph = expander_graph(kind, n, c.degree, c.master_seed)?;
        let alpha = c.alpha.unwrap_or(2);
        let beta = c.beta.unwrap_or(n / 2);
        let expansion = match expansion_constant(&graph, alpha, beta) {
            Err(Error::SizeLimit { .. }) => {
                expansion_upper_estimate(&graph, alpha, beta, ESTIMATE_SAMPLES, c.master_seed)?
            }
            other => other?,
        };
        let rho = *expansion.value.numer() as f64 / *expansion.value.denom() as f64;
        let above_half = expansion.value > crate::Ratio::new(1, 2);
        let hypothesis_holds = match (above_half, expansion.exact) {
            (false, _) => Some(false),
            (true, true) => Some(true),
            (true, false) => None,
        };
        let (epsilon, rates, note) = if above_half {
            let eps = rho - 0.5;
            match expansion_rates(eps) {
                Ok(r) => (Some(eps), Some(r), None),
                Err(e) => (Some(eps), None, Some(format!("rates not derived: {e}"))),
            }
        } else {
            (None, None, Some("hypothesis fails: expansion is at most 1/2".to_string()))
        };
        let rows = replicate(c.replicas, |i| {
            let seed = mix64(c.master_seed, i);
            let mut sim = Simulation::all_defect(&graph, seed);
            let (mut ups, mut downs) = (0, 0);
            while !sim.configuration().is_all_cooperate() && sim.state().steps < limit {
                let before = sim.configuration().defector_count();
                let event = sim.step_spedup()?;
                if (alpha..=beta).contains(&before) {
                    match event.transition {
                        Transition::Spread => ups += 1,
                        Transition::Cooperate => downs += 1,
                        Transition::Stay => {}
                    }
                }
            }
            let converged = sim.configuration().is_all_cooperate();
            Ok(ExpanderRecord {
                n,
                replica: i,
                seed,
                converged,
                censored: !converged,
                steps: sim.state().steps,
                final_defectors: sim.configuration().defector_count(),
                ups,
                downs,
            })
        })?;
        let censored = rows.iter().filter(|r| r.censored).count();
        let ups: u64 = rows.iter().map(|r| r.ups).sum();
        let downs: u64 = rows.iter().map(|r| r.downs).sum();
        let freq = (ups + downs > 0).then(|| Estimate::from_binomial(ups, ups + downs));
        reports.push(ExpanderReport {
            graph: kind,
            n,
            degree: match kind {
                GraphKind::RandomRegular => c.degree,
                _ => None,
            },
            alpha,
            beta,
            expansion: ExpansionReport {
                numerator: *expansion.value.numer(),
                denominator: *expansion.value.denom(),
                value: rho,
                exact: expansion.exact,
                set: expansion.set.clone(),
            },
            hypothesis_holds,
            epsilon,
            rates,
            note,
            replicas: rows.len(),
            censored,
            censored_fraction: censored as f64 / rows.len() as f64,
            censored_interval: wilson_interval(censored as u64, rows.len() as u64, Z95),
            ups,
            downs,
            up_frequency: freq.map(|f| f.mean),
            up_stderr: freq.map(|f| f.stderr),
        });
        records.extend(rows);
    }
    Ok((Records::Expander(records), SuiteSummary::Expander { reports }))
}
