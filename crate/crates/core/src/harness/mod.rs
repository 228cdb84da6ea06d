//! Experiment orchestration: configuration, seeded parallel replicas, the
//! named suites and their outputs.
//!
//! Replica `i` of every table row draws from `mix64(master_seed, i)`, and
//! results are collected in replica order, so outputs do not depend on the
//! number of worker threads.

mod output;
mod suites;
mod summary;

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::Mode;
use crate::error::{Error, Result};
use crate::percolation::BlockParams;

pub use output::{emit_outputs, read_hitting_records, OutputPaths};
pub use suites::{
    ClassReport, DominationRecord, DominationSummary, ExpanderRecord, ExpanderReport, ExpansionReport,
    HittingRecord, StarOutcome, StarRecord, StarSummary, UpperSetReport,
};
pub use summary::{censored_quantile, summarize_hitting, Quantile, ScalingRow};

/// The registered experiment suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    CycleScaling,
    CompleteScaling,
    CaterpillarScaling,
    StarLemma,
    DominationCheck,
    Expander,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::CycleScaling,
        Suite::CompleteScaling,
        Suite::CaterpillarScaling,
        Suite::StarLemma,
        Suite::DominationCheck,
        Suite::Expander,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::CycleScaling => "cycle-scaling",
            Suite::CompleteScaling => "complete-scaling",
            Suite::CaterpillarScaling => "caterpillar-scaling",
            Suite::StarLemma => "star-lemma",
            Suite::DominationCheck => "domination-check",
            Suite::Expander => "expander",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Graph family for the expander suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    Cycle,
    Complete,
    RandomRegular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockConfig {
    pub p0: f64,
    pub p1: f64,
    pub p01: f64,
    pub p10: f64,
}

impl BlockConfig {
    pub fn params(&self) -> Result<BlockParams> {
        BlockParams::new(self.p0, self.p1, self.p01, self.p10)
    }
}

fn default_replicas() -> u64 {
    100
}

/// Experiment configuration, read from JSON.
///
/// Unset optional fields take suite defaults when the config is resolved. The
/// echo written to `summary.json` leaves out the thread count and the output
/// location, which do not affect results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// Graph sizes: `n` for cycles, complete and expander graphs, the path
    /// length for caterpillars.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    /// Continuous-time cap or step cap, by mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<usize>,
    /// Star-lemma time horizon `M′`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<BlockConfig>,
    /// Replace an existing output directory instead of failing.
    #[serde(default, skip_serializing)]
    pub overwrite: bool,
    /// Key the output directory by experiment name and start time.
    #[serde(default, skip_serializing)]
    pub timestamp: bool,
}

impl ExperimentConfig {
    pub fn new(suite: Suite) -> Self {
        ExperimentConfig {
            experiment: suite.name().to_string(),
            sizes: Vec::new(),
            degree: None,
            graph: None,
            mode: None,
            cap: None,
            replicas: default_replicas(),
            master_seed: 0,
            threads: None,
            output_dir: None,
            alpha: None,
            beta: None,
            horizon: None,
            g0: None,
            g1: None,
            block_time: None,
            block: None,
            overwrite: false,
            timestamp: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn suite(&self) -> Result<Suite> {
        self.experiment.parse()
    }

    /// Fills suite defaults and checks the invariants.
    pub fn resolved(&self) -> Result<Self> {
        let suite = self.suite()?;
        let mut c = self.clone();
        if c.replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        if c.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        // star-lemma and domination-check stop on their own horizons
        let (sizes, mode, cap): (&[usize], Mode, Option<f64>) = match suite {
            Suite::CycleScaling => (&[16, 32, 64, 128, 256], Mode::Continuous, Some(1e6)),
            Suite::CompleteScaling => (&[4, 6, 8, 10, 12, 14], Mode::SpedUp, Some(1e6)),
            Suite::CaterpillarScaling => (&[3, 5, 7, 9, 11], Mode::Continuous, Some(1e4)),
            Suite::StarLemma => (&[1], Mode::Continuous, None),
            Suite::DominationCheck => (&[3], Mode::Continuous, None),
            Suite::Expander => (&[10], Mode::SpedUp, Some(1e5)),
        };
        if c.sizes.is_empty() {
            c.sizes = sizes.to_vec();
        }
        let mode = *c.mode.get_or_insert(mode);
        match cap {
            Some(default) => {
                let cap = *c.cap.get_or_insert(default);
                if !(cap > 0.0) {
                    return Err(Error::Config(format!("cap must be positive, got {cap}")));
                }
                check_finite_cap(cap)?;
            }
            None if c.cap.is_some() => {
                return Err(Error::Config(format!("{suite} takes no cap")));
            }
            None => {}
        }
        let fixed_mode = |wanted: Mode| -> Result<()> {
            if mode != wanted {
                return Err(Error::Config(format!("{suite} runs in {wanted:?} mode only")));
            }
            Ok(())
        };
        match suite {
            Suite::CycleScaling => {
                check_sizes(&c.sizes, 3, "cycle")?;
            }
            Suite::CompleteScaling => {
                check_sizes(&c.sizes, 2, "complete graph")?;
            }
            Suite::CaterpillarScaling => {
                check_sizes(&c.sizes, 1, "caterpillar")?;
                let d = *c.degree.get_or_insert(16);
                if d < 3 {
                    return Err(Error::Config("caterpillar degree must be at least 3".into()));
                }
            }
            Suite::StarLemma => {
                fixed_mode(Mode::Continuous)?;
                let d = *c.degree.get_or_insert(30) as f64;
                c.g0.get_or_insert(2.0);
                c.g1.get_or_insert(3.0);
                c.horizon.get_or_insert(d.powi(3));
                c.sizes = vec![1];
            }
            Suite::DominationCheck => {
                fixed_mode(Mode::Continuous)?;
                let d = *c.degree.get_or_insert(20);
                if d < 3 {
                    return Err(Error::Config("caterpillar degree must be at least 3".into()));
                }
                if d < 8 {
                    return Err(Error::Config(format!(
                        "domination check needs d >= 8 so that both projected states are reachable, got {d}"
                    )));
                }
                let tau = *c.block_time.get_or_insert((d * d) as f64);
                if !(tau > 0.0) || !tau.is_finite() {
                    return Err(Error::Config("block_time must be positive and finite".into()));
                }
                c.block.get_or_insert(BlockConfig {
                    p0: 0.9,
                    p1: 0.9,
                    p01: 0.01,
                    p10: 0.01,
                });
                c.block.as_ref().unwrap().params().map_err(|e| Error::Config(e.to_string()))?;
                c.sizes = vec![3];
            }
            Suite::Expander => {
                fixed_mode(Mode::SpedUp)?;
                let kind = *c.graph.get_or_insert(GraphKind::Complete);
                let min = match kind {
                    GraphKind::Cycle => 3,
                    _ => 2,
                };
                check_sizes(&c.sizes, min, "expander graph")?;
                if kind == GraphKind::RandomRegular && c.degree.is_none() {
                    return Err(Error::Config("random-regular graphs need `degree`".into()));
                }
                let alpha = *c.alpha.get_or_insert(2);
                let beta = *c.beta.get_or_insert(alpha.max(c.sizes[0] / 2));
                if alpha == 0 || alpha > beta || c.sizes.iter().any(|&n| beta >= n) {
                    return Err(Error::Config(format!(
                        "need 0 < alpha <= beta < n, got alpha = {alpha}, beta = {beta}"
                    )));
                }
            }
        }
        Ok(c)
    }
}

fn check_sizes(sizes: &[usize], min: usize, what: &str) -> Result<()> {
    if let Some(&n) = sizes.iter().find(|&&n| n < min) {
        return Err(Error::Config(format!("{what} needs n >= {min}, got {n}")));
    }
    Ok(())
}

fn check_finite_cap(cap: f64) -> Result<()> {
    if !cap.is_finite() {
        return Err(Error::Config("cap must be finite".into()));
    }
    Ok(())
}

/// Per-replica records of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Records {
    Hitting(Vec<HittingRecord>),
    Star(Vec<StarRecord>),
    Domination(Vec<DominationRecord>),
    Expander(Vec<ExpanderRecord>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Hitting(r) => r.len(),
            Records::Star(r) => r.len(),
            Records::Domination(r) => r.len(),
            Records::Expander(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        fn all<W: std::io::Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush().map_err(|e| Error::io("records.csv", e))?;
            Ok(())
        }
        match self {
            Records::Hitting(r) => all(out, r),
            Records::Star(r) => all(out, r),
            Records::Domination(r) => all(out, r),
            Records::Expander(r) => all(out, r),
        }
    }
}

/// Suite-specific statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SuiteSummary {
    Scaling { mode: Mode, cap: f64, rows: Vec<ScalingRow> },
    StarLemma(StarSummary),
    Domination(DominationSummary),
    Expander { reports: Vec<ExpanderReport> },
}

/// Contents of `summary.json`: everything that is a function of the config.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub records: usize,
    pub results: SuiteSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub summary: Summary,
    pub records: Records,
    pub wall_clock_seconds: f64,
    pub threads: usize,
}

/// Resolves the config, runs the suite and returns records and summary.
/// Nothing is written; see [`emit_outputs`].
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let config = config.resolved()?;
    let suite = config.suite()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::ThreadPool(e.to_string()))?;
    let threads = pool.current_num_threads();
    let start = Instant::now();
    let (records, results) = pool.install(|| suites::run(suite, &config))?;
    let wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(ExperimentResult {
        summary: Summary {
            experiment: config.experiment.clone(),
            version: env!("CARGO_PKG_VERSION"),
            records: records.len(),
            config,
            results,
        },
        records,
        wall_clock_seconds,
        threads,
    })
}

/// Runs `count` replicas on the current pool, in replica order.
pub(crate) fn replicate<T, F>(count: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}
