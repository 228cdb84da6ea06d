//! Censoring-aware statistics for hitting-time tables.

use std::fmt;

use serde::{Serialize, Serializer};

use super::suites::HittingRecord;
use crate::dynamics::Mode;
use crate::stats::{wilson_interval, Estimate, Z95};

/// A quantile of a censored sample: a value, or "above the cap" when any
/// order statistic it depends on is censored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantile {
    Value(f64),
    AboveCap(f64),
}

impl Quantile {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Quantile::Value(v) => Some(v),
            Quantile::AboveCap(_) => None,
        }
    }
}

impl fmt::Display for Quantile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantile::Value(v) => write!(f, "{v}"),
            Quantile::AboveCap(cap) => write!(f, "> {cap}"),
        }
    }
}

impl Serialize for Quantile {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Quantile::Value(v) => s.serialize_f64(v),
            Quantile::AboveCap(_) => s.serialize_str(&self.to_string()),
        }
    }
}

/// Linear-interpolation (type 7) quantile of a sample whose `censored` largest
/// members are only known to exceed `cap`. `sorted` holds the uncensored
/// values in increasing order.
pub fn censored_quantile(sorted: &[f64], censored: usize, prob: f64, cap: f64) -> Option<Quantile> {
    let total = sorted.len() + censored;
    if total == 0 {
        return None;
    }
    let h = (total - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if hi >= sorted.len() {
        return Some(Quantile::AboveCap(cap));
    }
    Some(Quantile::Value(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])))
}

/// One line of a scaling table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub nodes: usize,
    pub replicas: usize,
    pub converged: usize,
    pub censored: usize,
    pub converged_fraction: f64,
    pub censored_fraction: f64,
    /// 95% Wilson interval for the censored fraction.
    pub censored_interval: (f64, f64),
    /// Quantiles of the hitting value: continuous time or sped-up steps.
    pub median: Quantile,
    pub lower_quartile: Quantile,
    pub upper_quartile: Quantile,
    /// Mean and standard error over converged replicas only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged_mean: Option<Estimate>,
    /// Median number of edge events.
    pub median_steps: Quantile,
    /// `median_steps / (n ln n)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized: Option<f64>,
    /// `median / (n ln n)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized_time: Option<f64>,
    /// Mean defector fraction at the cap among censored replicas.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub censored_density: Option<f64>,
}

/// Groups records by `n` (in order of first appearance) and summarizes each
/// group. `normalize` adds the `n ln n` columns.
pub fn summarize_hitting(records: &[HittingRecord], mode: Mode, cap: f64, normalize: bool) -> Vec<ScalingRow> {
    let mut order: Vec<usize> = Vec::new();
    for r in records {
        if !order.contains(&r.n) {
            order.push(r.n);
        }
    }
    order
        .into_iter()
        .map(|n| {
            let group: Vec<&HittingRecord> = records.iter().filter(|r| r.n == n).collect();
            row(n, &group, mode, cap, normalize)
        })
        .collect()
}

fn row(n: usize, group: &[&HittingRecord], mode: Mode, cap: f64, normalize: bool) -> ScalingRow {
    let replicas = group.len();
    let converged_runs: Vec<&&HittingRecord> = group.iter().filter(|r| r.converged).collect();
    let converged = converged_runs.len();
    let censored = replicas - converged;
    let value = |r: &HittingRecord| match mode {
        Mode::Continuous => r.time.unwrap_or(f64::NAN),
        Mode::SpedUp => r.steps as f64,
    };
    let mut values: Vec<f64> = converged_runs.iter().map(|r| value(r)).collect();
    values.sort_by(f64::total_cmp);
    let mut steps: Vec<f64> = converged_runs.iter().map(|r| r.steps as f64).collect();
    steps.sort_by(f64::total_cmp);
    let q = |p: f64| censored_quantile(&values, censored, p, cap).unwrap_or(Quantile::AboveCap(cap));
    let median = q(0.5);
    let median_steps = censored_quantile(&steps, censored, 0.5, cap).unwrap_or(Quantile::AboveCap(cap));
    let nlogn = n as f64 * (n as f64).ln();
    let nodes = group.first().map_or(0, |r| r.nodes);
    let censored_density = (censored > 0).then(|| {
        group
            .iter()
            .filter(|r| !r.converged)
            .map(|r| r.final_defectors as f64 / r.nodes as f64)
            .sum::<f64>()
            / censored as f64
    });
    ScalingRow {
        n,
        nodes,
        replicas,
        converged,
        censored,
        converged_fraction: converged as f64 / replicas.max(1) as f64,
        censored_fraction: censored as f64 / replicas.max(1) as f64,
        censored_interval: wilson_interval(censored as u64, replicas as u64, Z95),
        median,
        lower_quartile: q(0.25),
        upper_quartile: q(0.75),
        converged_mean: (converged > 0).then(|| Estimate::from_samples(&values)),
        median_steps,
        normalized: if normalize { median_steps.value().map(|m| m / nlogn) } else { None },
        normalized_time: if normalize && mode == Mode::Continuous {
            median.value().map(|m| m / nlogn)
        } else {
            None
        },
        censored_density,
    }
}
