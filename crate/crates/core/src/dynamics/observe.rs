//! Sampled observables: defector-count traces and the space-time projection of
//! a caterpillar run onto the oriented percolation lattice.

use std::io::Write;

use serde::Serialize;

use super::{sigma_threshold, star_defector_count, Configuration, Mode, Simulation};
use crate::error::{Error, Result};
use crate::graph::{CaterpillarLayout, Graph};
use crate::rng;

/// Something sampled on its own grid of clock values while a run advances.
///
/// The clock is continuous time or the step count, depending on the run mode.
pub trait Observer {
    /// The next clock value to sample at, or `None` when done.
    fn next_sample(&self) -> Option<f64>;
    /// Records `config` as the state at [`Observer::next_sample`].
    fn record(&mut self, config: &Configuration);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub clock: f64,
    pub defectors: usize,
}

/// Defector count at `0, h, 2h, …` up to a horizon.
#[derive(Debug, Clone)]
pub struct DefectorTrace {
    spacing: f64,
    samples: usize,
    points: Vec<TracePoint>,
}

impl DefectorTrace {
    pub fn new(spacing: f64, horizon: f64) -> Result<Self> {
        if !(spacing > 0.0) || !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::invalid(format!(
                "trace needs positive spacing and finite horizon, got {spacing}, {horizon}"
            )));
        }
        let samples = (horizon / spacing).floor() as usize + 1;
        Ok(DefectorTrace {
            spacing,
            samples,
            points: Vec::with_capacity(samples.min(1 << 20)),
        })
    }

    pub fn points(&self) -> &[TracePoint] {
        &self.points
    }

    pub fn into_points(self) -> Vec<TracePoint> {
        self.points
    }
}

impl Observer for DefectorTrace {
    fn next_sample(&self) -> Option<f64> {
        (self.points.len() < self.samples).then_some(self.points.len() as f64 * self.spacing)
    }

    fn record(&mut self, config: &Configuration) {
        let clock = self.points.len() as f64 * self.spacing;
        self.points.push(TracePoint {
            clock,
            defectors: config.defector_count(),
        });
    }
}

/// Assigns to every lattice site `(i, j)` (with `1 ≤ i ≤ width`,
/// `0 ≤ j ≤ height`, `i + j` even) the pair of extremal stars of the triplet it
/// stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripletMap {
    width: usize,
    height: usize,
    /// Indexed `[j][i]`; `None` off the parity set.
    pairs: Vec<Vec<Option<(usize, usize)>>>,
}

impl TripletMap {
    pub fn from_fn<F>(width: usize, height: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> (usize, usize),
    {
        let pairs = (0..=height)
            .map(|j| {
                (0..=width)
                    .map(|i| (i >= 1 && (i + j) % 2 == 0).then(|| f(i, j)))
                    .collect()
            })
            .collect();
        TripletMap {
            width,
            height,
            pairs,
        }
    }

    /// Default map for `star_count = 2w + 1` stars (0-based): site `(i, j)`
    /// watches stars `(2i − 2, 2i)` on even levels and `(2i − 1, 2i + 1)` on odd
    /// levels, clamped into `0..star_count`.
    pub fn default_for(star_count: usize, height: usize) -> Result<Self> {
        if star_count < 3 {
            return Err(Error::invalid(format!(
                "projection needs at least 3 stars, got {star_count}"
            )));
        }
        let width = (star_count - 1) / 2;
        let last = star_count - 1;
        Ok(Self::from_fn(width, height, |i, j| {
            let (a, b) = if j % 2 == 0 {
                (2 * i - 2, 2 * i)
            } else {
                (2 * i - 1, 2 * i + 1)
            };
            (a.min(last), b.min(last))
        }))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pair(&self, i: usize, j: usize) -> Option<(usize, usize)> {
        self.pairs.get(j)?.get(i).copied().flatten()
    }

    fn validate(&self, star_count: usize) -> Result<()> {
        for (j, row) in self.pairs.iter().enumerate() {
            for (i, pair) in row.iter().enumerate() {
                if let Some((a, b)) = *pair {
                    if a >= star_count || b >= star_count || a == b {
                        return Err(Error::invalid(format!(
                            "site ({i}, {j}) maps to stars ({a}, {b}), need distinct stars < {star_count}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The space-time bit array `s̃[j][i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    pub width: usize,
    pub height: usize,
    /// Indexed `[j][i]` for `i` in `0..=width`; entries off the parity set are
    /// `false`.
    pub bits: Vec<Vec<bool>>,
}

impl Projection {
    pub fn get(&self, i: usize, j: usize) -> Option<bool> {
        (i >= 1 && i <= self.width && j <= self.height && (i + j).is_multiple_of(2))
            .then(|| self.bits[j][i])
    }

    pub fn sites(&self) -> impl Iterator<Item = (usize, usize, bool)> + '_ {
        (0..=self.height).flat_map(move |j| {
            (1..=self.width)
                .filter(move |i| (i + j) % 2 == 0)
                .map(move |i| (i, j, self.bits[j][i]))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionParams {
    /// Continuous time between lattice levels.
    pub block_time: f64,
    /// Number of levels above level 0.
    pub levels: usize,
}

/// Observer that fills a [`Projection`] at times `j · block_time`.
#[derive(Debug)]
pub struct ProjectionRecorder<'a> {
    layout: &'a CaterpillarLayout,
    map: &'a TripletMap,
    block_time: f64,
    levels: Vec<Vec<bool>>,
}

impl<'a> ProjectionRecorder<'a> {
    pub fn new(
        layout: &'a CaterpillarLayout,
        map: &'a TripletMap,
        block_time: f64,
    ) -> Result<Self> {
        if !(block_time > 0.0) {
            return Err(Error::invalid("block time must be positive"));
        }
        map.validate(layout.star_count())?;
        Ok(ProjectionRecorder {
            layout,
            map,
            block_time,
            levels: Vec::with_capacity(map.height + 1),
        })
    }

    pub fn finish(self) -> Projection {
        Projection {
            width: self.map.width,
            height: self.map.height,
            bits: self.levels,
        }
    }
}

impl Observer for ProjectionRecorder<'_> {
    fn next_sample(&self) -> Option<f64> {
        (self.levels.len() <= self.map.height).then_some(self.levels.len() as f64 * self.block_time)
    }

    fn record(&mut self, config: &Configuration) {
        let j = self.levels.len();
        let d = self.layout.degree();
        let sigma = |star: usize| {
            let count = star_defector_count(self.layout, config, star).expect("validated star");
            sigma_threshold(count, d)
        };
        let row = (0..=self.map.width)
            .map(|i| match self.map.pair(i, j) {
                Some((a, b)) => sigma(a) || sigma(b),
                None => false,
            })
            .collect();
        self.levels.push(row);
    }
}

/// Runs the continuous process on a caterpillar from `initial` for
/// `levels · block_time` time units and records the projection.
pub fn record_projection(
    graph: &Graph,
    layout: &CaterpillarLayout,
    initial: Configuration,
    params: ProjectionParams,
    map: &TripletMap,
    seed: u64,
) -> Result<Projection> {
    if map.height() != params.levels {
        return Err(Error::invalid(format!(
            "triplet map covers {} levels, run asks for {}",
            map.height(),
            params.levels
        )));
    }
    let mut recorder = ProjectionRecorder::new(layout, map, params.block_time)?;
    let mut sim = Simulation::new(graph, initial, rng::seeded(seed))?;
    let horizon = params.block_time * params.levels as f64;
    if horizon > 0.0 {
        sim.run(Mode::Continuous, horizon, &mut [&mut recorder])?;
    } else {
        recorder.record(sim.configuration());
    }
    Ok(recorder.finish())
}

/// Writes `replica,t_or_steps,defectors` rows.
pub fn write_defector_traces<'a, W, I>(out: W, traces: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (u64, &'a [TracePoint])>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["replica", "t_or_steps", "defectors"])?;
    for (replica, points) in traces {
        for p in points {
            w.write_record([
                replica.to_string(),
                p.clock.to_string(),
                p.defectors.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<trace>", e))?;
    Ok(())
}

/// Writes `replica,j,i,s_tilde` rows.
pub fn write_projections<'a, W, I>(out: W, projections: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (u64, &'a Projection)>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["replica", "j", "i", "s_tilde"])?;
    for (replica, proj) in projections {
        for (i, j, bit) in proj.sites() {
            w.write_record([
                replica.to_string(),
                j.to_string(),
                i.to_string(),
                u8::from(bit).to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<projection>", e))?;
    Ok(())
}
