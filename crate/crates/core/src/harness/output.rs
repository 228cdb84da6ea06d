use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::suites::HittingRecord;
use super::{ExperimentResult, SuiteSummary};
use crate::error::{Error, Result};

/// Files written by [`emit_outputs`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub dir: PathBuf,
    pub summary: PathBuf,
    pub records: PathBuf,
    pub plotdata: Option<PathBuf>,
    pub timing: PathBuf,
}

#[derive(Serialize)]
struct Timing {
    wall_clock_seconds: f64,
    threads: usize,
}

#[derive(Serialize)]
struct PlotRow {
    n: usize,
    nodes: usize,
    median: String,
    lower_quartile: String,
    upper_quartile: String,
    median_steps: String,
    censored_fraction: f64,
    censored_low: f64,
    censored_high: f64,
    normalized: Option<f64>,
}

/// Writes `summary.json`, `records.csv`, `timing.json` and, for scaling
/// suites, `plotdata.csv` under `<root>/<experiment>` (suffixed with the start
/// time when the config asks for timestamps).
///
/// An existing target directory is an error unless the config sets
/// `overwrite`.
pub fn emit_outputs(result: &ExperimentResult, root: &Path) -> Result<OutputPaths> {
    let config = &result.summary.config;
    let mut name = config.experiment.clone();
    if config.timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        name = format!("{name}-{secs}");
    }
    let dir = root.join(name);
    if dir.exists() && !config.overwrite {
        return Err(Error::OutputCollision(dir));
    }
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let summary = dir.join("summary.json");
    write_json(&summary, &result.summary)?;

    let records = dir.join("records.csv");
    let file = fs::File::create(&records).map_err(|e| Error::io(&records, e))?;
    result.records.write_csv(BufWriter::new(file))?;

    let timing = dir.join("timing.json");
    write_json(
        &timing,
        &Timing {
            wall_clock_seconds: result.wall_clock_seconds,
            threads: result.threads,
        },
    )?;

    let plotdata = match &result.summary.results {
        SuiteSummary::Scaling { rows, .. } => {
            let path = dir.join("plotdata.csv");
            let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = csv::Writer::from_writer(BufWriter::new(file));
            for r in rows {
                w.serialize(PlotRow {
                    n: r.n,
                    nodes: r.nodes,
                    median: r.median.to_string(),
                    lower_quartile: r.lower_quartile.to_string(),
                    upper_quartile: r.upper_quartile.to_string(),
                    median_steps: r.median_steps.to_string(),
                    censored_fraction: r.censored_fraction,
                    censored_low: r.censored_interval.0,
                    censored_high: r.censored_interval.1,
                    normalized: r.normalized,
                })?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
            Some(path)
        }
        _ => None,
    };

    Ok(OutputPaths {
        dir,
        summary,
        records,
        plotdata,
        timing,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads back the `records.csv` of a scaling suite.
pub fn read_hitting_records(path: &Path) -> Result<Vec<HittingRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
