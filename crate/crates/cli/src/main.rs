use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wsls_core::harness::{emit_outputs, run_experiment, ExperimentConfig, Suite, SuiteSummary};
use wsls_core::percolation::{
    exhaustive_crossing_probability, run_replicas, verify_duality, PercLattice,
};
use wsls_core::stats::Estimate;
use wsls_core::walk::{
    crossing_upper_bound, exact_absorption, poisson_lower_tail, poisson_upper_tail, ruin_mgf,
    ruin_probability, simulate_ruin, star_escape_bound, StarBoundSpec, WalkSpec,
};
use wsls_core::{percolation, Error};

#[derive(Parser)]
#[command(name = "wsls", version, about = "Win-stay lose-shift dynamics on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named experiment suite and write its outputs.
    Run {
        #[arg(long)]
        experiment: String,
        /// JSON config; suite defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicas: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print analytic bounds next to exact and Monte Carlo values, as CSV.
    Bounds {
        #[arg(long, default_value_t = 10_000)]
        replicas: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Oriented percolation on the width x height strip.
    Perc {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        replicas: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = PercMode::Mc)]
        mode: PercMode,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PercMode {
    Mc,
    Exhaustive,
    DualCheck,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            experiment,
            config,
            seed,
            replicas,
            threads,
            out,
        } => run(experiment, config, seed, replicas, threads, out),
        Command::Bounds { replicas, seed } => bounds(replicas, seed),
        Command::Perc {
            width,
            height,
            p,
            replicas,
            seed,
            mode,
        } => perc(width, height, p, replicas, seed, mode),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}

fn run(
    experiment: String,
    config: Option<PathBuf>,
    seed: Option<u64>,
    replicas: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(), Error> {
    let suite: Suite = experiment.parse()?;
    let mut cfg = match config {
        Some(path) => ExperimentConfig::from_path(&path).map_err(|e| match e {
            Error::Io { path, source } => Error::Config(format!("{}: {source}", path.display())),
            other => other,
        })?,
        None => ExperimentConfig::new(suite),
    };
    if cfg.experiment != experiment {
        return Err(Error::Config(format!(
            "config is for `{}`, command line asks for `{experiment}`",
            cfg.experiment
        )));
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(r) = replicas {
        cfg.replicas = r;
    }
    if threads.is_some() {
        cfg.threads = threads;
    }
    let root = out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let result = run_experiment(&cfg)?;
    let paths = emit_outputs(&result, &root)?;
    report(&result.summary.results);
    println!("wrote {}", paths.dir.display());
    Ok(())
}

fn report(results: &SuiteSummary) {
    match results {
        SuiteSummary::Scaling { rows, .. } => {
            println!("n\tmedian\tcensored\tnormalized");
            for r in rows {
                let norm = r.normalized.map_or(String::from("-"), |v| format!("{v:.4}"));
                println!("{}\t{}\t{:.3}\t{norm}", r.n, r.median, r.censored_fraction);
            }
        }
        SuiteSummary::StarLemma(s) => {
            let bound = s.bound.map_or(String::from("-"), |b| format!("{:.4e}", b.total.value));
            println!(
                "failure frequency {:.4} [{:.4}, {:.4}], bound {bound}",
                s.failure_frequency, s.failure_interval.0, s.failure_interval.1
            );
        }
        SuiteSummary::Domination(d) => {
            for c in &d.classes {
                println!("class {}: dominated = {}", c.class, c.dominated);
            }
        }
        SuiteSummary::Expander { reports } => {
            for r in reports {
                let up = r.up_frequency.map_or(String::from("-"), |f| format!("{f:.4}"));
                println!(
                    "n = {}: expansion {}/{} ({}), censored {:.3}, up-frequency {up}",
                    r.n,
                    r.expansion.numerator,
                    r.expansion.denominator,
                    if r.expansion.exact { "exact" } else { "estimate" },
                    r.censored_fraction
                );
            }
        }
    }
}

#[derive(Serialize)]
struct BoundRow {
    quantity: &'static str,
    parameters: String,
    value: Option<f64>,
    oracle: Option<f64>,
    bound: Option<f64>,
    monte_carlo: Option<f64>,
    stderr: Option<f64>,
}

fn bounds(replicas: u64, seed: u64) -> Result<(), Error> {
    let mut rows = Vec::new();
    for (p, d1, d2) in [(2.0 / 3.0, 1, 1), (2.0 / 3.0, 3, 5), (0.6, 2, 4), (0.8, 1, 6), (0.5, 4, 4)] {
        let spec = WalkSpec::new(p, d1, d2)?;
        let mc = simulate_ruin(&spec, replicas, seed);
        rows.push(BoundRow {
            quantity: "ruin_probability",
            parameters: format!("p={p:.4};d1={d1};d2={d2}"),
            value: Some(ruin_probability(&spec)),
            oracle: Some(exact_absorption(p, d1 as usize, d2 as usize)?.lower_first),
            bound: (p > 0.5).then(|| ((1.0 - p) / p).powi(d1 as i32)),
            monte_carlo: Some(mc.mean),
            stderr: Some(mc.stderr),
        });
    }
    let rho = (9.0f64 / 8.0).sqrt();
    for d2 in [1u32, 2, 5, 10, 20] {
        rows.push(BoundRow {
            quantity: "ruin_mgf",
            parameters: format!("p=2/3;rho=sqrt(9/8);d2={d2}"),
            value: Some(ruin_mgf(2.0 / 3.0, rho, d2)?),
            oracle: Some(2f64.sqrt().powi(d2 as i32)),
            bound: None,
            monte_carlo: None,
            stderr: None,
        });
    }
    for mu in [1u64, 2, 4, 9, 25, 50, 100, 200] {
        let k = (mu as f64).sqrt().floor() as u64;
        let t = poisson_lower_tail(mu as f64, k)?;
        rows.push(BoundRow {
            quantity: "poisson_lower_tail",
            parameters: format!("mu={mu};k={k}"),
            value: Some(t.exact),
            oracle: None,
            bound: Some(t.bound),
            monte_carlo: None,
            stderr: None,
        });
    }
    for (d, m) in [(16u64, 1u64), (16, 2), (20, 3)] {
        let t = poisson_upper_tail((d * m) as f64, d * d * m * m)?;
        rows.push(BoundRow {
            quantity: "poisson_upper_tail_log",
            parameters: format!("mean={};k={}", d * m, d * d * m * m),
            value: Some(t.ln_exact),
            oracle: None,
            bound: Some(t.ln_bound),
            monte_carlo: None,
            stderr: None,
        });
    }
    for d in [30usize, 60, 120, 300, 600] {
        let df = d as f64;
        let specs = [
            ("star_spreads", StarBoundSpec::defection_spreads(df, df.powi(3))),
            ("star_survives", StarBoundSpec::defection_survives(df)),
            ("star_boosting", StarBoundSpec::defection_boosting(df, 1.0, df.powi(3))),
        ];
        for (name, spec) in specs {
            let Ok(spec) = spec else { continue };
            let b = star_escape_bound(&spec);
            rows.push(BoundRow {
                quantity: name,
                parameters: format!("d={d}"),
                value: Some(b.total.unclamped),
                oracle: None,
                bound: Some(b.total.value),
                monte_carlo: None,
                stderr: None,
            });
        }
    }
    for (width, height, p) in [(5usize, 4usize, 0.95f64), (10, 6, 0.97), (20, 10, 0.99)] {
        let n = 2 * width as u64 + 1;
        let lat = PercLattice::new(width, height, p)?;
        let Ok(b) = crossing_upper_bound(n, p, height as u64) else { continue };
        let records = run_replicas(&lat, &lat.full_init(), replicas, seed);
        let misses = records.iter().filter(|r| !r.survived).count() as u64;
        let est = Estimate::from_binomial(misses, replicas);
        rows.push(BoundRow {
            quantity: "non_crossing",
            parameters: format!("n={n};p={p};T={height}"),
            value: None,
            oracle: None,
            bound: Some(b.unclamped),
            monte_carlo: Some(est.mean),
            stderr: Some(est.stderr),
        });
    }
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("stdout", e))?;
    Ok(())
}

fn perc(width: usize, height: usize, p: f64, replicas: u64, seed: u64, mode: PercMode) -> Result<(), Error> {
    let lat = PercLattice::new(width, height, p)?;
    let init = lat.full_init();
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    match mode {
        PercMode::Mc => {
            if replicas == 0 {
                return Err(Error::InvalidParameter("replicas must be at least 1".into()));
            }
            w.write_record(["replica", "survived", "top_ones"])?;
            for r in run_replicas(&lat, &init, replicas, seed) {
                w.write_record([
                    r.replica.to_string(),
                    u8::from(r.survived).to_string(),
                    r.top_ones.to_string(),
                ])?;
            }
        }
        PercMode::Exhaustive => {
            let prob = exhaustive_crossing_probability(&lat, &init)?;
            w.write_record(["width", "height", "p", "edges", "crossing_probability"])?;
            w.write_record([
                width.to_string(),
                height.to_string(),
                p.to_string(),
                lat.shape().edge_count().to_string(),
                prob.to_string(),
            ])?;
        }
        PercMode::DualCheck => {
            let report = verify_duality(&percolation::Shape::new(width, height))?;
            w.write_record(["width", "height", "configurations", "exceptions"])?;
            w.write_record([
                width.to_string(),
                height.to_string(),
                report.configurations.to_string(),
                report.exceptions.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("stdout", e))?;
    Ok(())
}
