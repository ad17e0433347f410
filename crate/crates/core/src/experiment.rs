//! Parameter sweeps over seeded scenarios and their tabular output.
//!
//! Solvers work on one chunk of mean size; chunks of an S-UAV are processed
//! one after another, so latencies and energies of a row are the per-chunk
//! values times the chunk count.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::config::{ConfigError, ExperimentConfig};
use crate::orchestrator::{check_solution, run_baseline, Scheme, SolverOptions, SolverReport};
use crate::scenario::generate_scenario;

/// Environment variable overriding the sweep worker count.
pub const WORKERS_ENV: &str = "UAVSAR_WORKERS";

pub const SWEEP_PARAMS: [&str; 4] = ["n_chunks", "tx_power_w", "n0_cap", "cpu_suav_hz"];

pub const HEADER: [&str; 11] = [
    "seed",
    "scheme",
    "swept_param_name",
    "swept_value",
    "objective_s",
    "delay_stddev_s",
    "suav_exec_energy_j",
    "ruav_energy_j",
    "outer_iters",
    "wall_ms",
    "status",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub objective_s: f64,
    pub delay_stddev_s: f64,
    /// Communication plus computation energy per S-UAV.
    pub suav_exec_energy_j: Vec<f64>,
    /// Relay computation energy.
    pub ruav_energy_j: f64,
    pub outer_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub seed: u64,
    pub scheme: Scheme,
    pub swept_param_name: String,
    pub swept_value: f64,
    /// `Err` holds the failure message of the cell.
    pub outcome: Result<Metrics, String>,
    /// Zero unless timing is recorded.
    pub wall_ms: f64,
}

impl ResultRow {
    pub fn is_error(&self) -> bool {
        self.outcome.is_err()
    }

    pub fn metrics(&self) -> Option<&Metrics> {
        self.outcome.as_ref().ok()
    }

    fn record(&self) -> Vec<String> {
        let mut r = vec![
            self.seed.to_string(),
            self.scheme.name().to_string(),
            self.swept_param_name.clone(),
            self.swept_value.to_string(),
        ];
        match &self.outcome {
            Ok(m) => {
                r.push(m.objective_s.to_string());
                r.push(m.delay_stddev_s.to_string());
                r.push(m.suav_exec_energy_j.iter().map(f64::to_string).collect::<Vec<_>>().join(";"));
                r.push(m.ruav_energy_j.to_string());
                r.push(m.outer_iters.to_string());
                r.push(self.wall_ms.to_string());
                r.push("ok".into());
            }
            Err(e) => {
                r.extend(std::iter::repeat_n(String::new(), 5));
                r.push(self.wall_ms.to_string());
                r.push(format!("error: {e}"));
            }
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    /// Fill `wall_ms`; off by default so output bytes only depend on inputs.
    pub record_timing: bool,
}

/// Scales a per-chunk report to `n_chunks` sequential chunks.
pub fn metrics_from_report(report: &SolverReport, n_chunks: usize) -> Metrics {
    let k = n_chunks as f64;
    let ev = &report.final_state.evaluation;
    Metrics {
        objective_s: k * ev.objective_s,
        // `+ 0.0` turns a negative zero into zero.
        delay_stddev_s: k * ev.spread_s + 0.0,
        suav_exec_energy_j: ev.suav_energies.iter().map(|e| k * e.execution_j()).collect(),
        ruav_energy_j: k * ev.ruav_energy.comp_j + 0.0,
        outer_iters: report.iterations,
    }
}

pub fn solver_options(config: &ExperimentConfig) -> SolverOptions {
    SolverOptions { tol: config.tol, r_max: config.r_max, ..SolverOptions::default() }
}

/// Runs one scheme on the scenario of `seed` and checks the result.
pub fn run_one(config: &ExperimentConfig, seed: u64, scheme: Scheme) -> Result<SolverReport, String> {
    let scenario = generate_scenario(config, seed).map_err(|e| e.to_string())?;
    let report = run_baseline(&scenario, scheme, &solver_options(config)).map_err(|e| e.to_string())?;
    let bad = check_solution(&scenario, scheme, &report.final_state);
    if !bad.is_empty() {
        return Err(format!("constraint check failed: {}", bad.join("; ")));
    }
    Ok(report)
}

/// All four schemes on one (seed, swept value) cell; every scheme sees the
/// same scenario draw.
pub fn run_cell(config: &ExperimentConfig, param: &str, value: f64, seed: u64, opts: SweepOptions) -> Vec<ResultRow> {
    Scheme::ALL
        .into_iter()
        .map(|scheme| {
            let started = Instant::now();
            let outcome = run_one(config, seed, scheme).map(|r| metrics_from_report(&r, config.n_chunks));
            let wall_ms = if opts.record_timing { started.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
            ResultRow { seed, scheme, swept_param_name: param.to_string(), swept_value: value, outcome, wall_ms }
        })
        .collect()
}

fn format_value(param: &str, value: f64) -> Result<String, ConfigError> {
    if matches!(param, "n_chunks" | "n0_cap") {
        if value < 0.0 || value.fract() != 0.0 {
            return Err(ConfigError::Validation { key: param.into(), message: format!("{value} is not a count") });
        }
        Ok(format!("{}", value as u64))
    } else {
        Ok(value.to_string())
    }
}

/// Configuration of one swept value; fails on unknown parameters and on
/// values the configuration rejects.
pub fn config_for(config: &ExperimentConfig, param: &str, value: f64) -> Result<ExperimentConfig, ConfigError> {
    if !SWEEP_PARAMS.contains(&param) {
        return Err(ConfigError::Validation {
            key: param.into(),
            message: format!("cannot sweep this parameter (expected one of {})", SWEEP_PARAMS.join(", ")),
        });
    }
    let mut cfg = config.clone();
    cfg.set(param, &format_value(param, value)?)?;
    cfg.validate()?;
    Ok(cfg)
}

fn worker_count() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|&n: &usize| n > 0)
}

/// Every value x seed x scheme, in parallel; rows come back sorted by
/// (seed, scheme, value).
pub fn sweep(config: &ExperimentConfig, param: &str, values: &[f64], opts: SweepOptions) -> Result<Vec<ResultRow>, ConfigError> {
    let cells: Vec<(ExperimentConfig, f64, u64)> = values
        .iter()
        .map(|&v| config_for(config, param, v).map(|c| (c, v)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flat_map(|(c, v)| config.seeds.iter().map(move |&s| (c.clone(), v, s)))
        .collect();
    let work = || -> Vec<ResultRow> {
        cells.par_iter().flat_map_iter(|(c, v, s)| run_cell(c, param, *v, *s, opts)).collect()
    };
    let mut rows = match worker_count() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ConfigError::Validation { key: WORKERS_ENV.into(), message: e.to_string() })?
            .install(work),
        None => work(),
    };
    rows.sort_by(|a, b| {
        a.seed.cmp(&b.seed).then(a.scheme.cmp(&b.scheme)).then(a.swept_value.total_cmp(&b.swept_value))
    });
    Ok(rows)
}

pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results(rows: &[ResultRow], path: impl AsRef<Path>) -> csv::Result<()> {
    write_rows(rows, std::fs::File::create(path)?)
}

/// Mean of a metric over the successful rows matching `scheme` and `value`.
pub fn mean_over_seeds(rows: &[ResultRow], scheme: Scheme, value: f64, metric: impl Fn(&Metrics) -> f64) -> Option<f64> {
    let vals: Vec<f64> = rows
        .iter()
        .filter(|r| r.scheme == scheme && r.swept_value == value)
        .filter_map(|r| r.metrics().map(&metric))
        .collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}
