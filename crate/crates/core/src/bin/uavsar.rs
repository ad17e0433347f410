//! Command line front end: single runs, sweeps, small-instance oracle
//! comparisons and solver traces.
//!
//! Exit status is 0 on success, 1 when any row failed and 2 on a bad
//! configuration.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uavsar::config::{ConfigError, ExperimentConfig};
use uavsar::experiment::{run_cell, sweep, write_rows, ResultRow, SweepOptions};
use uavsar::oracle::{joint_bruteforce, OracleOptions};
use uavsar::orchestrator::{run_baseline, Scheme};
use uavsar::placement::write_trace;
use uavsar::scenario::generate_scenario;

#[derive(Parser)]
#[command(name = "uavsar", version, about = "Min-max video latency for UAV-assisted maritime search and rescue")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file; missing keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run this seed only instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep only this scheme.
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Fill the wall_ms column.
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Every scheme on the configured scenarios.
    Run(Common),
    /// One parameter over a list of values.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        param: String,
        /// Comma separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Proposed solver against joint brute force; small instances only.
    Oracle(Common),
    /// Outer objective trace and relay placement iterates of one solve.
    Trace(Common),
}

enum Failure {
    Config(String),
    Rows,
    Run(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn load(common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seeds = vec![s];
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output(common: &Common) -> Result<Box<dyn Write>, Failure> {
    Ok(match &common.out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn emit(common: &Common, mut rows: Vec<ResultRow>) -> Result<(), Failure> {
    if let Some(s) = common.scheme {
        rows.retain(|r| r.scheme == s);
    }
    write_rows(&rows, output(common)?)?;
    for r in rows.iter().filter(|r| r.is_error()) {
        if let Err(e) = &r.outcome {
            eprintln!("seed {} {}: {e}", r.seed, r.scheme);
        }
    }
    if rows.iter().any(ResultRow::is_error) {
        Err(Failure::Rows)
    } else {
        Ok(())
    }
}

fn run(common: &Common) -> Result<(), Failure> {
    let cfg = load(common)?;
    let opts = SweepOptions { record_timing: common.timing };
    let rows = cfg.seeds.iter().flat_map(|&s| run_cell(&cfg, "none", 0.0, s, opts)).collect();
    emit(common, rows)
}

fn oracle(common: &Common) -> Result<(), Failure> {
    let cfg = load(common)?;
    let scheme = common.scheme.unwrap_or(Scheme::Proposed);
    let mut out = output(common)?;
    writeln!(out, "seed,scheme,solver_s,oracle_s,ratio,status")?;
    let mut failed = false;
    for &seed in &cfg.seeds {
        let res = generate_scenario(&cfg, seed).and_then(|sc| {
            let rep = run_baseline(&sc, scheme, &uavsar::experiment::solver_options(&cfg))?;
            let orc = joint_bruteforce(&sc, scheme.mobility(), &OracleOptions::default())?;
            Ok((rep.objective_s(), orc.objective_s))
        });
        match res {
            Ok((s, o)) => writeln!(out, "{seed},{scheme},{s:?},{o:?},{:?},ok", s / o)?,
            Err(e) => {
                failed = true;
                writeln!(out, "{seed},{scheme},,,,error: {e}")?;
            }
        }
    }
    if failed {
        Err(Failure::Rows)
    } else {
        Ok(())
    }
}

fn trace(common: &Common) -> Result<(), Failure> {
    let cfg = load(common)?;
    let seed = cfg.seeds[0];
    let scheme = common.scheme.unwrap_or(Scheme::Proposed);
    let sc = generate_scenario(&cfg, seed).map_err(|e| Failure::Run(e.to_string()))?;
    let rep = run_baseline(&sc, scheme, &uavsar::experiment::solver_options(&cfg)).map_err(|e| Failure::Run(e.to_string()))?;
    let mut out = output(common)?;
    writeln!(out, "# seed {seed}, scheme {scheme}, converged {}", rep.converged)?;
    writeln!(out, "outer,objective_s")?;
    for (k, v) in rep.objective_trace.iter().enumerate() {
        writeln!(out, "{k},{v:?}")?;
    }
    for (k, t) in rep.placement_traces.iter().enumerate() {
        writeln!(out, "\n# placement iterates of outer iteration {}", k + 1)?;
        write_trace(t, &mut out)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => run(c),
        Command::Sweep { common, param, values } => load(common).and_then(|cfg| {
            let rows = sweep(&cfg, param, values, SweepOptions { record_timing: common.timing })?;
            emit(common, rows)
        }),
        Command::Oracle(c) => oracle(c),
        Command::Trace(c) => trace(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rows) => ExitCode::from(1),
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
    }
}
