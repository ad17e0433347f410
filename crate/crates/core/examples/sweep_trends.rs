//! Mean objective and latency spread per scheme along a transmit power
//! sweep, plus the rows as a table.

use uavsar::config::ExperimentConfig;
use uavsar::experiment::{mean_over_seeds, sweep, write_rows, SweepOptions};
use uavsar::orchestrator::Scheme;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig { seeds: (0..5).collect(), ..ExperimentConfig::default() };
    let values = [0.2, 0.6, 1.0];
    let rows = sweep(&cfg, "tx_power_w", &values, SweepOptions::default())?;
    for scheme in Scheme::ALL {
        for v in values {
            let obj = mean_over_seeds(&rows, scheme, v, |m| m.objective_s).unwrap_or(f64::NAN);
            let sd = mean_over_seeds(&rows, scheme, v, |m| m.delay_stddev_s).unwrap_or(f64::NAN);
            println!("{scheme:13} p = {v:.1} W: objective {obj:.4} s, stddev {sd:.4} s");
        }
    }
    write_rows(&rows[..4], std::io::stdout().lock())?;
    Ok(())
}
