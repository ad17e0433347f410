//! Rate against relay distance, with the first-order lower bound built at
//! a 400 m reference point.

use uavsar::config::ExperimentConfig;
use uavsar::link::{rate, rate_lower_bound, snr_coeff};
use uavsar::scenario::Position3D;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::default();
    let c = cfg.physics();
    let snr = snr_coeff(cfg.tx_power_w, c.rho0, c.noise_w);
    let suav = Position3D::new(0.0, 0.0, 100.0);
    let reference = Position3D::new(400.0, 0.0, 100.0);
    println!("{:>8} {:>14} {:>14} {:>10}", "dist_m", "rate_mbps", "bound_mbps", "tx_ms");
    for d in [1.0, 10.0, 50.0, 100.0, 200.0, 400.0, 800.0, 1500.0] {
        let relay = Position3D::new(d, 0.0, 100.0);
        let r = rate(&suav, &relay, &c, snr)?;
        let lb = rate_lower_bound(&suav, &relay, &reference, &c, snr)?;
        // Processed output of a 256 KB chunk.
        let bits = cfg.mu * 256.0 * cfg.bits_per_kb;
        println!("{d:8.0} {:14.3} {:14.3} {:10.3}", r / 1e6, lb / 1e6, 1e3 * bits / r);
    }
    Ok(())
}
