//! Latency and energy accounting for local and relay computing.
//!
//! Every function works on a deployed fleet (see [`Scenario::deploy`]):
//! S-UAV positions already follow the association and idle S-UAVs carry a
//! zero-size chunk.

use crate::error::{Error, Result};
use crate::link::{rate, snr_coeff, PhysicsConstants};
use crate::scenario::{Position3D, RUav, SUav, Scenario};

/// Latency components of one S-UAV; the branch not selected by the offloading
/// decision is reported as zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LatencyBreakdown {
    pub active: bool,
    pub local_compute_s: f64,
    pub local_tx_s: f64,
    pub offload_tx_s: f64,
    pub ruav_compute_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub comm_j: f64,
    pub comp_j: f64,
    pub hover_j: f64,
    pub total_j: f64,
}

impl EnergyBreakdown {
    /// Communication plus computation, the part that depends on decisions.
    pub fn execution_j(&self) -> f64 {
        self.comm_j + self.comp_j
    }
}

pub fn suav_rate(suav: &SUav, q_m: &Position3D, constants: &PhysicsConstants) -> Result<f64> {
    let snr = snr_coeff(suav.tx_power_w, constants.rho0, constants.noise_w);
    rate(&suav.current_pos, q_m, constants, snr)
}

/// `(compute, transmit)` seconds when the chunk is processed on board and the
/// compressed result is sent to the relay.
pub fn local_path_latency(suav: &SUav, q_m: &Position3D, constants: &PhysicsConstants) -> Result<(f64, f64)> {
    if suav.chunk_bits == 0.0 {
        return Ok((0.0, 0.0));
    }
    let t_loc = suav.chunk_bits * constants.f0_cycles_per_bit / suav.cpu_hz;
    let t_tx = suav.compress_ratio * suav.chunk_bits / suav_rate(suav, q_m, constants)?;
    Ok((t_loc, t_tx))
}

/// `(transmit, compute)` seconds when the raw chunk is offloaded and the relay
/// CPU is split evenly among `n_offloaders`.
pub fn offload_path_latency(
    suav: &SUav,
    q_m: &Position3D,
    ruav: &RUav,
    constants: &PhysicsConstants,
    n_offloaders: usize,
) -> Result<(f64, f64)> {
    if n_offloaders == 0 {
        return Err(Error::InvalidDecision(format!("S-UAV {} offloads but the offloader count is zero", suav.id)));
    }
    if suav.chunk_bits == 0.0 {
        return Ok((0.0, 0.0));
    }
    let t_tx = suav.chunk_bits / suav_rate(suav, q_m, constants)?;
    let t_comp = suav.chunk_bits * constants.f0_cycles_per_bit * n_offloaders as f64 / ruav.cpu_hz;
    Ok((t_tx, t_comp))
}

fn check_beta(fleet: &[SUav], beta: &[bool], n0_cap: usize) -> Result<usize> {
    if beta.len() != fleet.len() {
        return Err(Error::InvalidDecision(format!("offloading vector has {} entries for {} S-UAVs", beta.len(), fleet.len())));
    }
    let k = beta.iter().filter(|&&b| b).count();
    if k > n0_cap {
        return Err(Error::InvalidDecision(format!("{k} offloaders exceed the relay cap of {n0_cap}")));
    }
    Ok(k)
}

pub fn suav_latency(
    suav: &SUav,
    offloads: bool,
    n_offloaders: usize,
    q_m: &Position3D,
    ruav: &RUav,
    constants: &PhysicsConstants,
) -> Result<LatencyBreakdown> {
    let mut out = LatencyBreakdown { active: suav.is_active(), ..Default::default() };
    if !out.active {
        return Ok(out);
    }
    if offloads {
        let (tx, comp) = offload_path_latency(suav, q_m, ruav, constants, n_offloaders)?;
        out.offload_tx_s = tx;
        out.ruav_compute_s = comp;
        out.total_s = tx + comp;
    } else {
        let (comp, tx) = local_path_latency(suav, q_m, constants)?;
        out.local_compute_s = comp;
        out.local_tx_s = tx;
        out.total_s = comp + tx;
    }
    Ok(out)
}

/// Per-S-UAV latency for a deployed fleet, offloading vector and relay position.
pub fn total_latency(scenario: &Scenario, fleet: &[SUav], beta: &[bool], q_m: &Position3D) -> Result<Vec<LatencyBreakdown>> {
    let k = check_beta(fleet, beta, scenario.n0_cap)?;
    fleet
        .iter()
        .zip(beta)
        .map(|(s, &b)| suav_latency(s, b, k, q_m, &scenario.ruav, &scenario.constants))
        .collect()
}

pub fn suav_energy(suav: &SUav, offloads: bool, q_m: &Position3D, constants: &PhysicsConstants) -> Result<EnergyBreakdown> {
    let (comm_j, comp_j) = if suav.chunk_bits == 0.0 {
        (0.0, 0.0)
    } else if offloads {
        (suav.tx_power_w * suav.chunk_bits / suav_rate(suav, q_m, constants)?, 0.0)
    } else {
        let (_, t_tx) = local_path_latency(suav, q_m, constants)?;
        let comp = suav.cpu_hz * suav.cpu_hz * constants.zeta * suav.chunk_bits * constants.f0_cycles_per_bit;
        (suav.tx_power_w * t_tx, comp)
    };
    let hover_j = suav.hover_energy_j;
    Ok(EnergyBreakdown { comm_j, comp_j, hover_j, total_j: comm_j + comp_j + hover_j })
}

/// Relay energy using `xi_n = beta_n * sum(beta)` as the per-S-UAV weight.
pub fn ruav_energy(scenario: &Scenario, fleet: &[SUav], beta: &[bool]) -> Result<EnergyBreakdown> {
    check_beta(fleet, beta, scenario.n_suavs())?;
    let k = beta.iter().filter(|&&b| b).count() as f64;
    let c = &scenario.constants;
    let f = scenario.ruav.cpu_hz;
    let comp_j: f64 = fleet
        .iter()
        .zip(beta)
        .filter(|(_, &b)| b)
        .map(|(s, _)| k * f * f * c.zeta * c.f0_cycles_per_bit * s.chunk_bits)
        .sum();
    let hover_j = scenario.ruav.hover_energy_j;
    Ok(EnergyBreakdown { comm_j: 0.0, comp_j, hover_j, total_j: comp_j + hover_j })
}

/// `(max, population stddev)` of the totals of active S-UAVs; `(0, 0)` when
/// no S-UAV is active.
pub fn objective_and_spread(latencies: &[LatencyBreakdown]) -> (f64, f64) {
    let totals: Vec<f64> = latencies.iter().filter(|l| l.active).map(|l| l.total_s).collect();
    if totals.is_empty() {
        return (0.0, 0.0);
    }
    let max = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = totals.iter().sum::<f64>() / totals.len() as f64;
    let var = totals.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / totals.len() as f64;
    (max, var.sqrt())
}

/// Everything measured at one solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub latencies: Vec<LatencyBreakdown>,
    pub suav_energies: Vec<EnergyBreakdown>,
    pub ruav_energy: EnergyBreakdown,
    pub objective_s: f64,
    pub spread_s: f64,
}

pub fn evaluate(scenario: &Scenario, fleet: &[SUav], beta: &[bool], q_m: &Position3D) -> Result<Evaluation> {
    let latencies = total_latency(scenario, fleet, beta, q_m)?;
    let suav_energies = fleet
        .iter()
        .zip(beta)
        .map(|(s, &b)| suav_energy(s, b, q_m, &scenario.constants))
        .collect::<Result<Vec<_>>>()?;
    let ruav_energy = ruav_energy(scenario, fleet, beta)?;
    let (objective_s, spread_s) = objective_and_spread(&latencies);
    Ok(Evaluation { latencies, suav_energies, ruav_energy, objective_s, spread_s })
}

/// Max latency only; cheaper than [`evaluate`].
pub fn max_latency(scenario: &Scenario, fleet: &[SUav], beta: &[bool], q_m: &Position3D) -> Result<f64> {
    Ok(objective_and_spread(&total_latency(scenario, fleet, beta, q_m)?).0)
}

/// Energy limits for one fleet/decision pair; returns the first violated
/// constraint.
pub fn check_energy(scenario: &Scenario, fleet: &[SUav], beta: &[bool], q_m: &Position3D) -> Result<()> {
    for (s, &b) in fleet.iter().zip(beta) {
        let e = suav_energy(s, b, q_m, &scenario.constants)?;
        if e.total_j > s.energy_budget_j * (1.0 + 1e-12) {
            return Err(Error::InfeasibleSubproblem(format!(
                "S-UAV {} energy {:.6} J exceeds its residual budget {:.6} J",
                s.id, e.total_j, s.energy_budget_j
            )));
        }
    }
    let e = ruav_energy(scenario, fleet, beta)?;
    if e.total_j > scenario.ruav.energy_budget_j * (1.0 + 1e-12) {
        return Err(Error::InfeasibleSubproblem(format!(
            "relay energy {:.6} J exceeds its residual budget {:.6} J",
            e.total_j, scenario.ruav.energy_budget_j
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::scenario::{generate_scenario, CameraSpec};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn suav(bits: f64) -> SUav {
        let pos = Position3D::new(100.0, 100.0, 200.0);
        SUav {
            id: 0,
            initial_pos: pos,
            current_pos: pos,
            camera: CameraSpec::default(),
            cpu_hz: 0.2e9,
            tx_power_w: 0.8,
            chunk_bits: bits,
            compress_ratio: 0.2,
            energy_budget_j: 1e3,
            hover_energy_j: 0.0,
        }
    }

    fn ruav() -> RUav {
        RUav {
            pos: Position3D::new(500.0, 500.0, 500.0),
            cpu_hz: 2e9,
            box_lo: Position3D::new(0.0, 0.0, 100.0),
            box_hi: Position3D::new(1000.0, 1000.0, 1000.0),
            energy_budget_j: 1e3,
            hover_energy_j: 0.0,
        }
    }

    const Q: Position3D = Position3D::new(500.0, 500.0, 500.0);

    #[test]
    fn local_path_examples() {
        let c = PhysicsConstants::default();
        assert_eq!(local_path_latency(&suav(0.0), &Q, &c).unwrap(), (0.0, 0.0));
        let (t_loc, t_tx) = local_path_latency(&suav(2_048_000.0), &Q, &c).unwrap();
        assert!(rel(t_loc, 10.24) < 1e-12);
        let mut half = suav(2_048_000.0);
        half.compress_ratio = 0.1;
        let (_, t_half) = local_path_latency(&half, &Q, &c).unwrap();
        assert!(rel(t_half, t_tx / 2.0) < 1e-12);
    }

    #[test]
    fn offload_path_examples() {
        let c = PhysicsConstants::default();
        let (_, t1) = offload_path_latency(&suav(2_048_000.0), &Q, &ruav(), &c, 1).unwrap();
        assert!(rel(t1, 1.024) < 1e-12);
        let (_, t2) = offload_path_latency(&suav(2_048_000.0), &Q, &ruav(), &c, 2).unwrap();
        assert!(rel(t2, 2.0 * t1) < 1e-12);
        assert_eq!(offload_path_latency(&suav(0.0), &Q, &ruav(), &c, 1).unwrap(), (0.0, 0.0));
        assert!(matches!(offload_path_latency(&suav(1.0), &Q, &ruav(), &c, 0), Err(Error::InvalidDecision(_))));
    }

    #[test]
    fn computation_energy_value() {
        let c = PhysicsConstants::default();
        let e = suav_energy(&suav(2_048_000.0), false, &Q, &c).unwrap();
        // 1e-28 * (2e8)^2 * 2.048e6 * 1000
        assert!(rel(e.comp_j, 8.192e-3) < 1e-12, "{}", e.comp_j);
        let e_off = suav_energy(&suav(2_048_000.0), true, &Q, &c).unwrap();
        assert_eq!(e_off.comp_j, 0.0);
        let mut loud = suav(2_048_000.0);
        loud.tx_power_w = 1.6;
        // Doubling power doubles energy per second but also raises the rate.
        let base = suav_energy(&suav(2_048_000.0), true, &Q, &c).unwrap();
        let rate1 = suav_rate(&suav(1.0), &Q, &c).unwrap();
        let rate2 = suav_rate(&loud, &Q, &c).unwrap();
        let e2 = suav_energy(&loud, true, &Q, &c).unwrap();
        assert!(rel(e2.comm_j, 2.0 * base.comm_j * rate1 / rate2) < 1e-12);
    }

    #[test]
    fn relay_energy_examples() {
        let sc = generate_scenario(&ExperimentConfig::default(), 1).unwrap();
        let fleet: Vec<SUav> = sc.suavs.iter().map(|s| SUav { chunk_bits: 2_048_000.0, ..s.clone() }).collect();
        let none = vec![false; 8];
        assert_eq!(ruav_energy(&sc, &fleet, &none).unwrap().comp_j, 0.0);
        let unit = 4e18 * 1e-28 * 1000.0 * 2_048_000.0;
        let mut one = none.clone();
        one[3] = true;
        assert!(rel(ruav_energy(&sc, &fleet, &one).unwrap().comp_j, unit) < 1e-12);
        let mut two = one.clone();
        two[5] = true;
        assert!(rel(ruav_energy(&sc, &fleet, &two).unwrap().comp_j, 2.0 * 2.0 * unit) < 1e-12);
    }

    #[test]
    fn objective_and_spread_examples() {
        let mk = |t: f64| LatencyBreakdown { active: true, total_s: t, ..Default::default() };
        assert_eq!(objective_and_spread(&[mk(2.0), mk(2.0)]), (2.0, 0.0));
        assert_eq!(objective_and_spread(&[mk(1.0), mk(3.0)]), (3.0, 1.0));
        assert_eq!(objective_and_spread(&[mk(3.0), mk(1.0)]), (3.0, 1.0));
        let idle = LatencyBreakdown::default();
        assert_eq!(objective_and_spread(&[mk(1.0), idle, mk(3.0)]), (3.0, 1.0));
        assert_eq!(objective_and_spread(&[idle]), (0.0, 0.0));
    }

    #[test]
    fn latency_matches_term_by_term() {
        let sc = generate_scenario(&ExperimentConfig::default(), 8).unwrap();
        let fleet = sc.suavs.clone();
        let beta = vec![true, false, true, false, false, true, false, false];
        let q = Position3D::new(420.0, 610.0, 350.0);
        let lat = total_latency(&sc, &fleet, &beta, &q).unwrap();
        let c = &sc.constants;
        for (n, s) in fleet.iter().enumerate() {
            // Independent recomputation.
            let d2 = (s.current_pos.x - q.x).powi(2) + (s.current_pos.y - q.y).powi(2) + (s.current_pos.h - q.h).powi(2);
            let g = c.rho0 / d2;
            let r = c.bandwidth_hz * (1.0 + s.tx_power_w * g / c.noise_w).log2();
            let expected = if beta[n] {
                s.chunk_bits / r + s.chunk_bits * c.f0_cycles_per_bit / (sc.ruav.cpu_hz / 3.0)
            } else {
                s.chunk_bits * c.f0_cycles_per_bit / s.cpu_hz + s.compress_ratio * s.chunk_bits / r
            };
            assert!(rel(lat[n].total_s, expected) < 1e-12);
        }
        let all_local = total_latency(&sc, &fleet, &[false; 8], &q).unwrap();
        assert!(all_local.iter().all(|l| l.offload_tx_s == 0.0 && l.ruav_compute_s == 0.0));
        let idle: Vec<SUav> = fleet.iter().map(|s| SUav { chunk_bits: 0.0, ..s.clone() }).collect();
        assert!(total_latency(&sc, &idle, &beta, &q).unwrap().iter().all(|l| l.total_s == 0.0));
    }

    #[test]
    fn cap_is_enforced() {
        let sc = generate_scenario(&ExperimentConfig::default(), 8).unwrap();
        let err = total_latency(&sc, &sc.suavs, &[true; 8], &Q).unwrap_err();
        assert!(matches!(err, Error::InvalidDecision(_)));
    }

    #[test]
    fn doubling_chunks_doubles_latency() {
        let sc = generate_scenario(&ExperimentConfig::default(), 8).unwrap();
        let beta = vec![true, true, false, false, true, false, false, true];
        let double: Vec<SUav> = sc.suavs.iter().map(|s| SUav { chunk_bits: 2.0 * s.chunk_bits, ..s.clone() }).collect();
        let a = total_latency(&sc, &sc.suavs, &beta, &Q).unwrap();
        let b = total_latency(&sc, &double, &beta, &Q).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(rel(y.total_s, 2.0 * x.total_s) < 1e-12);
            assert!(x.local_compute_s * 2.0 == y.local_compute_s);
        }
        let e = evaluate(&sc, &sc.suavs, &beta, &Q).unwrap();
        for en in &e.suav_energies {
            assert!((en.total_j - (en.comm_j + en.comp_j + en.hover_j)).abs() < 1e-15);
            assert!(en.comm_j >= 0.0 && en.comp_j >= 0.0);
        }
    }
}
