//! Offloading decision for a fixed relay position and association.
//!
//! The relay compute time of an offloader grows with the number of
//! offloaders, which makes the latency bilinear in the decision. Writing
//! `xi_n = beta_n * sum(beta)` and bounding it by
//!
//! ```text
//! 0 <= xi_n <= N0 beta_n,   xi_n <= sum(beta),   xi_n >= sum(beta) - N0 (1 - beta_n)
//! ```
//!
//! gives an exact linear model at binary points; relaxing `beta` to `[0, 1]`
//! yields an LP whose value lower-bounds the binary optimum. The binary
//! decision itself is recovered by enumeration (or greedily past
//! [`ENUMERATION_MAX_SUAVS`]).

use crate::cost::{check_energy, local_path_latency, max_latency, offload_path_latency, suav_energy};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpOutcome, Sense};
use crate::scenario::{Position3D, SUav, Scenario};

pub const ENUMERATION_MAX_SUAVS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct OffloadDecision {
    pub beta: Vec<bool>,
    pub xi: Vec<f64>,
    /// Max latency at this decision, seconds.
    pub slack_s: f64,
    /// Whether the relaxation optimum was fractional.
    pub relaxed: bool,
    pub lp_lower_bound: f64,
}

/// Fractional solution of the relaxed problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedSolution {
    pub beta: Vec<f64>,
    pub xi: Vec<f64>,
    pub slack_s: f64,
}

impl RelaxedSolution {
    pub fn is_binary(&self) -> bool {
        self.beta.iter().all(|&b| b.abs() < 1e-7 || (b - 1.0).abs() < 1e-7)
    }
}

/// Constants of the per-S-UAV latency model at a fixed relay position.
#[derive(Debug, Clone, Copy)]
struct PathTimes {
    /// Local compute plus compressed transmission.
    local_s: f64,
    /// Raw transmission.
    offload_tx_s: f64,
    /// Relay compute per unit of `xi`.
    per_share_s: f64,
    local_energy_j: f64,
    offload_energy_j: f64,
}

fn path_times(scenario: &Scenario, s: &SUav, q_m: &Position3D) -> Result<PathTimes> {
    let c = &scenario.constants;
    let (t_loc, t_tx) = local_path_latency(s, q_m, c)?;
    let (off_tx, per_share) = offload_path_latency(s, q_m, &scenario.ruav, c, 1)?;
    Ok(PathTimes {
        local_s: t_loc + t_tx,
        offload_tx_s: off_tx,
        per_share_s: per_share,
        local_energy_j: suav_energy(s, false, q_m, c)?.total_j,
        offload_energy_j: suav_energy(s, true, q_m, c)?.total_j,
    })
}

/// Relaxed offloading problem over `(beta_0.., xi_0.., s)`.
pub fn build_sp1_lp(scenario: &Scenario, fleet: &[SUav], q_m: &Position3D) -> Result<LinearProgram> {
    let n = fleet.len();
    let n0 = scenario.n0_cap as f64;
    let times = fleet.iter().map(|s| path_times(scenario, s, q_m)).collect::<Result<Vec<_>>>()?;

    for (s, t) in fleet.iter().zip(&times) {
        let budget = s.energy_budget_j * (1.0 + 1e-12);
        if t.local_energy_j > budget && t.offload_energy_j > budget {
            return Err(Error::InfeasibleSubproblem(format!(
                "S-UAV {} exceeds its energy budget both computing locally and offloading",
                s.id
            )));
        }
    }

    let mut names: Vec<String> = (0..n).map(|k| format!("beta{k}")).collect();
    names.extend((0..n).map(|k| format!("xi{k}")));
    names.push("s".into());
    let mut lp = LinearProgram::new(names);
    let (b, x, s_idx) = (0, n, 2 * n);
    lp.objective[s_idx] = 1.0;
    for k in 0..n {
        lp.bounds[b + k] = (0.0, 1.0);
    }
    let row = || vec![0.0; 2 * n + 1];

    for k in 0..n {
        let mut r = row();
        r[x + k] = 1.0;
        r[b + k] = -n0;
        lp.add(format!("xi_cap{k}"), r, Sense::Le, 0.0);
    }
    for k in 0..n {
        let mut r = row();
        r[x + k] = 1.0;
        for j in 0..n {
            r[b + j] -= 1.0;
        }
        lp.add(format!("xi_sum{k}"), r, Sense::Le, 0.0);
    }
    for k in 0..n {
        let mut r = row();
        r[x + k] = 1.0;
        for j in 0..n {
            r[b + j] -= 1.0;
        }
        r[b + k] -= n0;
        lp.add(format!("xi_floor{k}"), r, Sense::Ge, -n0);
    }
    for (k, t) in times.iter().enumerate() {
        // s >= (1 - beta) local + beta offload_tx + xi per_share
        let mut r = row();
        r[s_idx] = 1.0;
        r[b + k] = t.local_s - t.offload_tx_s;
        r[x + k] = -t.per_share_s;
        lp.add(format!("latency{k}"), r, Sense::Ge, t.local_s);
    }
    {
        let c = &scenario.constants;
        let f = scenario.ruav.cpu_hz;
        let mut r = row();
        for (k, s) in fleet.iter().enumerate() {
            r[x + k] = f * f * c.zeta * c.f0_cycles_per_bit * s.chunk_bits;
        }
        lp.add("relay_energy", r, Sense::Le, scenario.ruav.energy_budget_j - scenario.ruav.hover_energy_j);
    }
    {
        let mut r = row();
        for k in 0..n {
            r[b + k] = 1.0;
        }
        lp.add("relay_cap", r, Sense::Le, n0);
    }
    for (k, (s, t)) in fleet.iter().zip(&times).enumerate() {
        let mut r = row();
        r[b + k] = t.offload_energy_j - t.local_energy_j;
        lp.add(format!("energy{k}"), r, Sense::Le, s.energy_budget_j - t.local_energy_j);
    }
    Ok(lp)
}

pub fn solve_relaxation(scenario: &Scenario, fleet: &[SUav], q_m: &Position3D) -> Result<RelaxedSolution> {
    let lp = build_sp1_lp(scenario, fleet, q_m)?;
    let n = fleet.len();
    match solve_lp(&lp)? {
        LpOutcome::Optimal { x, objective } => Ok(RelaxedSolution {
            beta: x[..n].to_vec(),
            xi: x[n..2 * n].to_vec(),
            slack_s: objective,
        }),
        LpOutcome::Infeasible => Err(Error::InfeasibleSubproblem("offloading relaxation is infeasible (energy or relay cap)".into())),
        LpOutcome::Unbounded => Err(Error::NumericalFailure("offloading relaxation reported unbounded".into())),
    }
}

fn xi_of(beta: &[bool]) -> Vec<f64> {
    let k = beta.iter().filter(|&&b| b).count() as f64;
    beta.iter().map(|&b| if b { k } else { 0.0 }).collect()
}

/// Objective of a binary decision, or `None` when it violates an energy limit.
fn score(scenario: &Scenario, fleet: &[SUav], beta: &[bool], q_m: &Position3D) -> Result<Option<f64>> {
    match check_energy(scenario, fleet, beta, q_m) {
        Ok(()) => Ok(Some(max_latency(scenario, fleet, beta, q_m)?)),
        Err(Error::InfeasibleSubproblem(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn better(obj: f64, beta: &[bool], best: &Option<(f64, Vec<bool>)>) -> bool {
    match best {
        None => true,
        Some((b_obj, b_beta)) => {
            let tol = 1e-12 * b_obj.abs().max(1.0);
            obj < b_obj - tol || (obj <= b_obj + tol && beta < b_beta.as_slice())
        }
    }
}

/// Exact binary optimum over every decision with at most `N0` offloaders.
/// Ties go to the lexicographically smallest decision (`false < true`).
pub fn enumerate_offload(scenario: &Scenario, fleet: &[SUav], q_m: &Position3D) -> Result<OffloadDecision> {
    let n = fleet.len();
    if n > ENUMERATION_MAX_SUAVS {
        return Err(Error::CapExceeded { size: n, cap: ENUMERATION_MAX_SUAVS });
    }
    let mut best: Option<(f64, Vec<bool>)> = None;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize > scenario.n0_cap {
            continue;
        }
        let beta: Vec<bool> = (0..n).map(|k| mask & (1 << k) != 0).collect();
        if let Some(obj) = score(scenario, fleet, &beta, q_m)? {
            if better(obj, &beta, &best) {
                best = Some((obj, beta));
            }
        }
    }
    let (slack_s, beta) = best.ok_or_else(|| Error::InfeasibleSubproblem("no binary offloading decision meets the energy limits".into()))?;
    Ok(OffloadDecision { xi: xi_of(&beta), beta, slack_s, relaxed: false, lp_lower_bound: f64::NEG_INFINITY })
}

/// Number of decisions [`enumerate_offload`] visits.
pub fn enumeration_size(n: usize, n0: usize) -> usize {
    (0..=n0.min(n)).map(|j| binomial(n, j)).sum()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Recovers a binary decision from the relaxation: exact enumeration for
/// small fleets, otherwise greedy rounding in decreasing order of the
/// fractional values.
pub fn round_offload(
    fractional: &RelaxedSolution,
    scenario: &Scenario,
    fleet: &[SUav],
    q_m: &Position3D,
) -> Result<OffloadDecision> {
    let relaxed = !fractional.is_binary();
    let mut out = if fleet.len() <= ENUMERATION_MAX_SUAVS {
        enumerate_offload(scenario, fleet, q_m)?
    } else {
        greedy_round(fractional, scenario, fleet, q_m)?
    };
    out.relaxed = relaxed;
    out.lp_lower_bound = fractional.slack_s;
    Ok(out)
}

pub fn greedy_round(
    fractional: &RelaxedSolution,
    scenario: &Scenario,
    fleet: &[SUav],
    q_m: &Position3D,
) -> Result<OffloadDecision> {
    let n = fleet.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fractional.beta[b].total_cmp(&fractional.beta[a]).then(a.cmp(&b)));
    let mut beta = vec![false; n];
    let mut current = score(scenario, fleet, &beta, q_m)?;
    for k in order {
        if beta.iter().filter(|&&b| b).count() >= scenario.n0_cap {
            break;
        }
        beta[k] = true;
        match (score(scenario, fleet, &beta, q_m)?, current) {
            (Some(obj), None) => current = Some(obj),
            (Some(obj), Some(cur)) if obj < cur => current = Some(obj),
            _ => beta[k] = false,
        }
    }
    let slack_s = current.ok_or_else(|| Error::InfeasibleSubproblem("greedy rounding found no energy-feasible decision".into()))?;
    Ok(OffloadDecision { xi: xi_of(&beta), beta, slack_s, relaxed: true, lp_lower_bound: fractional.slack_s })
}

/// Relaxation for the lower bound, then binary recovery.
pub fn solve_offload(scenario: &Scenario, fleet: &[SUav], q_m: &Position3D) -> Result<OffloadDecision> {
    let relaxed = solve_relaxation(scenario, fleet, q_m)?;
    round_offload(&relaxed, scenario, fleet, q_m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::cost::total_latency;
    use crate::scenario::generate_scenario;

    fn scenario(seed: u64) -> Scenario {
        generate_scenario(&ExperimentConfig::default(), seed).unwrap()
    }

    const Q: Position3D = Position3D::new(500.0, 500.0, 400.0);

    #[test]
    fn two_suav_lp_shape() {
        let cfg = ExperimentConfig { n_suavs: 2, n_targets: 4, n0_cap: 2, ..ExperimentConfig::default() };
        let sc = generate_scenario(&cfg, 1).unwrap();
        let lp = build_sp1_lp(&sc, &sc.suavs, &Q).unwrap();
        assert_eq!(lp.n_vars(), 5);
        assert_eq!(lp.constraints.len(), 12);
    }

    #[test]
    fn linearized_latency_equals_direct_at_binary_points() {
        let sc = scenario(3);
        let lp = build_sp1_lp(&sc, &sc.suavs, &Q).unwrap();
        let n = sc.n_suavs();
        let beta = vec![true, false, false, true, false, true, false, false];
        let xi = xi_of(&beta);
        let direct = total_latency(&sc, &sc.suavs, &beta, &Q).unwrap();
        for k in 0..n {
            let row = &lp.constraints.iter().find(|c| c.name == format!("latency{k}")).unwrap();
            // row: s + beta (L - O) - xi C >= L  =>  T_hat = L - beta (L - O) + xi C
            let t_hat = row.rhs - (if beta[k] { row.coeffs[k] } else { 0.0 }) - xi[k] * row.coeffs[n + k];
            assert!(((t_hat - direct[k].total_s) / direct[k].total_s).abs() < 1e-12);
        }
    }

    #[test]
    fn idle_fleet_has_zero_slack() {
        let sc = scenario(2);
        let idle: Vec<SUav> = sc.suavs.iter().map(|s| SUav { chunk_bits: 0.0, ..s.clone() }).collect();
        let r = solve_relaxation(&sc, &idle, &Q).unwrap();
        assert!(r.slack_s.abs() < 1e-9);
        let d = enumerate_offload(&sc, &idle, &Q).unwrap();
        assert_eq!(d.slack_s, 0.0);
        assert!(d.beta.iter().all(|&b| !b));
    }

    #[test]
    fn relaxation_bounds_enumeration() {
        for seed in 0..5 {
            let sc = scenario(seed);
            let d = solve_offload(&sc, &sc.suavs, &Q).unwrap();
            assert!(d.lp_lower_bound <= d.slack_s + 1e-6, "{} > {}", d.lp_lower_bound, d.slack_s);
            assert!(d.beta.iter().filter(|&&b| b).count() <= sc.n0_cap);
        }
    }

    #[test]
    fn enumeration_visits_binomial_sum() {
        assert_eq!(enumeration_size(8, 4), 163);
        assert_eq!(enumeration_size(3, 3), 8);
    }

    #[test]
    fn single_suav_offloads_when_faster() {
        let cfg = ExperimentConfig { n_suavs: 1, n_targets: 1, n0_cap: 1, ..ExperimentConfig::default() };
        let sc = generate_scenario(&cfg, 0).unwrap();
        let d = enumerate_offload(&sc, &sc.suavs, &Q).unwrap();
        assert_eq!(d.beta, vec![true]);
        assert_eq!(d.xi, vec![1.0]);
    }

    #[test]
    fn fast_relay_offloads_largest_local_times() {
        let mut sc = scenario(6);
        sc.ruav.cpu_hz = 1e13;
        sc.ruav.energy_budget_j = 1e12;
        let d = enumerate_offload(&sc, &sc.suavs, &Q).unwrap();
        assert_eq!(d.beta.iter().filter(|&&b| b).count(), sc.n0_cap);
        let local = |s: &SUav| {
            let (a, b) = local_path_latency(s, &Q, &sc.constants).unwrap();
            a + b
        };
        let mut locals: Vec<(f64, bool)> = sc.suavs.iter().zip(&d.beta).map(|(s, &b)| (local(s), b)).collect();
        locals.sort_by(|a, b| b.0.total_cmp(&a.0));
        assert!(locals[..sc.n0_cap].iter().all(|&(_, b)| b));
    }

    #[test]
    fn greedy_never_beats_enumeration() {
        for seed in 0..6 {
            let sc = scenario(seed);
            let relaxed = solve_relaxation(&sc, &sc.suavs, &Q).unwrap();
            let g = greedy_round(&relaxed, &sc, &sc.suavs, &Q).unwrap();
            let e = enumerate_offload(&sc, &sc.suavs, &Q).unwrap();
            assert!(g.slack_s >= e.slack_s - 1e-12);
        }
    }

    #[test]
    fn binary_fractional_is_kept() {
        let sc = scenario(4);
        let beta = vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let frac = RelaxedSolution { beta, xi: vec![0.0; 8], slack_s: 0.0 };
        assert!(frac.is_binary());
        let d = round_offload(&frac, &sc, &sc.suavs, &Q).unwrap();
        assert!(!d.relaxed);
    }

    #[test]
    fn energy_infeasibility_detected() {
        let mut sc = scenario(1);
        for s in sc.suavs.iter_mut() {
            s.energy_budget_j = 1e-9;
        }
        assert!(matches!(build_sp1_lp(&sc, &sc.suavs, &Q), Err(Error::InfeasibleSubproblem(_))));
        assert!(matches!(enumerate_offload(&sc, &sc.suavs, &Q), Err(Error::InfeasibleSubproblem(_))));
    }

    #[test]
    fn too_many_suavs_for_enumeration() {
        let cfg = ExperimentConfig { n_suavs: 21, n_targets: 21, ..ExperimentConfig::default() };
        let sc = generate_scenario(&cfg, 0).unwrap();
        assert!(matches!(enumerate_offload(&sc, &sc.suavs, &Q), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn decisions_are_deterministic() {
        let sc = scenario(9);
        assert_eq!(solve_offload(&sc, &sc.suavs, &Q).unwrap(), solve_offload(&sc, &sc.suavs, &Q).unwrap());
    }
}
