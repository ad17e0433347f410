//! Joint brute force over offloading, association and relay position for
//! small instances; the reference the alternating solver is measured against.

use crate::association::AssignmentRule;
use crate::cost::{check_energy, max_latency};
use crate::error::{Error, Result};
use crate::link::{max_rate, snr_coeff};
use crate::scenario::{feasible_association_mask, Association, Mobility, Position3D, SUav, Scenario};

/// Largest number of (association, offloading) pairs the oracle accepts.
pub const ORACLE_PAIR_CAP: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub rule: AssignmentRule,
    /// First relay grid step, meters.
    pub coarse_step_m: f64,
    /// Final relay grid step, meters.
    pub fine_step_m: f64,
    /// Number of coarse cells refined per pair.
    pub refine_candidates: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { rule: AssignmentRule::AtLeastOne, coarse_step_m: 25.0, fine_step_m: 0.01, refine_candidates: 4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub objective_s: f64,
    pub association: Association,
    pub beta: Vec<bool>,
    pub q_m: Position3D,
    /// Pairs whose relay position was searched.
    pub pairs_searched: usize,
    pub pairs_total: usize,
}

fn all_associations(scenario: &Scenario, rule: AssignmentRule) -> Result<Vec<Association>> {
    let mask = feasible_association_mask(scenario)?;
    let n = scenario.n_suavs();
    let options: Vec<Vec<Vec<bool>>> = mask
        .iter()
        .map(|row| {
            let cover: Vec<usize> = (0..n).filter(|&k| row[k]).collect();
            (1u32..(1 << cover.len()))
                .filter(|m| rule == AssignmentRule::AtLeastOne || m.count_ones() == 1)
                .map(|m| {
                    let mut r = vec![false; n];
                    for (j, &k) in cover.iter().enumerate() {
                        r[k] = m & (1 << j) != 0;
                    }
                    r
                })
                .collect()
        })
        .collect();
    let total: usize = options.iter().map(Vec::len).product();
    if total > ORACLE_PAIR_CAP {
        return Err(Error::CapExceeded { size: total, cap: ORACLE_PAIR_CAP });
    }
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; options.len()];
    loop {
        let alpha = idx.iter().zip(&options).map(|(&k, o)| o[k].clone()).collect();
        out.push(Association { alpha, feasible_mask: mask.clone() });
        let mut d = 0;
        loop {
            if d == idx.len() {
                return Ok(out);
            }
            idx[d] += 1;
            if idx[d] < options[d].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Latency no relay position can beat: compute time plus transmission at
/// the largest admissible rate.
fn position_free_bound(scenario: &Scenario, fleet: &[SUav], beta: &[bool]) -> f64 {
    let c = &scenario.constants;
    let k = beta.iter().filter(|&&b| b).count() as f64;
    fleet
        .iter()
        .zip(beta)
        .filter(|(s, _)| s.is_active())
        .map(|(s, &b)| {
            let r = max_rate(c, snr_coeff(s.tx_power_w, c.rho0, c.noise_w));
            if b {
                s.chunk_bits / r + k * s.chunk_bits * c.f0_cycles_per_bit / scenario.ruav.cpu_hz
            } else {
                s.chunk_bits * c.f0_cycles_per_bit / s.cpu_hz + s.compress_ratio * s.chunk_bits / r
            }
        })
        .fold(0.0, f64::max)
}

fn value(scenario: &Scenario, fleet: &[SUav], beta: &[bool], q: &Position3D) -> f64 {
    if check_energy(scenario, fleet, beta, q).is_err() {
        return f64::INFINITY;
    }
    max_latency(scenario, fleet, beta, q).unwrap_or(f64::INFINITY)
}

fn axis(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step).ceil().max(0.0) as usize;
    (0..=n).map(|k| (a + k as f64 * step).min(b)).collect()
}

/// Best relay position for a fixed pair: full coarse grid, then the best
/// few cells are refined by shrinking windows down to the fine step.
fn best_position(scenario: &Scenario, fleet: &[SUav], beta: &[bool], opts: &OracleOptions) -> (Position3D, f64) {
    let (lo, hi) = (scenario.ruav.box_lo, scenario.ruav.box_hi);
    let mut coarse = Vec::new();
    for x in axis(lo.x, hi.x, opts.coarse_step_m) {
        for y in axis(lo.y, hi.y, opts.coarse_step_m) {
            for h in axis(lo.h, hi.h, opts.coarse_step_m) {
                let q = Position3D::new(x, y, h);
                coarse.push((value(scenario, fleet, beta, &q), q));
            }
        }
    }
    coarse.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = (Position3D::new(lo.x, lo.y, lo.h), f64::INFINITY);
    for &(v0, q0) in coarse.iter().take(opts.refine_candidates.max(1)) {
        let (mut c, mut v) = (q0, v0);
        let mut step = opts.coarse_step_m;
        while step > opts.fine_step_m {
            let next = (step / 4.0).max(opts.fine_step_m);
            let wlo = Position3D::new(c.x - step, c.y - step, c.h - step).clamp(&lo, &hi);
            let whi = Position3D::new(c.x + step, c.y + step, c.h + step).clamp(&lo, &hi);
            let centre = c;
            for x in axis(wlo.x, whi.x, next) {
                for y in axis(wlo.y, whi.y, next) {
                    for h in axis(wlo.h, whi.h, next) {
                        let q = Position3D::new(x, y, h);
                        let w = value(scenario, fleet, beta, &q);
                        if w < v {
                            v = w;
                            c = q;
                        }
                    }
                }
            }
            // Stay at this scale while the best point keeps moving.
            if c.dist(&centre) < 0.5 * step {
                step = next;
            }
        }
        if v < best.1 {
            best = (c, v);
        }
    }
    best
}

/// Minimizes the max latency over every offloading decision within the
/// relay cap, every association allowed by `opts.rule` and a refined relay
/// grid. Meant for a handful of S-UAVs and targets.
pub fn joint_bruteforce(scenario: &Scenario, mobility: Mobility, opts: &OracleOptions) -> Result<OracleResult> {
    let n = scenario.n_suavs();
    if n > 12 {
        return Err(Error::CapExceeded { size: n, cap: 12 });
    }
    let assocs = all_associations(scenario, opts.rule)?;
    let betas: Vec<Vec<bool>> = (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize <= scenario.n0_cap)
        .map(|m| (0..n).map(|k| m & (1 << k) != 0).collect())
        .collect();
    let pairs_total = assocs.len() * betas.len();
    if pairs_total > ORACLE_PAIR_CAP {
        return Err(Error::CapExceeded { size: pairs_total, cap: ORACLE_PAIR_CAP });
    }

    let mut candidates = Vec::with_capacity(pairs_total);
    for (a, assoc) in assocs.iter().enumerate() {
        let fleet = scenario.deploy(&assoc.alpha, mobility);
        for (b, beta) in betas.iter().enumerate() {
            candidates.push((position_free_bound(scenario, &fleet, beta), a, b));
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut best: Option<(f64, usize, usize, Position3D)> = None;
    let mut pairs_searched = 0;
    for &(lb, a, b) in &candidates {
        if best.as_ref().is_some_and(|bst| lb >= bst.0) {
            break;
        }
        pairs_searched += 1;
        let fleet = scenario.deploy(&assocs[a].alpha, mobility);
        let (q, v) = best_position(scenario, &fleet, &betas[b], opts);
        if best.as_ref().is_none_or(|bst| v < bst.0) {
            best = Some((v, a, b, q));
        }
    }
    match best {
        Some((v, a, b, q)) if v.is_finite() => Ok(OracleResult {
            objective_s: v,
            association: assocs[a].clone(),
            beta: betas[b].clone(),
            q_m: q,
            pairs_searched,
            pairs_total,
        }),
        _ => Err(Error::InfeasibleSubproblem("no joint decision meets the energy limits".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::scenario::generate_scenario;

    fn small(seed: u64) -> Scenario {
        let cfg = ExperimentConfig { n_suavs: 2, n_targets: 3, n0_cap: 2, ..ExperimentConfig::default() };
        generate_scenario(&cfg, seed).unwrap()
    }

    #[test]
    fn oracle_beats_every_sampled_decision() {
        let sc = small(3);
        let opts = OracleOptions { coarse_step_m: 50.0, ..OracleOptions::default() };
        let r = joint_bruteforce(&sc, Mobility::Adaptive, &opts).unwrap();
        let fleet = sc.deploy(&r.association.alpha, Mobility::Adaptive);
        assert!((max_latency(&sc, &fleet, &r.beta, &r.q_m).unwrap() - r.objective_s).abs() < 1e-12);
        for assoc in all_associations(&sc, AssignmentRule::AtLeastOne).unwrap() {
            let fleet = sc.deploy(&assoc.alpha, Mobility::Adaptive);
            for m in 0..4u32 {
                let beta = vec![m & 1 != 0, m & 2 != 0];
                for q in [sc.ruav.box_center(), sc.ruav.box_lo, Position3D::new(300.0, 700.0, 150.0)] {
                    assert!(r.objective_s <= value(&sc, &fleet, &beta, &q) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn bound_never_exceeds_value() {
        let sc = small(5);
        for assoc in all_associations(&sc, AssignmentRule::AtLeastOne).unwrap() {
            let fleet = sc.deploy(&assoc.alpha, Mobility::Adaptive);
            let beta = vec![true, false];
            let lb = position_free_bound(&sc, &fleet, &beta);
            assert!(lb <= value(&sc, &fleet, &beta, &sc.ruav.box_center()));
        }
    }

    #[test]
    fn association_counts() {
        let sc = small(1);
        let mask = feasible_association_mask(&sc).unwrap();
        let one: usize = mask.iter().map(|r| r.iter().filter(|&&m| m).count()).product();
        let any: usize = mask.iter().map(|r| (1usize << r.iter().filter(|&&m| m).count()) - 1).product();
        assert_eq!(all_associations(&sc, AssignmentRule::ExactlyOne).unwrap().len(), one);
        assert_eq!(all_associations(&sc, AssignmentRule::AtLeastOne).unwrap().len(), any);
    }
}
