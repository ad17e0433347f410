//! Relay placement for a fixed offloading decision and association.
//!
//! Each S-UAV's transmission time is `c_n / R_n(q_M)`, so with a common rate
//! slack `lambda` the surrogate objective `max_n (c_n / lambda + d_n)` only
//! improves as `lambda` grows. Around a reference point the rate is bounded
//! below by a concave quadratic in `q_M`, which turns "every bound reaches
//! `lambda`" into a ball intersection. One convexified step maximizes
//! `lambda` by bisection; the successive convex approximation loop then
//! re-expands the bound at the new point.

use std::io::Write;

use crate::cost::{local_path_latency, max_latency, offload_path_latency};
use crate::error::{Error, Result};
use crate::link::{max_rate, snr_coeff, TaylorCoeffs};
use crate::scenario::{Position3D, SUav, Scenario};

pub const BISECTION_REL_TOL: f64 = 1e-4;
pub const SUBGRADIENT_ITERS: usize = 500;
pub const SCA_TOL_S: f64 = 1e-4;
pub const SCA_MAX_ITERS: usize = 50;
const BISECTION_MAX_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementIterate {
    pub q_m: Position3D,
    /// Common rate slack, bits/s.
    pub lambda_m: f64,
    /// Surrogate max latency `max_n (c_n / lambda + d_n)`, seconds.
    pub slack_s: f64,
    pub iteration: usize,
}

/// Outcome of the SCA loop.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementResult {
    pub best: PlacementIterate,
    /// Iterate 0 is the starting point with exact rates.
    pub trace: Vec<PlacementIterate>,
    /// Max latency at `best.q_m` with exact rates.
    pub true_objective_s: f64,
    pub converged: bool,
    /// Set when an inner solve failed and the last good iterate was kept.
    pub warning: Option<String>,
}

#[derive(Debug, Clone)]
struct Row {
    q_n: Position3D,
    coeffs: TaylorCoeffs,
    /// Bits sent to the relay.
    c: f64,
    /// Compute time, seconds.
    d: f64,
}

/// Convexified placement problem around `q_ref`; only S-UAVs with a chunk
/// constrain the slack.
#[derive(Debug, Clone)]
pub struct Sp2Model {
    rows: Vec<Row>,
    lo: Position3D,
    hi: Position3D,
    q_ref: Position3D,
    /// Smallest slack the energy limits allow.
    pub lambda_floor: f64,
    /// Slack returned when no S-UAV transmits.
    idle_lambda: f64,
}

impl Sp2Model {
    pub fn new(scenario: &Scenario, fleet: &[SUav], beta: &[bool], q_ref: &Position3D) -> Result<Self> {
        if beta.len() != fleet.len() {
            return Err(Error::InvalidDecision(format!("offloading vector has {} entries for {} S-UAVs", beta.len(), fleet.len())));
        }
        let c = &scenario.constants;
        let mu_of = |s: &SUav, b: bool| if b { 1.0 } else { s.compress_ratio };
        let n_off = beta.iter().filter(|&&b| b).count();
        let mut rows = Vec::new();
        let mut lambda_floor: f64 = 0.0;
        for (s, &b) in fleet.iter().zip(beta) {
            if !s.is_active() {
                continue;
            }
            let snr = snr_coeff(s.tx_power_w, c.rho0, c.noise_w);
            let coeffs = TaylorCoeffs::at(&s.current_pos, q_ref, c, snr)?;
            let bits = mu_of(s, b) * s.chunk_bits;
            let (d, comp_j) = if b {
                (offload_path_latency(s, q_ref, &scenario.ruav, c, n_off)?.1, 0.0)
            } else {
                let comp_j = s.cpu_hz * s.cpu_hz * c.zeta * s.chunk_bits * c.f0_cycles_per_bit;
                (local_path_latency(s, q_ref, c)?.0, comp_j)
            };
            let room = s.energy_budget_j - s.hover_energy_j - comp_j;
            if room <= 0.0 {
                return Err(Error::InfeasibleSubproblem(format!(
                    "S-UAV {} has no energy left for transmission ({room:.3e} J)",
                    s.id
                )));
            }
            lambda_floor = lambda_floor.max(s.tx_power_w * bits / room);
            rows.push(Row { q_n: s.current_pos, coeffs, c: bits, d });
        }
        let idle_lambda = fleet
            .iter()
            .map(|s| max_rate(c, snr_coeff(s.tx_power_w, c.rho0, c.noise_w)))
            .fold(0.0, f64::max);
        Ok(Self { rows, lo: scenario.ruav.box_lo, hi: scenario.ruav.box_hi, q_ref: *q_ref, lambda_floor, idle_lambda })
    }

    /// `min_n R_hat_n(q)`.
    pub fn min_bound(&self, q: &Position3D) -> f64 {
        self.rows
            .iter()
            .map(|r| r.coeffs.eval_dist_sq(r.q_n.dist_sq(q)))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn surrogate(&self, lambda: f64) -> f64 {
        self.rows.iter().map(|r| r.c / lambda + r.d).fold(0.0, f64::max)
    }

    /// Searches the box for a point where every bound reaches `lambda`.
    pub fn feasibility_check(&self, lambda: f64, start: &Position3D) -> (bool, Position3D) {
        let start = start.clamp(&self.lo, &self.hi);
        let rho: Vec<f64> = self.rows.iter().map(|r| r.coeffs.radius_sq_for(lambda)).collect();
        if rho.iter().any(|&r| r < 0.0) {
            return (false, start);
        }
        for (r, &rho_n) in self.rows.iter().zip(&rho) {
            if r.q_n.clamp(&self.lo, &self.hi).dist_sq(&r.q_n) > rho_n {
                return (false, start);
            }
        }
        for a in 0..rho.len() {
            for b in a + 1..rho.len() {
                if self.rows[a].q_n.dist(&self.rows[b].q_n) > rho[a].sqrt() + rho[b].sqrt() {
                    return (false, start);
                }
            }
        }
        let scale = rho.iter().copied().fold(1.0, f64::max);
        let target = -1e-9 * scale;
        let mut q = start;
        for _ in 0..SUBGRADIENT_ITERS {
            let (k, g) = self
                .rows
                .iter()
                .zip(&rho)
                .map(|(r, &rho_n)| r.q_n.dist_sq(&q) - rho_n)
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (k, g)| if g > acc.1 { (k, g) } else { acc });
            if g <= 0.0 {
                return (true, q);
            }
            let qn = self.rows[k].q_n;
            let grad = [2.0 * (q.x - qn.x), 2.0 * (q.y - qn.y), 2.0 * (q.h - qn.h)];
            let norm_sq = grad.iter().map(|v| v * v).sum::<f64>();
            if norm_sq == 0.0 {
                break;
            }
            let step = (g - target) / norm_sq;
            q = Position3D::new(q.x - step * grad[0], q.y - step * grad[1], q.h - step * grad[2]).clamp(&self.lo, &self.hi);
        }
        (false, q)
    }

    /// Largest slack reachable in the box, with the witness position.
    pub fn solve(&self) -> Result<PlacementIterate> {
        if self.rows.is_empty() {
            return Ok(PlacementIterate { q_m: self.q_ref, lambda_m: self.idle_lambda, slack_s: 0.0, iteration: 0 });
        }
        let mut witness = self.q_ref.clamp(&self.lo, &self.hi);
        let mut lo = self.min_bound(&witness);
        let mut hi = self
            .rows
            .iter()
            .map(|r| r.coeffs.eval_dist_sq(0.0))
            .fold(f64::INFINITY, f64::min);
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::NumericalFailure("non-finite rate bound in placement".into()));
        }
        if lo <= 0.0 {
            // The reference point itself need not be feasible for a positive
            // slack; fall back to a tiny positive lower end.
            let tiny = 1e-9 * hi;
            let (ok, w) = self.feasibility_check(tiny, &witness);
            if !ok {
                return Err(Error::NumericalFailure("no positive rate slack found in the relay box".into()));
            }
            lo = tiny;
            witness = w;
        }
        let mut steps = 0;
        while hi - lo > BISECTION_REL_TOL * lo && steps < BISECTION_MAX_STEPS {
            let mid = 0.5 * (lo + hi);
            let (ok, w) = self.feasibility_check(mid, &witness);
            if ok {
                lo = mid;
                witness = w;
            } else {
                hi = mid;
            }
            steps += 1;
        }
        let lambda = self.min_bound(&witness);
        if lambda < self.lambda_floor * (1.0 - 1e-12) {
            return Err(Error::InfeasibleSubproblem(format!(
                "best reachable rate {lambda:.6e} bit/s is below the energy floor {:.6e} bit/s",
                self.lambda_floor
            )));
        }
        Ok(PlacementIterate { q_m: witness, lambda_m: lambda, slack_s: self.surrogate(lambda), iteration: 0 })
    }
}

/// One convexified step around `q_ref`.
pub fn solve_sp2_2(scenario: &Scenario, fleet: &[SUav], beta: &[bool], q_ref: &Position3D) -> Result<PlacementIterate> {
    Sp2Model::new(scenario, fleet, beta, q_ref)?.solve()
}

pub fn feasibility_check(
    lambda: f64,
    scenario: &Scenario,
    fleet: &[SUav],
    beta: &[bool],
    q_ref: &Position3D,
) -> Result<(bool, Position3D)> {
    Ok(Sp2Model::new(scenario, fleet, beta, q_ref)?.feasibility_check(lambda, q_ref))
}

/// Fleet centroid at mid-box altitude, clamped to the box.
pub fn default_initial_position(scenario: &Scenario, fleet: &[SUav]) -> Position3D {
    let n = fleet.len().max(1) as f64;
    let x = fleet.iter().map(|s| s.current_pos.x).sum::<f64>() / n;
    let y = fleet.iter().map(|s| s.current_pos.y).sum::<f64>() / n;
    let (lo, hi) = (scenario.ruav.box_lo, scenario.ruav.box_hi);
    Position3D::new(x, y, 0.5 * (lo.h + hi.h)).clamp(&lo, &hi)
}

/// Successive convex approximation from `q_init`.
pub fn sca_loop(scenario: &Scenario, fleet: &[SUav], beta: &[bool], q_init: &Position3D) -> Result<PlacementResult> {
    let q0 = q_init.clamp(&scenario.ruav.box_lo, &scenario.ruav.box_hi);
    let model = Sp2Model::new(scenario, fleet, beta, &q0)?;
    let lambda0 = if model.rows.is_empty() { model.idle_lambda } else { model.min_bound(&q0) };
    let start = PlacementIterate { q_m: q0, lambda_m: lambda0, slack_s: model.surrogate(lambda0), iteration: 0 };
    let mut trace = vec![start];
    let mut best = start;
    let mut converged = false;
    let mut warning = None;
    for r in 1..=SCA_MAX_ITERS {
        let next = match solve_sp2_2(scenario, fleet, beta, &best.q_m) {
            Ok(it) => it,
            Err(e @ Error::InfeasibleSubproblem(_)) if r == 1 => return Err(e),
            Err(e) => {
                warning = Some(format!("placement stopped at iteration {r}: {e}"));
                break;
            }
        };
        if next.slack_s > best.slack_s {
            converged = true;
            break;
        }
        let step = (best.slack_s - next.slack_s).abs();
        best = PlacementIterate { iteration: r, ..next };
        trace.push(best);
        if step < SCA_TOL_S {
            converged = true;
            break;
        }
    }
    let true_objective_s = max_latency(scenario, fleet, beta, &best.q_m)?;
    Ok(PlacementResult { best, trace, true_objective_s, converged, warning })
}

/// Writes `iteration,lambda_bps,slack_s,x,y,h` rows.
pub fn write_trace<W: Write>(trace: &[PlacementIterate], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "iteration,lambda_bps,slack_s,x,y,h")?;
    for it in trace {
        writeln!(out, "{},{:?},{:?},{:?},{:?},{:?}", it.iteration, it.lambda_m, it.slack_s, it.q_m.x, it.q_m.y, it.q_m.h)?;
    }
    Ok(())
}

/// Exact max latency minimized over a grid that is refined around the best
/// cell; valid because each S-UAV's latency grows with its distance to the
/// relay, which makes the max quasiconvex in the relay position.
pub fn grid_search_placement(
    scenario: &Scenario,
    fleet: &[SUav],
    beta: &[bool],
    coarse_step: f64,
    fine_step: f64,
) -> Result<(Position3D, f64)> {
    let (lo, hi) = (scenario.ruav.box_lo, scenario.ruav.box_hi);
    let eval = |q: &Position3D| max_latency(scenario, fleet, beta, q).unwrap_or(f64::INFINITY);
    let axis = |a: f64, b: f64, step: f64| {
        let n = ((b - a) / step).round().max(0.0) as usize;
        (0..=n).map(move |k| (a + k as f64 * step).min(b))
    };
    let scan = |lo: Position3D, hi: Position3D, step: f64, best: &mut (Position3D, f64)| {
        for x in axis(lo.x, hi.x, step) {
            for y in axis(lo.y, hi.y, step) {
                for h in axis(lo.h, hi.h, step) {
                    let q = Position3D::new(x, y, h);
                    let v = eval(&q);
                    if v < best.1 {
                        *best = (q, v);
                    }
                }
            }
        }
    };
    let mut best = (lo, f64::INFINITY);
    scan(lo, hi, coarse_step, &mut best);
    let mut step = coarse_step;
    while step > fine_step {
        let next = (step / 4.0).max(fine_step);
        let c = best.0;
        let wlo = Position3D::new(c.x - step, c.y - step, c.h - step).clamp(&lo, &hi);
        let whi = Position3D::new(c.x + step, c.y + step, c.h + step).clamp(&lo, &hi);
        scan(wlo, whi, next, &mut best);
        step = next;
    }
    if !best.1.is_finite() {
        return Err(Error::NumericalFailure("grid search found no valid relay position".into()));
    }
    Ok(best)
}
