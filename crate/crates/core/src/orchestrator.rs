//! Alternating optimization over the offloading decision, the relay position
//! and the association, plus the three reference schemes.
//!
//! Every block update is kept only when the exact max latency does not grow,
//! so the recorded objective never increases.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::association::{solve_association, SearchBudget};
use crate::cost::{check_energy, evaluate, local_path_latency, max_latency, Evaluation};
use crate::error::{Error, Result};
use crate::link::MIN_LINK_DISTANCE_M;
use crate::offload::solve_offload;
use crate::placement::{default_initial_position, sca_loop, PlacementIterate};
use crate::scenario::{feasible_association_mask, fov_rect, Association, Mobility, Position3D, SUav, Scenario, Spread};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Proposed,
    SuavOnly,
    RuavOnly,
    StaticSuavs,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Proposed, Scheme::SuavOnly, Scheme::RuavOnly, Scheme::StaticSuavs];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::SuavOnly => "suav_only",
            Scheme::RuavOnly => "ruav_only",
            Scheme::StaticSuavs => "static_suavs",
        }
    }

    pub fn mobility(self) -> Mobility {
        match self {
            Scheme::StaticSuavs => Mobility::Static,
            _ => Mobility::Adaptive,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown scheme `{s}` (expected proposed, suav_only, ruav_only or static_suavs)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once two consecutive objectives differ by less than this, seconds.
    pub tol: f64,
    pub r_max: usize,
    pub budget: SearchBudget,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-3, r_max: 20, budget: SearchBudget::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinalState {
    pub association: Association,
    pub beta: Vec<bool>,
    pub q_m: Position3D,
    /// S-UAV states at the final association.
    pub fleet: Vec<SUav>,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub scheme: Scheme,
    /// Objective after initialization, then after each outer iteration.
    pub objective_trace: Vec<f64>,
    pub final_state: FinalState,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time: Duration,
    /// Relay placement iterates of each outer iteration.
    pub placement_traces: Vec<Vec<PlacementIterate>>,
    /// Whether every association search finished inside its budget.
    pub association_exact: bool,
}

impl SolverReport {
    pub fn objective_s(&self) -> f64 {
        self.final_state.evaluation.objective_s
    }
}

/// True once the last two entries differ by less than `tol`.
pub fn convergence_check(trace: &[f64], tol: f64) -> bool {
    match trace {
        [.., a, b] => (a - b).abs() < tol,
        _ => false,
    }
}

/// Each target goes to the covering S-UAV with the nearest initial point
/// (horizontal distance, ties to the lower index).
pub fn nearest_cover_association(scenario: &Scenario) -> Result<Association> {
    let mask = feasible_association_mask(scenario)?;
    let choice: Vec<usize> = scenario
        .targets
        .iter()
        .zip(&mask)
        .map(|(t, row)| {
            let mut best: Option<(f64, usize)> = None;
            for (k, s) in scenario.suavs.iter().enumerate().filter(|(k, _)| row[*k]) {
                let d = (s.initial_pos.x - t.pos.x).powi(2) + (s.initial_pos.y - t.pos.y).powi(2);
                if best.is_none_or(|(b, _)| d < b) {
                    best = Some((d, k));
                }
            }
            best.expect("mask rows are nonempty").1
        })
        .collect();
    Ok(Association::from_choice(&choice, mask))
}

/// Offloads every S-UAV with a chunk; past the relay cap, the largest local
/// latencies go first (ties to the lower index).
pub fn ruav_only_beta(scenario: &Scenario, fleet: &[SUav], q_m: &Position3D) -> Result<Vec<bool>> {
    let mut active = Vec::new();
    for (k, s) in fleet.iter().enumerate().filter(|(_, s)| s.is_active()) {
        let (comp, tx) = local_path_latency(s, q_m, &scenario.constants)?;
        active.push((comp + tx, k));
    }
    active.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut beta = vec![false; fleet.len()];
    for &(_, k) in active.iter().take(scenario.n0_cap) {
        beta[k] = true;
    }
    Ok(beta)
}

/// Exact objective, or infinity when an energy limit is broken.
fn guarded_objective(scenario: &Scenario, fleet: &[SUav], beta: &[bool], q_m: &Position3D) -> Result<f64> {
    match check_energy(scenario, fleet, beta, q_m) {
        Ok(()) => max_latency(scenario, fleet, beta, q_m),
        Err(Error::InfeasibleSubproblem(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

struct State {
    association: Association,
    fleet: Vec<SUav>,
    beta: Vec<bool>,
    q_m: Position3D,
    objective: f64,
}

fn run_scheme(scenario: &Scenario, scheme: Scheme, opts: &SolverOptions) -> Result<SolverReport> {
    let started = Instant::now();
    scenario.validate()?;
    let mobility = scheme.mobility();
    let association = nearest_cover_association(scenario)?;
    let fleet = scenario.deploy(&association.alpha, mobility);
    let q_m = default_initial_position(scenario, &fleet);
    let beta = match scheme {
        Scheme::RuavOnly => ruav_only_beta(scenario, &fleet, &q_m)?,
        _ => vec![false; fleet.len()],
    };
    let objective = guarded_objective(scenario, &fleet, &beta, &q_m)?;
    let mut st = State { association, fleet, beta, q_m, objective };
    let mut trace = vec![st.objective];
    let mut placement_traces = Vec::new();
    let mut association_exact = true;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..opts.r_max {
        iterations += 1;

        if matches!(scheme, Scheme::Proposed | Scheme::StaticSuavs) {
            let d = solve_offload(scenario, &st.fleet, &st.q_m)?;
            if d.slack_s <= st.objective {
                st.beta = d.beta;
                st.objective = d.slack_s;
            }
        }

        let placed = sca_loop(scenario, &st.fleet, &st.beta, &st.q_m)?;
        let v = guarded_objective(scenario, &st.fleet, &st.beta, &placed.best.q_m)?;
        if v <= st.objective {
            st.q_m = placed.best.q_m;
            st.objective = v;
        }
        placement_traces.push(placed.trace);

        let assoc = solve_association(scenario, &st.beta, &st.q_m, mobility, opts.budget)?;
        association_exact &= assoc.exact;
        let fleet = scenario.deploy(&assoc.association.alpha, mobility);
        let beta = match scheme {
            Scheme::RuavOnly => ruav_only_beta(scenario, &fleet, &st.q_m)?,
            _ => st.beta.clone(),
        };
        let v = guarded_objective(scenario, &fleet, &beta, &st.q_m)?;
        if v <= st.objective {
            st.association = assoc.association;
            st.fleet = fleet;
            st.beta = beta;
            st.objective = v;
        }

        trace.push(st.objective);
        if convergence_check(&trace, opts.tol) {
            converged = true;
            break;
        }
    }

    if !st.objective.is_finite() {
        check_energy(scenario, &st.fleet, &st.beta, &st.q_m)?;
    }
    let evaluation = evaluate(scenario, &st.fleet, &st.beta, &st.q_m)?;
    Ok(SolverReport {
        scheme,
        objective_trace: trace,
        final_state: FinalState { association: st.association, beta: st.beta, q_m: st.q_m, fleet: st.fleet, evaluation },
        iterations,
        converged,
        wall_time: started.elapsed(),
        placement_traces,
        association_exact,
    })
}

/// Alternating optimization of all three blocks.
pub fn run_proposed(scenario: &Scenario, opts: &SolverOptions) -> Result<SolverReport> {
    run_scheme(scenario, Scheme::Proposed, opts)
}

/// One of the reference schemes; `Scheme::Proposed` is also accepted.
pub fn run_baseline(scenario: &Scenario, scheme: Scheme, opts: &SolverOptions) -> Result<SolverReport> {
    run_scheme(scenario, scheme, opts)
}

/// Re-derives every constraint of a reported solution from scratch and
/// returns a description of each violation.
pub fn check_solution(scenario: &Scenario, scheme: Scheme, state: &FinalState) -> Vec<String> {
    let mut out = Vec::new();
    let n = scenario.n_suavs();
    let alpha = &state.association.alpha;
    if alpha.len() != scenario.n_targets() || alpha.iter().any(|r| r.len() != n) {
        out.push("association has the wrong shape".into());
        return out;
    }
    if state.beta.len() != n || state.fleet.len() != n {
        out.push("offloading vector or fleet has the wrong length".into());
        return out;
    }
    let mask = match feasible_association_mask(scenario) {
        Ok(m) => m,
        Err(e) => {
            out.push(e.to_string());
            return out;
        }
    };
    for (i, (row, m)) in alpha.iter().zip(&mask).enumerate() {
        if !row.iter().any(|&a| a) {
            out.push(format!("target {i} is not monitored"));
        }
        for k in 0..n {
            if row[k] && !m[k] {
                out.push(format!("target {i} assigned to S-UAV {k}, which cannot see it from its initial point"));
            }
        }
        let t = &scenario.targets[i];
        if !(0..n).any(|k| row[k] && fov_rect(&state.fleet[k]).contains_strictly(t.pos.x, t.pos.y)) {
            out.push(format!("target {i} is not strictly inside the view of an assigned S-UAV"));
        }
    }
    for k in 0..n {
        let spread = Spread::of(alpha.iter().zip(&scenario.targets).filter(|(r, _)| r[k]).map(|(_, t)| t));
        let expected = scenario.deploy_one(k, &spread, scheme.mobility());
        let s = &state.fleet[k];
        if s.current_pos.dist(&expected.current_pos) > 1e-9 || s.chunk_bits != expected.chunk_bits {
            out.push(format!("S-UAV {k} state does not follow its assigned targets"));
        }
        if scheme.mobility() == Mobility::Static && s.current_pos != s.initial_pos {
            out.push(format!("S-UAV {k} moved although S-UAVs are static"));
        }
        if s.current_pos.dist(&state.q_m) < MIN_LINK_DISTANCE_M {
            out.push(format!("S-UAV {k} is closer than the reference distance to the relay"));
        }
    }
    let k_off = state.beta.iter().filter(|&&b| b).count();
    if k_off > scenario.n0_cap {
        out.push(format!("{k_off} offloaders exceed the relay cap of {}", scenario.n0_cap));
    }
    if scheme == Scheme::SuavOnly && k_off > 0 {
        out.push("an S-UAV offloads under the local-only scheme".into());
    }
    if !state.q_m.within(&scenario.ruav.box_lo, &scenario.ruav.box_hi) {
        out.push("relay position leaves its box".into());
    }
    if let Err(e) = check_energy(scenario, &state.fleet, &state.beta, &state.q_m) {
        out.push(e.to_string());
    }
    match max_latency(scenario, &state.fleet, &state.beta, &state.q_m) {
        Ok(v) if (v - state.evaluation.objective_s).abs() > 1e-9 * v.max(1.0) => {
            out.push(format!("reported objective {} differs from the recomputed {v}", state.evaluation.objective_s));
        }
        Ok(_) => {}
        Err(e) => out.push(e.to_string()),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::scenario::{generate_scenario, Target};

    fn scenario(seed: u64) -> Scenario {
        generate_scenario(&ExperimentConfig::default(), seed).unwrap()
    }

    #[test]
    fn convergence_check_cases() {
        assert!(!convergence_check(&[5.0], 1e-4));
        assert!(convergence_check(&[5.0, 5.0], 1e-4));
        assert!(!convergence_check(&[5.0, 4.0, 3.0], 1e-4));
        assert!(!convergence_check(&[], 1e-4));
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("both".parse::<Scheme>().is_err());
    }

    #[test]
    fn single_pair_converges_quickly() {
        let cfg = ExperimentConfig { n_suavs: 1, n_targets: 1, n0_cap: 1, ..ExperimentConfig::default() };
        let sc = generate_scenario(&cfg, 4).unwrap();
        let r = run_proposed(&sc, &SolverOptions::default()).unwrap();
        assert!(r.iterations <= 2);
        assert_eq!(r.final_state.association.alpha, vec![vec![true]]);
        assert!(check_solution(&sc, Scheme::Proposed, &r.final_state).is_empty());
    }

    #[test]
    fn traces_never_increase_and_solutions_check() {
        for seed in 0..3 {
            let sc = scenario(seed);
            for scheme in Scheme::ALL {
                let r = run_baseline(&sc, scheme, &SolverOptions::default()).unwrap();
                for w in r.objective_trace.windows(2) {
                    assert!(w[1] <= w[0] + 1e-6, "{scheme}: {:?}", r.objective_trace);
                }
                assert!(r.iterations <= 20);
                assert_eq!(*r.objective_trace.last().unwrap(), r.objective_s());
                let bad = check_solution(&sc, scheme, &r.final_state);
                assert!(bad.is_empty(), "{scheme}: {bad:?}");
            }
        }
    }

    #[test]
    fn baseline_shapes() {
        let sc = scenario(7);
        let opts = SolverOptions::default();
        let local = run_baseline(&sc, Scheme::SuavOnly, &opts).unwrap();
        assert!(local.final_state.beta.iter().all(|&b| !b));
        let fixed = run_baseline(&sc, Scheme::StaticSuavs, &opts).unwrap();
        assert!(fixed.final_state.fleet.iter().all(|s| s.current_pos == s.initial_pos));
        let relay = run_baseline(&sc, Scheme::RuavOnly, &opts).unwrap();
        let active = relay.final_state.fleet.iter().filter(|s| s.is_active()).count();
        assert_eq!(relay.final_state.beta.iter().filter(|&&b| b).count(), active.min(sc.n0_cap));
    }

    #[test]
    fn nearest_cover_prefers_lower_index_on_ties() {
        let cfg = ExperimentConfig { n_suavs: 2, n_targets: 2, n0_cap: 1, ..ExperimentConfig::default() };
        let mut sc = generate_scenario(&cfg, 0).unwrap();
        for (s, x) in sc.suavs.iter_mut().zip([400.0, 600.0]) {
            s.initial_pos = Position3D::new(x, 500.0, 500.0);
            s.current_pos = s.initial_pos;
        }
        sc.targets[0] = Target { id: 0, pos: Position3D::new(500.0, 500.0, 0.0) };
        sc.targets[1] = Target { id: 1, pos: Position3D::new(620.0, 500.0, 0.0) };
        let assoc = nearest_cover_association(&sc).unwrap();
        assert_eq!(assoc.feasible_mask[0], vec![true, true]);
        assert_eq!(assoc.alpha, vec![vec![true, false], vec![false, true]]);
    }

    #[test]
    fn checker_flags_broken_solutions() {
        let sc = scenario(1);
        let r = run_proposed(&sc, &SolverOptions::default()).unwrap();
        let mut bad = r.final_state.clone();
        bad.q_m = Position3D::new(-5.0, 0.0, 50.0);
        assert!(!check_solution(&sc, Scheme::Proposed, &bad).is_empty());
        let mut bad = r.final_state.clone();
        bad.association.alpha[0] = vec![false; sc.n_suavs()];
        assert!(!check_solution(&sc, Scheme::Proposed, &bad).is_empty());
        let mut bad = r.final_state;
        bad.beta = vec![true; sc.n_suavs()];
        assert!(!check_solution(&sc, Scheme::Proposed, &bad).is_empty());
    }
}
