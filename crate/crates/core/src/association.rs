//! Target association for a fixed offloading decision and relay position.
//!
//! Depth-first branch and bound over the targets, most constrained first.
//! A target either picks exactly one covering S-UAV or, in the general
//! search, any nonempty subset of its covering S-UAVs. Extra monitors can
//! help: a wider target spread lifts an S-UAV, which may bring it closer to
//! the relay. The exactly-one optimum is therefore only a warm start, and
//! the general search decides.

use std::time::{Duration, Instant};

use crate::cost::{check_energy, max_latency, suav_latency, total_latency};
use crate::error::{Error, Result};
use crate::link::{max_rate, snr_coeff};
use crate::scenario::{feasible_association_mask, Association, Mobility, Position3D, SUav, Scenario, Spread};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBudget {
    pub max_nodes: u64,
    pub max_time: Duration,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { max_nodes: 1_000_000, max_time: Duration::from_secs(10) }
    }
}

impl SearchBudget {
    pub const UNLIMITED: SearchBudget = SearchBudget { max_nodes: u64::MAX, max_time: Duration::MAX };
}

/// Which assignments the search may produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignmentRule {
    ExactlyOne,
    AtLeastOne,
}

/// Partial assignment in the search tree.
#[derive(Debug, Clone, PartialEq)]
pub struct BnbNode {
    /// Per target, the bitmask of monitoring S-UAVs, or `None` while undecided.
    pub assigned_prefix: Vec<Option<u32>>,
    pub lower_bound_s: f64,
    pub depth: usize,
}

impl BnbNode {
    pub fn root(n_targets: usize) -> Self {
        Self { assigned_prefix: vec![None; n_targets], lower_bound_s: 0.0, depth: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssociationResult {
    pub association: Association,
    pub objective_s: f64,
    /// Whether the search finished inside its budget.
    pub exact: bool,
    /// Incumbent minus the best open bound; zero when exact.
    pub gap_s: f64,
    pub nodes: u64,
    /// Objective of the best one-monitor-per-target association.
    pub exactly_one_objective_s: f64,
}

/// Max latency, then the sum over active S-UAVs as a tie-break; among
/// equally good maxima the search prefers the least total latency, which
/// tends to leave S-UAVs idle and relay slots free.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Value {
    max: f64,
    sum: f64,
}

impl Value {
    const INFINITE: Value = Value { max: f64::INFINITY, sum: f64::INFINITY };

    fn better(&self, other: &Value) -> bool {
        self.max < other.max || (self.max == other.max && self.sum < other.sum)
    }
}

/// Immutable data shared by the search.
struct Problem<'a> {
    scenario: &'a Scenario,
    beta: &'a [bool],
    q_m: Position3D,
    mobility: Mobility,
    n_off: usize,
    mask: Vec<Vec<bool>>,
    /// Covering S-UAVs per target as bitmasks.
    covers: Vec<u32>,
    /// Latency any S-UAV with at least one target must exceed.
    floor: Vec<f64>,
}

impl<'a> Problem<'a> {
    fn new(scenario: &'a Scenario, beta: &'a [bool], q_m: &Position3D, mobility: Mobility) -> Result<Self> {
        let n = scenario.n_suavs();
        if beta.len() != n {
            return Err(Error::InvalidDecision(format!("offloading vector has {} entries for {n} S-UAVs", beta.len())));
        }
        if n > 31 {
            return Err(Error::CapExceeded { size: n, cap: 31 });
        }
        let mask = feasible_association_mask(scenario).map_err(|e| Error::InfeasibleSubproblem(e.to_string()))?;
        let covers = mask
            .iter()
            .map(|row| row.iter().enumerate().filter(|(_, &m)| m).fold(0u32, |acc, (k, _)| acc | (1 << k)))
            .collect();
        let n_off = beta.iter().filter(|&&b| b).count();
        let c = &scenario.constants;
        let floor = scenario
            .suavs
            .iter()
            .zip(beta)
            .map(|(s, &b)| {
                let r_max = max_rate(c, snr_coeff(s.tx_power_w, c.rho0, c.noise_w));
                if b {
                    let comp = s.chunk_bits * c.f0_cycles_per_bit * n_off as f64 / scenario.ruav.cpu_hz;
                    s.chunk_bits / r_max + comp
                } else {
                    s.chunk_bits * c.f0_cycles_per_bit / s.cpu_hz + s.compress_ratio * s.chunk_bits / r_max
                }
            })
            .collect();
        Ok(Self { scenario, beta, q_m: *q_m, mobility, n_off, mask, covers, floor })
    }

    fn n_suavs(&self) -> usize {
        self.scenario.n_suavs()
    }

    fn deployed(&self, n: usize, spread: &Spread) -> SUav {
        self.scenario.deploy_one(n, spread, self.mobility)
    }

    /// Exact latency of S-UAV `n` monitoring a set with this spread;
    /// infinite when the geometry is degenerate.
    fn latency(&self, n: usize, spread: &Spread) -> f64 {
        if spread.count == 0 {
            return 0.0;
        }
        let s = self.deployed(n, spread);
        suav_latency(&s, self.beta[n], self.n_off, &self.q_m, &self.scenario.ruav, &self.scenario.constants)
            .map_or(f64::INFINITY, |l| l.total_s)
    }

    fn fleet(&self, spreads: &[Spread]) -> Vec<SUav> {
        spreads.iter().enumerate().map(|(n, sp)| self.deployed(n, sp)).collect()
    }

    /// Exact objective of a complete assignment, `None` when it breaks an
    /// energy limit or the link geometry.
    fn leaf_value(&self, spreads: &[Spread]) -> Result<Option<Value>> {
        let fleet = self.fleet(spreads);
        match check_energy(self.scenario, &fleet, self.beta, &self.q_m) {
            Ok(()) => {}
            Err(Error::InfeasibleSubproblem(_)) | Err(Error::DegenerateGeometry { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
        match total_latency(self.scenario, &fleet, self.beta, &self.q_m) {
            Ok(lat) => {
                let active = lat.iter().filter(|l| l.active).map(|l| l.total_s);
                let max = active.clone().fold(0.0, f64::max);
                Ok(Some(Value { max, sum: active.sum() }))
            }
            Err(Error::DegenerateGeometry { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn association(&self, choice: &[u32]) -> Association {
        let n = self.n_suavs();
        let alpha = choice.iter().map(|&m| (0..n).map(|k| m & (1 << k) != 0).collect()).collect();
        Association { alpha, feasible_mask: self.mask.clone() }
    }

    fn target_xy(&self, i: usize) -> (f64, f64) {
        let p = self.scenario.targets[i].pos;
        (p.x, p.y)
    }

    /// Targets by ascending cover count, ties by index.
    fn order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.covers.len()).collect();
        order.sort_by_key(|&i| (self.covers[i].count_ones(), i));
        order
    }

    fn choices(&self, i: usize, rule: AssignmentRule) -> Vec<u32> {
        let cover = self.covers[i];
        match rule {
            AssignmentRule::ExactlyOne => (0..32).filter(|k| cover & (1 << k) != 0).map(|k| 1u32 << k).collect(),
            AssignmentRule::AtLeastOne => {
                // Every nonempty submask of `cover`.
                let mut out = Vec::new();
                let mut sub = cover;
                while sub != 0 {
                    out.push(sub);
                    sub = (sub - 1) & cover;
                }
                out.reverse();
                out
            }
        }
    }
}

fn with_target(spreads: &[Spread], choice: u32, xy: (f64, f64)) -> Vec<Spread> {
    spreads
        .iter()
        .enumerate()
        .map(|(n, sp)| if choice & (1 << n) != 0 { sp.with(xy.0, xy.1) } else { *sp })
        .collect()
}

/// Max exact latency over S-UAVs whose covering targets are all decided;
/// zero at the root.
pub fn node_lower_bound(node: &BnbNode, scenario: &Scenario, beta: &[bool], q_m: &Position3D, mobility: Mobility) -> Result<f64> {
    let p = Problem::new(scenario, beta, q_m, mobility)?;
    let n = p.n_suavs();
    let mut spreads = vec![Spread::EMPTY; n];
    let mut decided = vec![true; n];
    for (i, slot) in node.assigned_prefix.iter().enumerate() {
        match slot {
            Some(m) => spreads = with_target(&spreads, *m, p.target_xy(i)),
            None => {
                for (k, d) in decided.iter_mut().enumerate() {
                    if p.covers[i] & (1 << k) != 0 {
                        *d = false;
                    }
                }
            }
        }
    }
    Ok((0..n).filter(|&k| decided[k]).map(|k| p.latency(k, &spreads[k])).fold(0.0, f64::max))
}

/// Each target, most constrained first, goes to the covering S-UAV whose
/// latency grows least.
pub fn greedy_incumbent(scenario: &Scenario, beta: &[bool], q_m: &Position3D, mobility: Mobility) -> Result<Association> {
    let p = Problem::new(scenario, beta, q_m, mobility)?;
    Ok(p.association(&greedy_choice(&p)))
}

fn greedy_choice(p: &Problem) -> Vec<u32> {
    let n = p.n_suavs();
    let mut spreads = vec![Spread::EMPTY; n];
    let mut lat = vec![0.0; n];
    let mut choice = vec![0u32; p.covers.len()];
    for i in p.order() {
        let xy = p.target_xy(i);
        let mut best: Option<(f64, usize, f64)> = None;
        for k in (0..n).filter(|k| p.covers[i] & (1 << k) != 0) {
            let t = p.latency(k, &spreads[k].with(xy.0, xy.1));
            let inc = t - lat[k];
            if best.is_none_or(|(b, _, _)| inc < b) {
                best = Some((inc, k, t));
            }
        }
        let (_, k, t) = best.expect("mask rows are nonempty");
        spreads[k] = spreads[k].with(xy.0, xy.1);
        lat[k] = t;
        choice[i] = 1 << k;
    }
    choice
}

struct Search<'p, 'a> {
    p: &'p Problem<'a>,
    rule: AssignmentRule,
    order: Vec<usize>,
    /// `suffix_floor[d]`: a bound every completion pays for the targets at
    /// depth `d` and beyond.
    suffix_floor: Vec<f64>,
    /// Per S-UAV, the deepest position in `order` of a covering target.
    last_depth: Vec<usize>,
    /// Per target, the smallest floor among its covering S-UAVs.
    cover_floor: Vec<f64>,
    best: Option<(Value, Vec<u32>)>,
    nodes: u64,
    budget: SearchBudget,
    started: Instant,
    aborted: bool,
    open_bound: f64,
}

impl<'p, 'a> Search<'p, 'a> {
    fn new(p: &'p Problem<'a>, rule: AssignmentRule, budget: SearchBudget, incumbent: Option<(Value, Vec<u32>)>) -> Self {
        let order = p.order();
        let cover_floor: Vec<f64> = p
            .covers
            .iter()
            .map(|&c| (0..p.n_suavs()).filter(|k| c & (1 << k) != 0).map(|k| p.floor[k]).fold(f64::INFINITY, f64::min))
            .collect();
        let mut suffix_floor = vec![0.0f64; order.len() + 1];
        for d in (0..order.len()).rev() {
            suffix_floor[d] = suffix_floor[d + 1].max(cover_floor[order[d]]);
        }
        let mut last_depth = vec![0usize; p.n_suavs()];
        for (d, &i) in order.iter().enumerate() {
            for (k, l) in last_depth.iter_mut().enumerate() {
                if p.covers[i] & (1 << k) != 0 {
                    *l = d + 1;
                }
            }
        }
        Self {
            p,
            rule,
            order,
            suffix_floor,
            last_depth,
            cover_floor,
            best: incumbent,
            nodes: 0,
            budget,
            started: Instant::now(),
            aborted: false,
            open_bound: f64::INFINITY,
        }
    }

    fn incumbent(&self) -> Value {
        self.best.as_ref().map_or(Value::INFINITE, |b| b.0)
    }

    /// Bound for the node at `depth` with these spreads (targets before
    /// `depth` decided).
    fn bound(&self, depth: usize, spreads: &[Spread]) -> Value {
        let mut lb = Value { max: self.suffix_floor[depth], sum: 0.0 };
        let mut active = 0u32;
        for (k, sp) in spreads.iter().enumerate() {
            if sp.count == 0 {
                continue;
            }
            active |= 1 << k;
            let v = if self.last_depth[k] <= depth { self.p.latency(k, sp) } else { self.p.floor[k] };
            lb.max = lb.max.max(v);
            lb.sum += v;
        }
        // A target with no active cover activates one more S-UAV.
        lb.sum += self.order[depth..]
            .iter()
            .filter(|&&i| self.p.covers[i] & active == 0)
            .map(|&i| self.cover_floor[i])
            .fold(0.0, f64::max);
        lb
    }

    fn out_of_budget(&mut self) -> bool {
        if self.nodes >= self.budget.max_nodes || (self.nodes.is_multiple_of(1024) && self.started.elapsed() >= self.budget.max_time) {
            self.aborted = true;
        }
        self.aborted
    }

    fn run(&mut self, depth: usize, spreads: Vec<Spread>, choice: &mut Vec<u32>) -> Result<()> {
        self.nodes += 1;
        let lb = self.bound(depth, &spreads);
        if self.out_of_budget() {
            self.open_bound = self.open_bound.min(lb.max);
            return Ok(());
        }
        let inc = self.incumbent();
        if lb.max > inc.max || (lb.max >= inc.max && lb.sum >= inc.sum) {
            return Ok(());
        }
        if depth == self.order.len() {
            if let Some(v) = self.p.leaf_value(&spreads)? {
                if v.better(&inc) {
                    self.best = Some((v, choice.clone()));
                }
            }
            return Ok(());
        }
        let i = self.order[depth];
        let xy = self.p.target_xy(i);
        let mut children: Vec<(f64, u32, Vec<Spread>)> = self
            .p
            .choices(i, self.rule)
            .into_iter()
            .map(|m| {
                let next = with_target(&spreads, m, xy);
                let inc = (0..next.len())
                    .filter(|k| m & (1 << k) != 0)
                    .map(|k| self.p.latency(k, &next[k]))
                    .fold(0.0, f64::max);
                (inc, m, next)
            })
            .collect();
        children.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.count_ones().cmp(&b.1.count_ones())).then(a.1.cmp(&b.1)));
        for (_, m, next) in children {
            if self.aborted {
                self.open_bound = self.open_bound.min(lb.max);
                break;
            }
            choice[i] = m;
            self.run(depth + 1, next, choice)?;
        }
        Ok(())
    }
}

fn search<'p, 'a>(
    p: &'p Problem<'a>,
    rule: AssignmentRule,
    budget: SearchBudget,
    incumbent: Option<(Value, Vec<u32>)>,
) -> Result<Search<'p, 'a>> {
    let mut s = Search::new(p, rule, budget, incumbent);
    let mut choice = vec![0u32; p.covers.len()];
    s.run(0, vec![Spread::EMPTY; p.n_suavs()], &mut choice)?;
    Ok(s)
}

/// Branch and bound under `rule`, warm-started from the greedy assignment.
pub fn solve_association_with(
    scenario: &Scenario,
    beta: &[bool],
    q_m: &Position3D,
    mobility: Mobility,
    budget: SearchBudget,
    rule: AssignmentRule,
) -> Result<AssociationResult> {
    let p = Problem::new(scenario, beta, q_m, mobility)?;
    let greedy = greedy_choice(&p);
    let spreads = spreads_of(&p, &greedy);
    let warm = p.leaf_value(&spreads)?.map(|v| (v, greedy));

    let one = search(&p, AssignmentRule::ExactlyOne, budget, warm)?;
    let exactly_one_objective_s = one.incumbent().max;
    let (mut best, mut exact, mut open, mut nodes) = (one.best.clone(), !one.aborted, one.open_bound, one.nodes);
    if rule == AssignmentRule::AtLeastOne {
        let remaining = SearchBudget {
            max_nodes: budget.max_nodes.saturating_sub(nodes),
            max_time: budget.max_time.saturating_sub(one.started.elapsed()),
        };
        let all = search(&p, AssignmentRule::AtLeastOne, remaining, best.clone())?;
        best = all.best;
        exact = !all.aborted;
        open = all.open_bound;
        nodes += all.nodes;
    }
    let (value, choice) =
        best.ok_or_else(|| Error::InfeasibleSubproblem("no association meets the energy limits".into()))?;
    let objective_s = value.max;
    let gap_s = if exact { 0.0 } else { (objective_s - open).max(0.0) };
    Ok(AssociationResult { association: p.association(&choice), objective_s, exact, gap_s, nodes, exactly_one_objective_s })
}

/// Default association solve: the general search under the default budget.
pub fn solve_association(
    scenario: &Scenario,
    beta: &[bool],
    q_m: &Position3D,
    mobility: Mobility,
    budget: SearchBudget,
) -> Result<AssociationResult> {
    solve_association_with(scenario, beta, q_m, mobility, budget, AssignmentRule::AtLeastOne)
}

fn spreads_of(p: &Problem, choice: &[u32]) -> Vec<Spread> {
    choice
        .iter()
        .enumerate()
        .fold(vec![Spread::EMPTY; p.n_suavs()], |sp, (i, &m)| with_target(&sp, m, p.target_xy(i)))
}

/// Objective of a given association, `None` when it breaks an energy limit.
pub fn association_objective(
    scenario: &Scenario,
    assoc: &Association,
    beta: &[bool],
    q_m: &Position3D,
    mobility: Mobility,
) -> Result<Option<f64>> {
    assoc.validate()?;
    let fleet = scenario.deploy(&assoc.alpha, mobility);
    match check_energy(scenario, &fleet, beta, q_m) {
        Ok(()) => Ok(Some(max_latency(scenario, &fleet, beta, q_m)?)),
        Err(Error::InfeasibleSubproblem(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Best objective over every mask-compliant association under `rule`, by
/// plain enumeration; meant for small instances.
pub fn exhaustive_association(
    scenario: &Scenario,
    beta: &[bool],
    q_m: &Position3D,
    mobility: Mobility,
    rule: AssignmentRule,
) -> Result<Option<(f64, Association)>> {
    let p = Problem::new(scenario, beta, q_m, mobility)?;
    let options: Vec<Vec<u32>> = (0..p.covers.len()).map(|i| p.choices(i, rule)).collect();
    let total: u128 = options.iter().map(|o| o.len() as u128).product();
    if total > 50_000_000 {
        return Err(Error::CapExceeded { size: total.min(usize::MAX as u128) as usize, cap: 50_000_000 });
    }
    let mut idx = vec![0usize; options.len()];
    let mut best: Option<(f64, Vec<u32>)> = None;
    loop {
        let choice: Vec<u32> = idx.iter().zip(&options).map(|(&k, o)| o[k]).collect();
        if let Some(v) = p.leaf_value(&spreads_of(&p, &choice))?.map(|v| v.max) {
            if best.as_ref().is_none_or(|b| v < b.0) {
                best = Some((v, choice));
            }
        }
        let mut d = 0;
        loop {
            if d == idx.len() {
                return Ok(best.map(|(v, c)| (v, p.association(&c))));
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::scenario::{generate_scenario, Target};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const Q: Position3D = Position3D::new(500.0, 500.0, 400.0);

    fn small(seed: u64, n: usize, i: usize) -> Scenario {
        let cfg = ExperimentConfig { n_suavs: n, n_targets: i, n0_cap: n.min(2), ..ExperimentConfig::default() };
        generate_scenario(&cfg, seed).unwrap()
    }

    fn random_beta(seed: u64, n: usize, cap: usize) -> Vec<bool> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb7);
        let mut k = 0;
        (0..n)
            .map(|_| {
                let b = rng.gen_bool(0.5) && k < cap;
                k += b as usize;
                b
            })
            .collect()
    }

    #[test]
    fn single_target_single_cover_is_forced() {
        let mut sc = small(0, 1, 1);
        let s0 = sc.suavs[0].initial_pos;
        sc.targets = vec![Target { id: 0, pos: Position3D::new(s0.x, s0.y, 0.0) }];
        let mask = feasible_association_mask(&sc).unwrap();
        let beta = vec![false];
        let r = solve_association(&sc, &beta, &Q, Mobility::Adaptive, SearchBudget::UNLIMITED).unwrap();
        assert_eq!(mask, vec![vec![true]]);
        assert_eq!(r.association.alpha, vec![vec![true]]);
    }

    #[test]
    fn unique_covers_need_no_branching() {
        for seed in 0..10 {
            let sc = small(seed, 8, 20);
            let mask = feasible_association_mask(&sc).unwrap();
            if mask.iter().any(|row| row.iter().filter(|&&m| m).count() > 1) {
                continue;
            }
            let beta = vec![false; 8];
            let r = solve_association(&sc, &beta, &Q, Mobility::Adaptive, SearchBudget::default()).unwrap();
            assert_eq!(r.association.alpha, mask);
            assert!(r.nodes <= 2 * (sc.n_targets() as u64 + 1));
        }
    }

    #[test]
    fn root_bound_is_zero_and_leaf_bound_is_exact() {
        let sc = small(3, 3, 5);
        let beta = vec![true, false, false];
        assert_eq!(node_lower_bound(&BnbNode::root(5), &sc, &beta, &Q, Mobility::Adaptive).unwrap(), 0.0);
        let assoc = greedy_incumbent(&sc, &beta, &Q, Mobility::Adaptive).unwrap();
        let prefix = assoc
            .alpha
            .iter()
            .map(|row| Some(row.iter().enumerate().filter(|(_, &a)| a).fold(0u32, |m, (k, _)| m | (1 << k))))
            .collect();
        let node = BnbNode { assigned_prefix: prefix, lower_bound_s: 0.0, depth: 5 };
        let lb = node_lower_bound(&node, &sc, &beta, &Q, Mobility::Adaptive).unwrap();
        let exact = association_objective(&sc, &assoc, &beta, &Q, Mobility::Adaptive).unwrap().unwrap();
        assert!((lb - exact).abs() <= 1e-12 * exact);
    }

    #[test]
    fn greedy_is_never_better_than_search() {
        for seed in 0..8 {
            let sc = small(seed, 8, 20);
            let beta = random_beta(seed, 8, sc.n0_cap);
            let g = greedy_incumbent(&sc, &beta, &Q, Mobility::Adaptive).unwrap();
            let gv = association_objective(&sc, &g, &beta, &Q, Mobility::Adaptive).unwrap().unwrap();
            let r = solve_association(&sc, &beta, &Q, Mobility::Adaptive, SearchBudget::default()).unwrap();
            assert!(r.objective_s <= gv + 1e-12);
            r.association.validate().unwrap();
        }
    }

    #[test]
    fn matches_exhaustive_on_tiny_instances() {
        for seed in 0..25 {
            let n = 1 + (seed as usize % 3);
            let i = n + (seed as usize / 3) % (6 - n);
            let sc = small(seed, n, i);
            let beta = random_beta(seed, n, sc.n0_cap);
            for mobility in [Mobility::Adaptive, Mobility::Static] {
                let r = solve_association(&sc, &beta, &Q, mobility, SearchBudget::UNLIMITED).unwrap();
                let (v, _) = exhaustive_association(&sc, &beta, &Q, mobility, AssignmentRule::AtLeastOne).unwrap().unwrap();
                assert!((r.objective_s - v).abs() <= 1e-12 * v.max(1.0), "seed {seed}: {} vs {v}", r.objective_s);
                let (v1, _) = exhaustive_association(&sc, &beta, &Q, mobility, AssignmentRule::ExactlyOne).unwrap().unwrap();
                assert!((r.exactly_one_objective_s - v1).abs() <= 1e-12 * v1.max(1.0));
            }
        }
    }

    #[test]
    fn budget_exhaustion_reports_gap() {
        let sc = small(2, 8, 20);
        let beta = vec![false; 8];
        let tight = SearchBudget { max_nodes: 3, max_time: Duration::from_secs(10) };
        let r = solve_association(&sc, &beta, &Q, Mobility::Adaptive, tight).unwrap();
        assert!(!r.exact || r.nodes <= 3);
        assert!(r.gap_s >= 0.0);
        r.association.validate().unwrap();
    }

    #[test]
    fn energy_infeasible_everywhere() {
        let mut sc = small(1, 2, 3);
        for s in sc.suavs.iter_mut() {
            s.energy_budget_j = 1e-12;
        }
        let r = solve_association(&sc, &[false, false], &Q, Mobility::Adaptive, SearchBudget::UNLIMITED);
        assert!(matches!(r, Err(Error::InfeasibleSubproblem(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn bound_never_exceeds_any_completion(seed in 0u64..500, cut in 0usize..6, pick in 0u64..1000) {
            let sc = small(seed, 3, 5);
            let beta = random_beta(seed, 3, sc.n0_cap);
            let mask = feasible_association_mask(&sc).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(pick);
            let full: Vec<u32> = mask
                .iter()
                .map(|row| {
                    let cover = row.iter().enumerate().filter(|(_, &m)| m).fold(0u32, |a, (k, _)| a | (1 << k));
                    loop {
                        let m = rng.gen_range(1u32..8) & cover;
                        if m != 0 {
                            break m;
                        }
                    }
                })
                .collect();
            let prefix = full.iter().enumerate().map(|(i, &m)| if i < cut { Some(m) } else { None }).collect();
            let node = BnbNode { assigned_prefix: prefix, lower_bound_s: 0.0, depth: cut.min(5) };
            let lb = node_lower_bound(&node, &sc, &beta, &Q, Mobility::Adaptive).unwrap();
            let alpha = full.iter().map(|&m| (0..3).map(|k| m & (1 << k) != 0).collect()).collect();
            let assoc = Association { alpha, feasible_mask: mask };
            let fleet = sc.deploy(&assoc.alpha, Mobility::Adaptive);
            let v = max_latency(&sc, &fleet, &beta, &Q).unwrap();
            prop_assert!(lb <= v * (1.0 + 1e-12));
        }
    }
}
