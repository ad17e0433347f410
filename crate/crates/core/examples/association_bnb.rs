//! Target association by branch and bound, compared with the greedy start
//! and, on a small instance, with plain enumeration.

use uavsar::association::{
    association_objective, exhaustive_association, greedy_incumbent, solve_association_with, AssignmentRule,
    SearchBudget,
};
use uavsar::config::ExperimentConfig;
use uavsar::scenario::{generate_scenario, Mobility};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = generate_scenario(&ExperimentConfig::default(), 2)?;
    let beta: Vec<bool> = (0..sc.n_suavs()).map(|n| n < sc.n0_cap).collect();
    let q = sc.ruav.box_center();

    let greedy = greedy_incumbent(&sc, &beta, &q, Mobility::Adaptive)?;
    let g = association_objective(&sc, &greedy, &beta, &q, Mobility::Adaptive)?;
    println!("greedy        {g:?}");
    let r = solve_association_with(&sc, &beta, &q, Mobility::Adaptive, SearchBudget::default(), AssignmentRule::AtLeastOne)?;
    println!(
        "branch&bound  {:.6} s, one monitor per target {:.6} s, {} nodes, exact {}",
        r.objective_s, r.exactly_one_objective_s, r.nodes, r.exact
    );
    for n in 0..sc.n_suavs() {
        println!("  S-UAV {n}: targets {:?}", r.association.assigned_to(n).collect::<Vec<_>>());
    }

    let small = ExperimentConfig { n_suavs: 3, n_targets: 5, n0_cap: 1, ..ExperimentConfig::default() };
    let sc = generate_scenario(&small, 2)?;
    let beta = vec![true, false, false];
    let bnb = solve_association_with(&sc, &beta, &q, Mobility::Adaptive, SearchBudget::UNLIMITED, AssignmentRule::AtLeastOne)?;
    let all = exhaustive_association(&sc, &beta, &q, Mobility::Adaptive, AssignmentRule::AtLeastOne)?;
    println!("small instance: branch&bound {:.9} s, enumeration {:.9} s", bnb.objective_s, all.map_or(f64::NAN, |a| a.0));
    Ok(())
}
