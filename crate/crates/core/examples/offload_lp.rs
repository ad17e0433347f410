//! Offloading decision three ways: the linear relaxation, its greedy rounding
//! and exact enumeration.

use uavsar::config::ExperimentConfig;
use uavsar::cost::total_latency;
use uavsar::offload::{enumerate_offload, enumeration_size, greedy_round, solve_relaxation};
use uavsar::orchestrator::nearest_cover_association;
use uavsar::scenario::{generate_scenario, Mobility};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = generate_scenario(&ExperimentConfig::default(), 4)?;
    let fleet = sc.deploy(&nearest_cover_association(&sc)?.alpha, Mobility::Adaptive);
    let q = sc.ruav.box_center();

    let relaxed = solve_relaxation(&sc, &fleet, &q)?;
    println!("relaxed beta {:?}", relaxed.beta.iter().map(|b| format!("{b:.2}")).collect::<Vec<_>>());
    println!("relaxed bound {:.4} s", relaxed.slack_s);

    let rounded = greedy_round(&relaxed, &sc, &fleet, &q)?;
    println!("greedy rounding {:?} -> {:.4} s", rounded.beta, rounded.slack_s);

    let exact = enumerate_offload(&sc, &fleet, &q)?;
    println!(
        "enumerated {} decisions, best {:?} -> {:.4} s",
        enumeration_size(sc.n_suavs(), sc.n0_cap),
        exact.beta,
        exact.slack_s
    );
    for (n, l) in total_latency(&sc, &fleet, &exact.beta, &q)?.iter().enumerate() {
        println!("  S-UAV {n}: {:.4} s{}", l.total_s, if exact.beta[n] { " (offloaded)" } else { "" });
    }
    Ok(())
}
