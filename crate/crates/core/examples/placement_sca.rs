//! Relay placement by successive convex approximation, checked against a
//! refined grid search.

use uavsar::config::ExperimentConfig;
use uavsar::offload::enumerate_offload;
use uavsar::orchestrator::nearest_cover_association;
use uavsar::placement::{default_initial_position, grid_search_placement, sca_loop, write_trace};
use uavsar::scenario::{generate_scenario, Mobility};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = generate_scenario(&ExperimentConfig::default(), 11)?;
    let fleet = sc.deploy(&nearest_cover_association(&sc)?.alpha, Mobility::Adaptive);
    let q0 = default_initial_position(&sc, &fleet);
    let beta = enumerate_offload(&sc, &fleet, &q0)?.beta;

    let res = sca_loop(&sc, &fleet, &beta, &q0)?;
    write_trace(&res.trace, &mut std::io::stdout().lock())?;
    let q = res.best.q_m;
    println!("relay at ({:.1}, {:.1}, {:.1}), max latency {:.6} s", q.x, q.y, q.h, res.true_objective_s);

    let (g, v) = grid_search_placement(&sc, &fleet, &beta, 50.0, 1.0)?;
    println!("grid    at ({:.1}, {:.1}, {:.1}), max latency {:.6} s", g.x, g.y, g.h, v);
    Ok(())
}
