//! The four schemes on one scenario, with the outer objective trace.

use uavsar::config::ExperimentConfig;
use uavsar::orchestrator::{check_solution, run_baseline, Scheme, SolverOptions};
use uavsar::scenario::generate_scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::default();
    let sc = generate_scenario(&cfg, 5)?;
    for scheme in Scheme::ALL {
        let rep = run_baseline(&sc, scheme, &SolverOptions::default())?;
        let st = &rep.final_state;
        let trace: Vec<String> = rep.objective_trace.iter().map(|v| format!("{v:.4}")).collect();
        println!(
            "{scheme:13} per chunk {:.4} s (x{} chunks = {:.3} s), stddev {:.3} s, offloaded {:?}",
            rep.objective_s(),
            cfg.n_chunks,
            rep.objective_s() * cfg.n_chunks as f64,
            st.evaluation.spread_s,
            st.beta.iter().enumerate().filter(|(_, &b)| b).map(|(n, _)| n).collect::<Vec<_>>()
        );
        println!("{:13} trace [{}], checks {:?}", "", trace.join(", "), check_solution(&sc, scheme, st));
    }
    Ok(())
}
