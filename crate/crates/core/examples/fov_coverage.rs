//! Camera footprint of each S-UAV and which targets it can see.

use uavsar::config::ExperimentConfig;
use uavsar::scenario::{feasible_association_mask, fov_rect, generate_scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = generate_scenario(&ExperimentConfig::default(), 7)?;
    for s in &sc.suavs {
        let r = fov_rect(s);
        println!(
            "S-UAV {} at ({:.0}, {:.0}, {:.0}) sees x {:.0}..{:.0}, y {:.0}..{:.0}",
            s.id, s.current_pos.x, s.current_pos.y, s.current_pos.h, r.x_min, r.x_max, r.y_min, r.y_max
        );
    }
    let mask = feasible_association_mask(&sc)?;
    for (t, row) in sc.targets.iter().zip(&mask) {
        let who: Vec<usize> = row.iter().enumerate().filter(|(_, &m)| m).map(|(n, _)| n).collect();
        println!("target {:2} at ({:6.1}, {:6.1}) covered by {:?}", t.id, t.pos.x, t.pos.y, who);
    }
    Ok(())
}
