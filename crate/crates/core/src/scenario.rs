//! World geometry: rescue targets, S-UAV cameras and footprints, the
//! repositioning rule that follows an association, coverage feasibility, and
//! seeded scenario generation.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::link::PhysicsConstants;

/// Redraws allowed per target before a scenario is declared infeasible.
pub const TARGET_RETRY_CAP: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    /// Altitude above sea level.
    pub h: f64,
}

impl Position3D {
    pub const fn new(x: f64, y: f64, h: f64) -> Self {
        Self { x, y, h }
    }

    pub fn dist_sq(&self, other: &Position3D) -> f64 {
        let (dx, dy, dh) = (self.x - other.x, self.y - other.y, self.h - other.h);
        dx * dx + dy * dy + dh * dh
    }

    pub fn dist(&self, other: &Position3D) -> f64 {
        self.dist_sq(other).sqrt()
    }

    /// Componentwise clamp into `[lo, hi]`.
    pub fn clamp(&self, lo: &Position3D, hi: &Position3D) -> Position3D {
        Position3D::new(self.x.clamp(lo.x, hi.x), self.y.clamp(lo.y, hi.y), self.h.clamp(lo.h, hi.h))
    }

    pub fn within(&self, lo: &Position3D, hi: &Position3D) -> bool {
        (lo.x..=hi.x).contains(&self.x) && (lo.y..=hi.y).contains(&self.y) && (lo.h..=hi.h).contains(&self.h)
    }
}

/// Rectangular camera footprint model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraSpec {
    /// Horizontal opening angle, radians.
    pub phi_h: f64,
    /// Vertical opening angle, radians.
    pub phi_v: f64,
    /// Altitude margin that keeps assigned targets off the footprint edge.
    pub gamma: f64,
}

impl CameraSpec {
    pub fn from_degrees(phi_h_deg: f64, phi_v_deg: f64, gamma: f64) -> Self {
        Self { phi_h: phi_h_deg.to_radians(), phi_v: phi_v_deg.to_radians(), gamma }
    }

    fn half_tans(&self) -> (f64, f64) {
        ((self.phi_h / 2.0).tan(), (self.phi_v / 2.0).tan())
    }
}

impl Default for CameraSpec {
    fn default() -> Self {
        Self::from_degrees(58.4, 40.0, 30.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub id: usize,
    pub pos: Position3D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SUav {
    pub id: usize,
    pub initial_pos: Position3D,
    pub current_pos: Position3D,
    pub camera: CameraSpec,
    pub cpu_hz: f64,
    pub tx_power_w: f64,
    /// Size of the video chunk to process, bits. Zero when nothing is monitored.
    pub chunk_bits: f64,
    /// Processed-to-raw size ratio of a chunk, in (0, 1).
    pub compress_ratio: f64,
    pub energy_budget_j: f64,
    pub hover_energy_j: f64,
}

impl SUav {
    pub fn is_active(&self) -> bool {
        self.chunk_bits > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RUav {
    pub pos: Position3D,
    pub cpu_hz: f64,
    pub box_lo: Position3D,
    pub box_hi: Position3D,
    pub energy_budget_j: f64,
    pub hover_energy_j: f64,
}

impl RUav {
    pub fn box_center(&self) -> Position3D {
        Position3D::new(
            0.5 * (self.box_lo.x + self.box_hi.x),
            0.5 * (self.box_lo.y + self.box_hi.y),
            0.5 * (self.box_lo.h + self.box_hi.h),
        )
    }
}

/// Immutable snapshot of one time slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub suavs: Vec<SUav>,
    pub targets: Vec<Target>,
    pub ruav: RUav,
    pub constants: PhysicsConstants,
    /// Largest number of S-UAVs the relay serves at once.
    pub n0_cap: usize,
    pub seed: u64,
    /// Number of sequential chunks per S-UAV; `chunk_bits` holds their mean.
    pub n_chunks: usize,
}

/// Whether S-UAVs move to their assigned targets or stay at their initial points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mobility {
    Adaptive,
    Static,
}

/// Closed axis-aligned rectangle on the sea surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl AxisRect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn contains_strictly(&self, x: f64, y: f64) -> bool {
        x > self.x_min && x < self.x_max && y > self.y_min && y < self.y_max
    }
}

/// Full footprint lengths `(hfov, vfov)` at the given altitude.
pub fn fov_extents(altitude: f64, camera: &CameraSpec) -> (f64, f64) {
    let (th, tv) = camera.half_tans();
    (2.0 * altitude * th, 2.0 * altitude * tv)
}

pub fn footprint_at(pos: &Position3D, camera: &CameraSpec) -> AxisRect {
    let (th, tv) = camera.half_tans();
    let (hx, hy) = (pos.h * th, pos.h * tv);
    AxisRect { x_min: pos.x - hx, x_max: pos.x + hx, y_min: pos.y - hy, y_max: pos.y + hy }
}

pub fn fov_rect(suav: &SUav) -> AxisRect {
    footprint_at(&suav.current_pos, &suav.camera)
}

pub fn covers(suav: &SUav, target: &Target, at_initial: bool) -> bool {
    let pos = if at_initial { &suav.initial_pos } else { &suav.current_pos };
    footprint_at(pos, &suav.camera).contains(target.pos.x, target.pos.y)
}

/// Horizontal bounding box of a set of targets; the repositioning rule only
/// depends on it and on the set size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spread {
    pub count: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for Spread {
    fn default() -> Self {
        Self::EMPTY
    }
}

impl Spread {
    pub const EMPTY: Spread = Spread {
        count: 0,
        x_min: f64::INFINITY,
        x_max: f64::NEG_INFINITY,
        y_min: f64::INFINITY,
        y_max: f64::NEG_INFINITY,
    };

    pub fn with(mut self, x: f64, y: f64) -> Spread {
        self.count += 1;
        self.x_min = self.x_min.min(x);
        self.x_max = self.x_max.max(x);
        self.y_min = self.y_min.min(y);
        self.y_max = self.y_max.max(y);
        self
    }

    pub fn of<'a>(targets: impl IntoIterator<Item = &'a Target>) -> Spread {
        targets.into_iter().fold(Spread::EMPTY, |s, t| s.with(t.pos.x, t.pos.y))
    }

    /// Hover point that keeps every target of the set in view.
    pub fn hover_point(&self, camera: &CameraSpec, initial: &Position3D) -> Position3D {
        match self.count {
            0 => *initial,
            1 => Position3D::new(self.x_min, self.y_min, camera.gamma),
            _ => {
                let (th, tv) = camera.half_tans();
                let dx = self.x_max - self.x_min;
                let dy = self.y_max - self.y_min;
                Position3D::new(
                    0.5 * (self.x_max + self.x_min),
                    0.5 * (self.y_max + self.y_min),
                    (dx / (2.0 * th)).max(dy / (2.0 * tv)) + camera.gamma,
                )
            }
        }
    }
}

/// Position an S-UAV takes to monitor `assigned`.
pub fn reposition(suav: &SUav, assigned: &[Target]) -> Position3D {
    Spread::of(assigned).hover_point(&suav.camera, &suav.initial_pos)
}

/// Binary target-to-S-UAV association plus the coverage mask it must respect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    /// `alpha[i][n]`: target `i` is monitored by S-UAV `n`.
    pub alpha: Vec<Vec<bool>>,
    pub feasible_mask: Vec<Vec<bool>>,
}

impl Association {
    /// One monitoring S-UAV per target.
    pub fn from_choice(choice: &[usize], feasible_mask: Vec<Vec<bool>>) -> Self {
        let n = feasible_mask.first().map_or(0, Vec::len);
        let alpha = choice
            .iter()
            .map(|&c| (0..n).map(|k| k == c).collect())
            .collect();
        Self { alpha, feasible_mask }
    }

    pub fn n_targets(&self) -> usize {
        self.alpha.len()
    }

    pub fn n_suavs(&self) -> usize {
        self.feasible_mask.first().map_or(0, Vec::len)
    }

    pub fn assigned_to(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        self.alpha.iter().enumerate().filter(move |(_, row)| row[n]).map(|(i, _)| i)
    }

    /// Checks mask compliance and that every target is monitored.
    pub fn validate(&self) -> Result<()> {
        for (i, (row, mask)) in self.alpha.iter().zip(&self.feasible_mask).enumerate() {
            if !row.iter().any(|&a| a) {
                return Err(Error::InvalidDecision(format!("target {i} is not monitored")));
            }
            if let Some(n) = row.iter().zip(mask).position(|(&a, &m)| a && !m) {
                return Err(Error::InvalidDecision(format!("target {i} assigned to S-UAV {n} outside its initial view")));
            }
        }
        Ok(())
    }
}

/// `mask[i][n]` is set when S-UAV `n` sees target `i` from its initial point.
pub fn feasible_association_mask(scenario: &Scenario) -> Result<Vec<Vec<bool>>> {
    let mask: Vec<Vec<bool>> = scenario
        .targets
        .iter()
        .map(|t| scenario.suavs.iter().map(|s| covers(s, t, true)).collect())
        .collect();
    if let Some(i) = mask.iter().position(|row| !row.iter().any(|&m| m)) {
        return Err(Error::InfeasibleScenario(format!("target {i} lies outside every initial S-UAV view")));
    }
    Ok(mask)
}

impl Scenario {
    pub fn n_suavs(&self) -> usize {
        self.suavs.len()
    }

    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        if self.suavs.is_empty() {
            return Err(Error::InfeasibleScenario("no S-UAVs".into()));
        }
        if self.n_suavs() > self.n_targets() {
            return Err(Error::InfeasibleScenario(format!(
                "{} S-UAVs for {} targets; at least one target per S-UAV is assumed",
                self.n_suavs(),
                self.n_targets()
            )));
        }
        if self.n0_cap > self.n_suavs() {
            return Err(Error::InfeasibleScenario(format!("n0_cap {} exceeds {} S-UAVs", self.n0_cap, self.n_suavs())));
        }
        for s in &self.suavs {
            let ok = s.compress_ratio > 0.0
                && s.compress_ratio < 1.0
                && s.cpu_hz > 0.0
                && s.tx_power_w > 0.0
                && s.chunk_bits >= 0.0
                && s.initial_pos.h >= 0.0;
            if !ok {
                return Err(Error::InfeasibleScenario(format!("S-UAV {} has invalid parameters", s.id)));
            }
        }
        if let Some(t) = self.targets.iter().find(|t| t.pos.h != 0.0) {
            return Err(Error::InfeasibleScenario(format!("target {} is not at sea level", t.id)));
        }
        let r = &self.ruav;
        if !(r.box_lo.x <= r.box_hi.x && r.box_lo.y <= r.box_hi.y && r.box_lo.h <= r.box_hi.h) {
            return Err(Error::InfeasibleScenario("relay box bounds are inverted".into()));
        }
        if !r.pos.within(&r.box_lo, &r.box_hi) || r.cpu_hz <= 0.0 {
            return Err(Error::InfeasibleScenario("relay position or CPU invalid".into()));
        }
        feasible_association_mask(self).map(|_| ())
    }

    /// S-UAV states after applying an association: positions follow the
    /// repositioning rule (unless static) and idle S-UAVs carry no chunk.
    pub fn deploy(&self, alpha: &[Vec<bool>], mobility: Mobility) -> Vec<SUav> {
        (0..self.suavs.len())
            .map(|n| {
                let spread = alpha
                    .iter()
                    .zip(&self.targets)
                    .filter(|(row, _)| row[n])
                    .fold(Spread::EMPTY, |sp, (_, t)| sp.with(t.pos.x, t.pos.y));
                self.deploy_one(n, &spread, mobility)
            })
            .collect()
    }

    /// State of S-UAV `n` when it monitors a target set with the given spread.
    pub fn deploy_one(&self, n: usize, spread: &Spread, mobility: Mobility) -> SUav {
        let s = &self.suavs[n];
        let mut out = s.clone();
        out.current_pos = match mobility {
            Mobility::Adaptive => spread.hover_point(&s.camera, &s.initial_pos),
            Mobility::Static => s.initial_pos,
        };
        if spread.count == 0 {
            out.chunk_bits = 0.0;
        }
        out
    }

    /// Line-oriented `key = value` document used for replay and golden files.
    pub fn to_text(&self) -> String {
        let c = &self.constants;
        let r = &self.ruav;
        let mut out = String::from("# uavsar scenario\n");
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "n0_cap = {}", self.n0_cap);
        let _ = writeln!(out, "n_chunks = {}", self.n_chunks);
        let _ = writeln!(out, "bandwidth_hz = {:?}", c.bandwidth_hz);
        let _ = writeln!(out, "rho0 = {:?}", c.rho0);
        let _ = writeln!(out, "noise_w = {:?}", c.noise_w);
        let _ = writeln!(out, "f0_cycles_per_bit = {:?}", c.f0_cycles_per_bit);
        let _ = writeln!(out, "zeta = {:?}", c.zeta);
        let _ = writeln!(
            out,
            "ruav = {}",
            join(&[
                r.pos.x, r.pos.y, r.pos.h, r.cpu_hz, r.box_lo.x, r.box_lo.y, r.box_lo.h, r.box_hi.x, r.box_hi.y,
                r.box_hi.h, r.energy_budget_j, r.hover_energy_j,
            ])
        );
        for t in &self.targets {
            let _ = writeln!(out, "target = {}", join(&[t.pos.x, t.pos.y]));
        }
        for s in &self.suavs {
            let q = &s.initial_pos;
            let _ = writeln!(
                out,
                "suav = {}",
                join(&[
                    q.x,
                    q.y,
                    q.h,
                    s.cpu_hz,
                    s.tx_power_w,
                    s.chunk_bits,
                    s.compress_ratio,
                    s.energy_budget_j,
                    s.hover_energy_j,
                    s.camera.phi_h,
                    s.camera.phi_v,
                    s.camera.gamma,
                ])
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Scenario> {
        let bad = |line: usize, msg: &str| Error::InfeasibleScenario(format!("scenario line {line}: {msg}"));
        let mut constants = PhysicsConstants::default();
        let mut seed = 0;
        let mut n0_cap = 0;
        let mut n_chunks = 1;
        let mut ruav = None;
        let mut targets = Vec::new();
        let mut suavs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| bad(line_no, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            let nums = || -> Result<Vec<f64>> {
                value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>().map_err(|_| bad(line_no, "not a number")))
                    .collect()
            };
            let one = || -> Result<f64> {
                let v = nums()?;
                if v.len() != 1 {
                    return Err(bad(line_no, "expected one value"));
                }
                Ok(v[0])
            };
            let int = || value.parse::<u64>().map_err(|_| bad(line_no, "not an integer"));
            match key {
                "seed" => seed = int()?,
                "n0_cap" => n0_cap = int()? as usize,
                "n_chunks" => n_chunks = int()? as usize,
                "bandwidth_hz" => constants.bandwidth_hz = one()?,
                "rho0" => constants.rho0 = one()?,
                "noise_w" => constants.noise_w = one()?,
                "f0_cycles_per_bit" => constants.f0_cycles_per_bit = one()?,
                "zeta" => constants.zeta = one()?,
                "ruav" => {
                    let v = nums()?;
                    if v.len() != 12 {
                        return Err(bad(line_no, "ruav needs 12 fields"));
                    }
                    ruav = Some(RUav {
                        pos: Position3D::new(v[0], v[1], v[2]),
                        cpu_hz: v[3],
                        box_lo: Position3D::new(v[4], v[5], v[6]),
                        box_hi: Position3D::new(v[7], v[8], v[9]),
                        energy_budget_j: v[10],
                        hover_energy_j: v[11],
                    });
                }
                "target" => {
                    let v = nums()?;
                    if v.len() != 2 {
                        return Err(bad(line_no, "target needs x,y"));
                    }
                    targets.push(Target { id: targets.len(), pos: Position3D::new(v[0], v[1], 0.0) });
                }
                "suav" => {
                    let v = nums()?;
                    if v.len() != 12 {
                        return Err(bad(line_no, "suav needs 12 fields"));
                    }
                    let pos = Position3D::new(v[0], v[1], v[2]);
                    suavs.push(SUav {
                        id: suavs.len(),
                        initial_pos: pos,
                        current_pos: pos,
                        cpu_hz: v[3],
                        tx_power_w: v[4],
                        chunk_bits: v[5],
                        compress_ratio: v[6],
                        energy_budget_j: v[7],
                        hover_energy_j: v[8],
                        camera: CameraSpec { phi_h: v[9], phi_v: v[10], gamma: v[11] },
                    });
                }
                other => return Err(bad(line_no, &format!("unknown key `{other}`"))),
            }
        }
        let ruav = ruav.ok_or_else(|| bad(0, "missing ruav line"))?;
        Ok(Scenario { suavs, targets, ruav, constants, n0_cap, seed, n_chunks })
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

/// Measure of `[0, len]` covered by `count` evenly spaced intervals of width `width`.
fn axis_coverage(len: f64, count: usize, width: f64) -> f64 {
    let step = len / count as f64;
    let mut covered = 0.0;
    let mut reach = 0.0_f64;
    for j in 0..count {
        let c = (j as f64 + 0.5) * step;
        let lo = (c - width / 2.0).max(reach).max(0.0);
        let hi = (c + width / 2.0).min(len);
        if hi > lo {
            covered += hi - lo;
            reach = hi;
        }
    }
    covered
}

/// Grid `(columns, rows)` with `columns * rows = n` whose footprints cover the
/// largest share of a square area; ties prefer more columns.
pub fn grid_layout(n: usize, area: f64, altitude: f64, camera: &CameraSpec) -> (usize, usize) {
    let (hfov, vfov) = fov_extents(altitude, camera);
    let mut best = (n, 1);
    let mut best_cov = -1.0;
    for cols in (1..=n).rev() {
        if !n.is_multiple_of(cols) {
            continue;
        }
        let rows = n / cols;
        let cov = axis_coverage(area, cols, hfov) * axis_coverage(area, rows, vfov);
        if cov > best_cov + 1e-9 {
            best_cov = cov;
            best = (cols, rows);
        }
    }
    best
}

/// Draws a scenario: targets uniform over the area (each redrawn while it is
/// outside every initial footprint), S-UAVs on a regular grid at the initial
/// altitude, per-chunk sizes uniform in the configured range.
///
/// Target draws and chunk draws use separate streams, so changing only the
/// number of chunks keeps the targets and the leading chunk sizes intact.
pub fn generate_scenario(config: &ExperimentConfig, seed: u64) -> Result<Scenario> {
    config
        .validate()
        .map_err(|e| Error::InfeasibleScenario(e.to_string()))?;
    let area = config.area_m;
    let camera = CameraSpec::from_degrees(config.phi_h_deg, config.phi_v_deg, config.gamma_m);
    let (cols, rows) = grid_layout(config.n_suavs, area, config.initial_altitude_m, &camera);

    let mut suavs = Vec::with_capacity(config.n_suavs);
    for r in 0..rows {
        for c in 0..cols {
            let id = suavs.len();
            let pos = Position3D::new(
                (c as f64 + 0.5) * area / cols as f64,
                (r as f64 + 0.5) * area / rows as f64,
                config.initial_altitude_m,
            );
            let mut chunk_rng = ChaCha8Rng::seed_from_u64(seed);
            chunk_rng.set_stream(1 + id as u64);
            let (lo, hi) = config.chunk_kb_range;
            let total: f64 = (0..config.n_chunks)
                .map(|_| if hi > lo { chunk_rng.gen_range(lo..hi) } else { lo } * config.bits_per_kb)
                .sum();
            suavs.push(SUav {
                id,
                initial_pos: pos,
                current_pos: pos,
                camera,
                cpu_hz: config.cpu_suav_hz,
                tx_power_w: config.tx_power_w,
                chunk_bits: total / config.n_chunks as f64,
                compress_ratio: config.mu,
                energy_budget_j: config.suav_energy_budget_j,
                hover_energy_j: config.suav_hover_energy_j,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let mut targets = Vec::with_capacity(config.n_targets);
    for id in 0..config.n_targets {
        let mut placed = None;
        for _ in 0..TARGET_RETRY_CAP {
            let pos = Position3D::new(rng.gen_range(0.0..area), rng.gen_range(0.0..area), 0.0);
            let t = Target { id, pos };
            if suavs.iter().any(|s| covers(s, &t, true)) {
                placed = Some(t);
                break;
            }
        }
        let t = placed.ok_or_else(|| {
            Error::InfeasibleScenario(format!("target {id} could not be placed inside any initial view after {TARGET_RETRY_CAP} draws"))
        })?;
        targets.push(t);
    }

    let [lx, ly, lh, hx, hy, hh] = config.ruav_box;
    let box_lo = Position3D::new(lx, ly, lh);
    let box_hi = Position3D::new(hx, hy, hh);
    let ruav = RUav {
        pos: Position3D::new(0.5 * (lx + hx), 0.5 * (ly + hy), 0.5 * (lh + hh)),
        cpu_hz: config.cpu_ruav_hz,
        box_lo,
        box_hi,
        energy_budget_j: config.ruav_energy_budget_j,
        hover_energy_j: config.ruav_hover_energy_j,
    };

    let scenario = Scenario {
        suavs,
        targets,
        ruav,
        constants: config.physics(),
        n0_cap: config.n0_cap,
        seed,
        n_chunks: config.n_chunks,
    };
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cam() -> CameraSpec {
        CameraSpec::default()
    }

    fn suav_at(pos: Position3D) -> SUav {
        SUav {
            id: 0,
            initial_pos: pos,
            current_pos: pos,
            camera: cam(),
            cpu_hz: 2e8,
            tx_power_w: 0.8,
            chunk_bits: 2_048_000.0,
            compress_ratio: 0.2,
            energy_budget_j: 1e3,
            hover_energy_j: 0.0,
        }
    }

    fn target(x: f64, y: f64) -> Target {
        Target { id: 0, pos: Position3D::new(x, y, 0.0) }
    }

    #[test]
    fn fov_extent_examples() {
        assert_eq!(fov_extents(0.0, &cam()), (0.0, 0.0));
        let (h, v) = fov_extents(500.0, &cam());
        // 1000 tan(29.2 deg), 1000 tan(20 deg)
        assert!((h - 558.8811).abs() < 1e-3, "{h}");
        assert!((v - 363.9702).abs() < 1e-3, "{v}");
        let wide = CameraSpec::from_degrees(90.0, 40.0, 30.0);
        assert!((fov_extents(30.0, &wide).0 - 60.0).abs() < 1e-12);
    }

    #[test]
    fn footprint_examples() {
        let r = fov_rect(&suav_at(Position3D::new(0.0, 0.0, 0.0)));
        assert_eq!((r.x_min, r.x_max, r.y_min, r.y_max), (0.0, 0.0, 0.0, 0.0));
        let r = fov_rect(&suav_at(Position3D::new(500.0, 500.0, 500.0)));
        assert!((r.x_min - (500.0 - 279.4406)).abs() < 1e-3);
        assert!((r.y_max - (500.0 + 181.9851)).abs() < 1e-3);
        assert!(r.contains(500.0, 500.0));
    }

    #[test]
    fn coverage_boundary_and_outside() {
        let s = suav_at(Position3D::new(200.0, 300.0, 500.0));
        assert!(covers(&s, &target(200.0, 300.0), true));
        let (h, _) = fov_extents(500.0, &cam());
        assert!(!covers(&s, &target(200.0 + h / 2.0 + 1.0, 300.0), true));
        // Closed boundary.
        let r = fov_rect(&s);
        assert!(covers(&s, &target(r.x_max, r.y_min), true));
    }

    #[test]
    fn reposition_rules() {
        let s = suav_at(Position3D::new(400.0, 400.0, 500.0));
        assert_eq!(reposition(&s, &[target(100.0, 100.0)]), Position3D::new(100.0, 100.0, 30.0));
        assert_eq!(reposition(&s, &[]), s.initial_pos);
        let p = reposition(&s, &[target(0.0, 0.0), target(200.0, 0.0)]);
        assert_eq!((p.x, p.y), (100.0, 0.0));
        // 100 / tan(29.2 deg) + 30
        assert!((p.h - 208.9289).abs() < 1e-3, "{}", p.h);
    }

    #[test]
    fn mask_rejects_uncovered_target() {
        let mut sc = small_scenario();
        sc.targets.push(Target { id: 1, pos: Position3D::new(5000.0, 5000.0, 0.0) });
        assert!(matches!(feasible_association_mask(&sc), Err(Error::InfeasibleScenario(_))));
    }

    #[test]
    fn whole_area_view_gives_full_mask() {
        let mut sc = small_scenario();
        sc.suavs[0].initial_pos.h = 5000.0;
        sc.targets = (0..5).map(|i| Target { id: i, pos: Position3D::new(100.0 * i as f64, 900.0, 0.0) }).collect();
        let mask = feasible_association_mask(&sc).unwrap();
        assert!(mask.iter().all(|r| r.iter().all(|&m| m)));
    }

    fn small_scenario() -> Scenario {
        let cfg = ExperimentConfig { n_suavs: 1, n_targets: 1, n0_cap: 1, ..ExperimentConfig::default() };
        generate_scenario(&cfg, 3).unwrap()
    }

    #[test]
    fn generator_is_deterministic_and_valid() {
        let cfg = ExperimentConfig::default();
        let a = generate_scenario(&cfg, 11).unwrap();
        let b = generate_scenario(&cfg, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_suavs(), 8);
        assert_eq!(a.n_targets(), 20);
        a.validate().unwrap();
        for t in &a.targets {
            assert!(a.suavs.iter().any(|s| covers(s, t, true)));
        }
        for s in &a.suavs {
            assert!(s.chunk_bits >= 200.0 * 8192.0 && s.chunk_bits <= 300.0 * 8192.0);
        }
    }

    #[test]
    fn default_grid_covers_area() {
        let (cols, rows) = grid_layout(8, 1000.0, 500.0, &cam());
        assert_eq!((cols, rows), (2, 4));
        let (h, v) = fov_extents(500.0, &cam());
        assert!((axis_coverage(1000.0, cols, h) - 1000.0).abs() < 1e-9);
        assert!((axis_coverage(1000.0, rows, v) - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn single_suav_is_centered() {
        let sc = small_scenario();
        assert_eq!(sc.suavs[0].initial_pos, Position3D::new(500.0, 500.0, 500.0));
        assert_eq!(sc.targets.len(), 1);
    }

    #[test]
    fn chunk_prefix_is_stable_across_chunk_counts() {
        let one = ExperimentConfig { n_chunks: 1, ..ExperimentConfig::default() };
        let three = ExperimentConfig { n_chunks: 3, ..ExperimentConfig::default() };
        let a = generate_scenario(&one, 5).unwrap();
        let b = generate_scenario(&three, 5).unwrap();
        assert_eq!(a.targets, b.targets);
        assert_ne!(a.suavs[0].chunk_bits, b.suavs[0].chunk_bits);
    }

    #[test]
    fn text_round_trip() {
        let sc = generate_scenario(&ExperimentConfig::default(), 2).unwrap();
        let back = Scenario::from_text(&sc.to_text()).unwrap();
        assert_eq!(sc, back);
    }

    #[test]
    fn deploy_idles_unassigned() {
        let sc = generate_scenario(&ExperimentConfig::default(), 4).unwrap();
        let mask = feasible_association_mask(&sc).unwrap();
        let choice: Vec<usize> = mask.iter().map(|r| r.iter().position(|&m| m).unwrap()).collect();
        let assoc = Association::from_choice(&choice, mask);
        assoc.validate().unwrap();
        let fleet = sc.deploy(&assoc.alpha, Mobility::Adaptive);
        for (n, s) in fleet.iter().enumerate() {
            let used = assoc.assigned_to(n).count() > 0;
            assert_eq!(s.is_active(), used);
            if !used {
                assert_eq!(s.current_pos, s.initial_pos);
            }
        }
        let fixed = sc.deploy(&assoc.alpha, Mobility::Static);
        assert!(fixed.iter().all(|s| s.current_pos == s.initial_pos));
    }

    fn arb_targets() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.0..1000.0f64, 0.0..1000.0f64), 1..12)
    }

    proptest! {
        #[test]
        fn assigned_targets_are_strictly_inside(pts in arb_targets()) {
            let s = suav_at(Position3D::new(500.0, 500.0, 500.0));
            let ts: Vec<Target> = pts.iter().map(|&(x, y)| target(x, y)).collect();
            let mut moved = s.clone();
            moved.current_pos = reposition(&s, &ts);
            let rect = fov_rect(&moved);
            for t in &ts {
                prop_assert!(rect.contains_strictly(t.pos.x, t.pos.y));
            }
        }

        #[test]
        fn reposition_ignores_start(pts in arb_targets(), x in 0.0..1000.0f64, h in 10.0..900.0f64) {
            let ts: Vec<Target> = pts.iter().map(|&(x, y)| target(x, y)).collect();
            let a = suav_at(Position3D::new(500.0, 500.0, 500.0));
            let mut b = a.clone();
            b.current_pos = Position3D::new(x, 10.0, h);
            prop_assert_eq!(reposition(&a, &ts), reposition(&b, &ts));
        }

        #[test]
        fn altitude_monotone_under_inclusion(pts in prop::collection::vec((0.0..1000.0f64, 0.0..1000.0f64), 2..12), extra in (0.0..1000.0f64, 0.0..1000.0f64)) {
            let s = suav_at(Position3D::new(500.0, 500.0, 500.0));
            let ts: Vec<Target> = pts.iter().map(|&(x, y)| target(x, y)).collect();
            let mut more = ts.clone();
            more.push(target(extra.0, extra.1));
            prop_assert!(reposition(&s, &more).h >= reposition(&s, &ts).h);
        }
    }
}
