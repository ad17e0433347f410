//! Experiment configuration as a `key = value` text document.
//!
//! Every key is optional and falls back to the reference parameter set
//! (1 km x 1 km area, 8 S-UAVs, 20 targets, 10 MHz, 0.8 W, 0.2/2 GHz, ...).
//! Gains are written in dB/dBm and converted to linear units once, when the
//! physics constants are built.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::link::{db_to_linear, dbm_to_watts, PhysicsConstants};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub area_m: f64,
    pub n_suavs: usize,
    pub n_targets: usize,
    pub bandwidth_hz: f64,
    pub tx_power_w: f64,
    pub cpu_suav_hz: f64,
    pub cpu_ruav_hz: f64,
    /// Chunk size range in KB.
    pub chunk_kb_range: (f64, f64),
    /// Bits per KB used for chunk sizes.
    pub bits_per_kb: f64,
    pub n_chunks: usize,
    pub phi_h_deg: f64,
    pub phi_v_deg: f64,
    pub n0_cap: usize,
    pub f0_cycles_per_bit: f64,
    pub rho0_db: f64,
    pub noise_dbm: f64,
    pub gamma_m: f64,
    pub zeta: f64,
    /// Processed-to-raw chunk size ratio.
    pub mu: f64,
    pub initial_altitude_m: f64,
    /// Relay box as `lo_x, lo_y, lo_h, hi_x, hi_y, hi_h`.
    pub ruav_box: [f64; 6],
    pub suav_energy_budget_j: f64,
    pub suav_hover_energy_j: f64,
    pub ruav_energy_budget_j: f64,
    pub ruav_hover_energy_j: f64,
    pub seeds: Vec<u64>,
    /// Outer-loop convergence tolerance, seconds.
    pub tol: f64,
    pub r_max: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            area_m: 1000.0,
            n_suavs: 8,
            n_targets: 20,
            bandwidth_hz: 10e6,
            tx_power_w: 0.8,
            cpu_suav_hz: 0.2e9,
            cpu_ruav_hz: 2e9,
            chunk_kb_range: (200.0, 300.0),
            bits_per_kb: 8192.0,
            n_chunks: 3,
            phi_h_deg: 58.4,
            phi_v_deg: 40.0,
            n0_cap: 4,
            f0_cycles_per_bit: 1000.0,
            rho0_db: -60.0,
            noise_dbm: -114.0,
            gamma_m: 30.0,
            zeta: 1e-28,
            mu: 0.2,
            initial_altitude_m: 500.0,
            ruav_box: [0.0, 0.0, 100.0, 1000.0, 1000.0, 1000.0],
            suav_energy_budget_j: 1e3,
            suav_hover_energy_j: 0.0,
            ruav_energy_budget_j: 1e3,
            ruav_hover_energy_j: 0.0,
            seeds: (0..20).collect(),
            tol: 1e-3,
            r_max: 20,
        }
    }
}

const KEYS: &[&str] = &[
    "area_m",
    "n_suavs",
    "n_targets",
    "bandwidth_hz",
    "tx_power_w",
    "cpu_suav_hz",
    "cpu_ruav_hz",
    "chunk_kb_range",
    "bits_per_kb",
    "n_chunks",
    "phi_h_deg",
    "phi_v_deg",
    "n0_cap",
    "f0_cycles_per_bit",
    "rho0_db",
    "noise_dbm",
    "gamma_m",
    "zeta",
    "mu",
    "initial_altitude_m",
    "ruav_box",
    "suav_energy_budget_j",
    "suav_hover_energy_j",
    "ruav_energy_budget_j",
    "ruav_hover_energy_j",
    "seeds",
    "tol",
    "r_max",
];

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { key: key.to_string(), message: message.into() }
}

impl ExperimentConfig {
    pub fn physics(&self) -> PhysicsConstants {
        PhysicsConstants {
            bandwidth_hz: self.bandwidth_hz,
            rho0: db_to_linear(self.rho0_db),
            noise_w: dbm_to_watts(self.noise_dbm),
            f0_cycles_per_bit: self.f0_cycles_per_bit,
            zeta: self.zeta,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("area_m", self.area_m),
            ("bandwidth_hz", self.bandwidth_hz),
            ("tx_power_w", self.tx_power_w),
            ("cpu_suav_hz", self.cpu_suav_hz),
            ("cpu_ruav_hz", self.cpu_ruav_hz),
            ("bits_per_kb", self.bits_per_kb),
            ("phi_h_deg", self.phi_h_deg),
            ("phi_v_deg", self.phi_v_deg),
            ("f0_cycles_per_bit", self.f0_cycles_per_bit),
            ("gamma_m", self.gamma_m),
            ("zeta", self.zeta),
            ("mu", self.mu),
            ("initial_altitude_m", self.initial_altitude_m),
            ("suav_energy_budget_j", self.suav_energy_budget_j),
            ("ruav_energy_budget_j", self.ruav_energy_budget_j),
            ("tol", self.tol),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(key, format!("must be positive, got {v}")));
            }
        }
        for (key, v) in [
            ("rho0_db", self.rho0_db),
            ("noise_dbm", self.noise_dbm),
            ("suav_hover_energy_j", self.suav_hover_energy_j),
            ("ruav_hover_energy_j", self.ruav_hover_energy_j),
        ] {
            if !v.is_finite() || (key.ends_with("_j") && v < 0.0) {
                return Err(invalid(key, format!("got {v}")));
            }
        }
        if self.mu >= 1.0 {
            return Err(invalid("mu", "must be below 1"));
        }
        if self.phi_h_deg >= 180.0 || self.phi_v_deg >= 180.0 {
            return Err(invalid(if self.phi_h_deg >= 180.0 { "phi_h_deg" } else { "phi_v_deg" }, "must be below 180"));
        }
        let (lo, hi) = self.chunk_kb_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(invalid("chunk_kb_range", "needs 0 < min <= max"));
        }
        if self.n_suavs == 0 {
            return Err(invalid("n_suavs", "must be at least 1"));
        }
        if self.n_targets < self.n_suavs {
            return Err(invalid("n_targets", "must be at least n_suavs"));
        }
        if self.n_chunks == 0 {
            return Err(invalid("n_chunks", "must be at least 1"));
        }
        if self.n0_cap > self.n_suavs {
            return Err(invalid("n0_cap", "cannot exceed n_suavs"));
        }
        if self.r_max == 0 {
            return Err(invalid("r_max", "must be at least 1"));
        }
        let b = self.ruav_box;
        if b.iter().any(|v| !v.is_finite()) || b[0] > b[3] || b[1] > b[4] || b[2] > b[5] || b[2] < 0.0 {
            return Err(invalid("ruav_box", "needs finite lo <= hi with lo_h >= 0"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "needs at least one seed"));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::Parse { line, message: "expected `key = value`".into() })?;
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                ConfigError::Parse { message, .. } => ConfigError::Parse { line, message },
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Assigns one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let perr = |m: String| ConfigError::Parse { line: 0, message: m };
        let float = |v: &str| v.trim().parse::<f64>().map_err(|_| perr(format!("`{key}`: `{v}` is not a number")));
        let count = |v: &str| v.trim().parse::<usize>().map_err(|_| perr(format!("`{key}`: `{v}` is not a count")));
        let floats = |v: &str| v.split(',').map(float).collect::<Result<Vec<f64>, _>>();
        match key {
            "area_m" => self.area_m = float(value)?,
            "n_suavs" => self.n_suavs = count(value)?,
            "n_targets" => self.n_targets = count(value)?,
            "bandwidth_hz" => self.bandwidth_hz = float(value)?,
            "tx_power_w" => self.tx_power_w = float(value)?,
            "cpu_suav_hz" => self.cpu_suav_hz = float(value)?,
            "cpu_ruav_hz" => self.cpu_ruav_hz = float(value)?,
            "chunk_kb_range" => {
                let v = floats(value)?;
                if v.len() != 2 {
                    return Err(perr("`chunk_kb_range` needs `min, max`".into()));
                }
                self.chunk_kb_range = (v[0], v[1]);
            }
            "bits_per_kb" => self.bits_per_kb = float(value)?,
            "n_chunks" => self.n_chunks = count(value)?,
            "phi_h_deg" => self.phi_h_deg = float(value)?,
            "phi_v_deg" => self.phi_v_deg = float(value)?,
            "n0_cap" => self.n0_cap = count(value)?,
            "f0_cycles_per_bit" => self.f0_cycles_per_bit = float(value)?,
            "rho0_db" => self.rho0_db = float(value)?,
            "noise_dbm" => self.noise_dbm = float(value)?,
            "gamma_m" => self.gamma_m = float(value)?,
            "zeta" => self.zeta = float(value)?,
            "mu" => self.mu = float(value)?,
            "initial_altitude_m" => self.initial_altitude_m = float(value)?,
            "ruav_box" => {
                let v = floats(value)?;
                self.ruav_box = v.try_into().map_err(|_| perr("`ruav_box` needs six values".into()))?;
            }
            "suav_energy_budget_j" => self.suav_energy_budget_j = float(value)?,
            "suav_hover_energy_j" => self.suav_hover_energy_j = float(value)?,
            "ruav_energy_budget_j" => self.ruav_energy_budget_j = float(value)?,
            "ruav_hover_energy_j" => self.ruav_hover_energy_j = float(value)?,
            "seeds" => self.seeds = parse_seeds(value).ok_or_else(|| perr(format!("`seeds`: cannot parse `{value}`")))?,
            "tol" => self.tol = float(value)?,
            "r_max" => self.r_max = count(value)?,
            other => {
                return Err(ConfigError::Validation { key: other.to_string(), message: "unknown key".into() });
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let value = match *key {
                "area_m" => num(self.area_m),
                "n_suavs" => self.n_suavs.to_string(),
                "n_targets" => self.n_targets.to_string(),
                "bandwidth_hz" => num(self.bandwidth_hz),
                "tx_power_w" => num(self.tx_power_w),
                "cpu_suav_hz" => num(self.cpu_suav_hz),
                "cpu_ruav_hz" => num(self.cpu_ruav_hz),
                "chunk_kb_range" => format!("{}, {}", num(self.chunk_kb_range.0), num(self.chunk_kb_range.1)),
                "bits_per_kb" => num(self.bits_per_kb),
                "n_chunks" => self.n_chunks.to_string(),
                "phi_h_deg" => num(self.phi_h_deg),
                "phi_v_deg" => num(self.phi_v_deg),
                "n0_cap" => self.n0_cap.to_string(),
                "f0_cycles_per_bit" => num(self.f0_cycles_per_bit),
                "rho0_db" => num(self.rho0_db),
                "noise_dbm" => num(self.noise_dbm),
                "gamma_m" => num(self.gamma_m),
                "zeta" => num(self.zeta),
                "mu" => num(self.mu),
                "initial_altitude_m" => num(self.initial_altitude_m),
                "ruav_box" => self.ruav_box.iter().map(|v| num(*v)).collect::<Vec<_>>().join(", "),
                "suav_energy_budget_j" => num(self.suav_energy_budget_j),
                "suav_hover_energy_j" => num(self.suav_hover_energy_j),
                "ruav_energy_budget_j" => num(self.ruav_energy_budget_j),
                "ruav_hover_energy_j" => num(self.ruav_hover_energy_j),
                "seeds" => self.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(", "),
                "tol" => num(self.tol),
                "r_max" => self.r_max.to_string(),
                _ => unreachable!(),
            };
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ConfigError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Shortest round-trip representation.
fn num(v: f64) -> String {
    format!("{v:?}")
}

/// `a..b` (half-open), `a..=b`, or a comma-separated list.
fn parse_seeds(value: &str) -> Option<Vec<u64>> {
    if let Some((a, b)) = value.split_once("..=") {
        let (a, b) = (a.trim().parse::<u64>().ok()?, b.trim().parse::<u64>().ok()?);
        return Some((a..=b).collect());
    }
    if let Some((a, b)) = value.split_once("..") {
        let (a, b) = (a.trim().parse::<u64>().ok()?, b.trim().parse::<u64>().ok()?);
        return Some((a..b).collect());
    }
    value.split(',').map(|s| s.trim().parse::<u64>().ok()).collect()
}
