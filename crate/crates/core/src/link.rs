//! Free-space air-to-air link between an S-UAV and the relay.
//!
//! The channel gain is `rho0 / d^2` with `rho0` the gain at the 1 m reference
//! distance, and the achievable rate is the Shannon capacity
//! `B log2(1 + gamma1 / d^2)` with `gamma1 = rho0 p / sigma^2`.
//!
//! For the relay placement the rate is replaced by its first-order expansion
//! in the squared distance around a reference point. The rate is convex in the
//! squared distance, so the expansion is a global lower bound that touches the
//! true rate at the reference point, and it is a concave quadratic in the
//! relay position.

use std::f64::consts::LOG2_E;

use crate::error::{Error, Result};
use crate::scenario::Position3D;

/// Links shorter than this are rejected rather than extrapolated.
pub const MIN_LINK_DISTANCE_M: f64 = 1.0;

/// Physical constants shared by every link and processor, in linear SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsConstants {
    pub bandwidth_hz: f64,
    /// Channel gain at the 1 m reference distance.
    pub rho0: f64,
    pub noise_w: f64,
    pub f0_cycles_per_bit: f64,
    /// Effective switched capacitance of the processors.
    pub zeta: f64,
}

impl PhysicsConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("bandwidth_hz", self.bandwidth_hz),
            ("rho0", self.rho0),
            ("noise_w", self.noise_w),
            ("f0_cycles_per_bit", self.f0_cycles_per_bit),
            ("zeta", self.zeta),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InfeasibleScenario(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for PhysicsConstants {
    fn default() -> Self {
        Self {
            bandwidth_hz: 10e6,
            rho0: db_to_linear(-60.0),
            noise_w: dbm_to_watts(-114.0),
            f0_cycles_per_bit: 1000.0,
            zeta: 1e-28,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Receive SNR at 1 m, `rho0 p / sigma^2`, in m^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrCoeff {
    pub gamma1: f64,
}

pub fn snr_coeff(p_w: f64, rho0: f64, noise_w: f64) -> SnrCoeff {
    SnrCoeff { gamma1: rho0 * p_w / noise_w }
}

fn guarded_dist_sq(a: &Position3D, b: &Position3D) -> Result<f64> {
    let d2 = a.dist_sq(b);
    if d2 < MIN_LINK_DISTANCE_M * MIN_LINK_DISTANCE_M {
        return Err(Error::DegenerateGeometry { distance: d2.sqrt() });
    }
    Ok(d2)
}

pub fn channel_gain(q_n: &Position3D, q_m: &Position3D, rho0: f64) -> Result<f64> {
    Ok(rho0 / guarded_dist_sq(q_n, q_m)?)
}

/// Shannon rate in bits/s as a function of the squared distance.
pub fn rate_at_dist_sq(dist_sq: f64, constants: &PhysicsConstants, snr: SnrCoeff) -> f64 {
    constants.bandwidth_hz * (snr.gamma1 / dist_sq).ln_1p() * LOG2_E
}

pub fn rate(q_n: &Position3D, q_m: &Position3D, constants: &PhysicsConstants, snr: SnrCoeff) -> Result<f64> {
    Ok(rate_at_dist_sq(guarded_dist_sq(q_n, q_m)?, constants, snr))
}

/// Largest rate the model allows, reached at the reference distance.
pub fn max_rate(constants: &PhysicsConstants, snr: SnrCoeff) -> f64 {
    rate_at_dist_sq(MIN_LINK_DISTANCE_M * MIN_LINK_DISTANCE_M, constants, snr)
}

/// Coefficients of the rate expansion around a reference relay position:
/// `R_hat(q) = a - i (|q_n - q|^2 - ref_dist_sq)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorCoeffs {
    /// Rate at the reference point.
    pub a: f64,
    /// Negated slope of the rate in the squared distance; always positive.
    pub i: f64,
    /// Squared distance from the S-UAV to the reference point.
    pub ref_dist_sq: f64,
}

impl TaylorCoeffs {
    pub fn at(q_n: &Position3D, q_ref: &Position3D, constants: &PhysicsConstants, snr: SnrCoeff) -> Result<Self> {
        let d2 = guarded_dist_sq(q_n, q_ref)?;
        let a = rate_at_dist_sq(d2, constants, snr);
        let i = constants.bandwidth_hz * snr.gamma1 * LOG2_E / (d2 * (d2 + snr.gamma1));
        Ok(Self { a, i, ref_dist_sq: d2 })
    }

    pub fn eval_dist_sq(&self, dist_sq: f64) -> f64 {
        self.a - self.i * (dist_sq - self.ref_dist_sq)
    }

    /// Largest squared distance at which the bound still reaches `lambda`.
    pub fn radius_sq_for(&self, lambda: f64) -> f64 {
        self.ref_dist_sq + (self.a - lambda) / self.i
    }
}

pub fn rate_lower_bound(
    q_n: &Position3D,
    q_m: &Position3D,
    q_m_ref: &Position3D,
    constants: &PhysicsConstants,
    snr: SnrCoeff,
) -> Result<f64> {
    let coeffs = TaylorCoeffs::at(q_n, q_m_ref, constants, snr)?;
    let d2 = guarded_dist_sq(q_n, q_m)?;
    Ok(coeffs.eval_dist_sq(d2))
}
