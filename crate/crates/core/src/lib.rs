//! Min-max video latency optimization for UAV-assisted search and rescue.
//!
//! Surveillance UAVs (S-UAVs) film targets and either process their video
//! chunk on board or offload it to a relay UAV (R-UAV) with an edge server.
//! The solver alternates between the offloading decision, the relay position
//! and the target association to minimize the largest per-S-UAV latency.

pub mod association;
pub mod config;
pub mod cost;
pub mod error;
pub mod experiment;
pub mod link;
pub mod lp;
pub mod offload;
pub mod oracle;
pub mod orchestrator;
pub mod placement;
pub mod scenario;

pub use error::{Error, Result};
