//! Pre-planned backup detours for single link/node failures, and a
//! deterministic simulator of the crankback recovery mechanism that
//! activates them.
//!
//! The pipeline is: load or generate a [`topology::Topology`], derive all
//! edge-to-edge demands and capacity-constrained shortest primary paths
//! ([`routing`]), enumerate failure detection events and their survivor
//! loads ([`scenario`]), build a MILP for the chosen protection model
//! ([`model`]), solve it ([`solver`]), decode the solution into a
//! [`plan::BackupPlan`], score it ([`metrics`]), and replay every failure in
//! the stateful-switch simulator ([`sim`]). [`experiment`] ties the stages
//! into reproducible runs.

pub mod error;
pub mod experiment;
pub mod metrics;
pub mod model;
pub mod plan;
pub mod routing;
pub mod scenario;
pub mod sim;
pub mod solver;
pub mod topology;

pub use error::{Error, Result};
