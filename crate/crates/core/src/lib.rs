//! Downlink distributed MIMO over a segmented fronthaul mesh.
//!
//! The pipeline for one channel realization is:
//!
//! 1. pick a serving RU subset and an aggregating RU (ARU) per UE ([`grouping`]),
//! 2. route DU → ARU and ARU → serving RUs over capacity-limited segments ([`routing`]),
//! 3. drop the RU–UE links (or whole UEs) that could not be routed ([`association`]),
//! 4. compute centralized zero-forcing precoders on the surviving links and
//!    evaluate per-UE SINR ([`precoding`]).
//!
//! [`simulator`] runs seeded batches of realizations and [`metrics`] turns them
//! into distribution tables.

pub mod association;
pub mod channel;
pub mod error;
pub mod grouping;
pub mod metrics;
pub mod precoding;
pub mod routing;
pub mod simulator;
pub mod topology;

pub use error::{Error, Result};
