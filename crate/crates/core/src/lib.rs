//! Exact computations with ideals on countable sets.

pub mod bw;
pub mod ideals;
pub mod point;
pub mod reductions;
pub mod score;
pub mod setexpr;
pub mod vdw;

/// Version tag of every JSON report.
pub const SCHEMA_VERSION: &str = "idealab/1";
