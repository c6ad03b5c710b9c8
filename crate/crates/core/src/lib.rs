//! Channel assignment planning and evaluation for multi-radio multi-channel
//! grid wireless mesh networks.
//!
//! The crate builds grid topologies, assigns channels with the NOCAG
//! heuristic or one of two baselines (exhaustive search and a link-ordered
//! greedy scheme), scores assignments by interference and channel fairness,
//! and computes an interference-free throughput bound for the standard
//! row/column traffic pattern.

pub mod assignment;
pub mod baselines;
pub mod capacity;
pub mod conflict;
pub mod error;
pub mod metrics;
pub mod nocag;
pub mod topology;

pub use assignment::{validate, Channel, ChannelAssignment, ChannelSet, ValidityReport};
pub use baselines::{assign_bfca, assign_cca, BfcaOutcome, SearchBudget};
pub use capacity::{build_scenario, upper_bound, CapacityBound, Rate, TrafficScenario};
pub use conflict::{active_conflicts, build_conflict_graph, ConflictGraph};
pub use error::{Error, Result};
pub use metrics::{compare, evaluate, MetricReport};
pub use nocag::{assign_nocag, step_count, NocagTrace};
pub use topology::{load_topology, make_grid, save_topology, GridSpec, Link, NodeId, Topology};
