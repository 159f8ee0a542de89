//! Failure-localization capability of monitor-probed networks.
//!
//! The crate computes how many simultaneous node failures can be uniquely
//! localized from binary end-to-end path measurements, under three probing
//! mechanisms:
//!
//! * **CAP**: controllable arbitrary paths; probes are walks between
//!   monitors and may revisit nodes.
//! * **CSP**: controllable simple paths between monitors.
//! * **UP**: uncontrollable paths; a fixed measurement path set is given.
//!
//! [`csp`] and [`up`] compute the polynomial-time bounds (vertex-cut based
//! for CAP/CSP, set-cover based for UP). [`oracle`] decides identifiability
//! from the definition on small instances and is the ground truth the bounds
//! are checked against. [`topogen`] draws random topologies and
//! [`experiment`] drives seeded Monte Carlo sweeps that emit CSV.

pub mod bounds;
pub mod checks;
pub mod cover;
pub mod csp;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod formats;
pub mod graph;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod topogen;
pub mod up;

pub use bounds::{Applicability, IdentSetBounds, MechanismKind, OmegaInterval, Verdict};
pub use error::{Error, Result};
pub use graph::{Adjacency, AuxGraph, CutValue, NodeId, Topology, TopologyBuilder};
