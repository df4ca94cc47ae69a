//! Deterministic human-swarm joint-agent simulation and competence
//! evaluation.
//!
//! The world advances in discrete steps; every agent acts through a
//! decision matrix on its own local percept. Batches of episodes over a
//! situation space are scored as effectiveness times resource efficiency
//! and compared across human-only, swarm-only and joint allocations.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod competence;
pub mod geom;
pub mod operator;
pub mod rng;
pub mod scenario;
pub mod swarm;
pub mod world;
