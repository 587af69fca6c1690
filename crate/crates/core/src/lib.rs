//! Lot sizing and scheduling on unrelated parallel machines with
//! sequence-dependent setups, setup carryover, backorders and warehouse
//! capacity.
//!
//! The crate builds the mixed-integer model from an [`Instance`], solves it
//! with an embedded LP-based branch-and-bound ([`milp`]) and implements the
//! relax-and-fix heuristic ([`rf`]) with the partition strategies of
//! [`strategy`]. [`generator`] draws seeded random instances and [`bench`]
//! runs comparison sweeps.

pub mod bench;
pub mod generator;
pub mod instance;
pub mod milp;
pub mod model;
pub mod rf;
pub mod strategy;

pub use instance::{load_instance, save_instance, IndexTriple, Instance, InstanceError};
