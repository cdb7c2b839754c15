//! Joint assignment and routing over alternating item/placeholder tours.
//!
//! `n` items must each be carried to one of `n` placeholders by a single
//! agent. A solution is one closed tour over all `2n` nodes that alternates
//! between items and placeholders; the direction of travel fixes which
//! placeholder receives which item.
//!
//! Node ids follow one convention across the crate: item `i` is node `i`,
//! placeholder `p` is node `n + p`.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, wall-clock
//! timing and threads live in the `altour` companion crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;

pub mod clock;
pub mod exact;
pub mod heuristics;
pub mod instance;
pub mod model;
pub mod oracle;
pub mod problem;
pub mod relaxation;
pub mod tour;

pub use clock::{Clock, NoClock};
pub use error::{Error, Result};
pub use instance::{CostMatrix, Instance, NodeTypes, Point};
pub use problem::{Compat, Edge, Problem};
pub use tour::{CycleSolution, SolveStats};

/// Absolute tolerance used for cost comparisons throughout the solver.
pub const COST_EPS: f64 = 1e-9;
