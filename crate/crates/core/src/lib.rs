//! Power-constrained Turbo frequency assignment for many-core processors.
//!
//! * [`model`]: frequency ladders, power models and P-state tables.
//! * [`solver`]: exact, greedy, brute-force and table-lookup assignment.
//! * [`governor`]: OS request policies and Turbo arbiters.
//! * [`sim`]: a tick-driven simulator with emulated cycle counters.
//! * [`trace_io`]: utilization trace parsing, generation and output.
//! * [`cli`]: the `turboscale` command line.

pub mod cli;
pub mod error;
pub mod governor;
pub mod model;
pub mod sim;
pub mod solver;
pub mod trace_io;

pub use error::{Error, Result};
