//! Files, clocks, threads and the command line around `altour-core`.
//!
//! - [`dataset`] and [`results`]: the experiment CSV formats
//! - [`driver`]: wall-clock and multi-worker exact solving
//! - [`bench`]: batch runs that write results, stats and plots
//! - [`external`]: the export/solve/cut loop for outside MIP solvers
//! - [`lpfile`]: reads LP files back and solves them (the built-in stand-in solver)
//! - [`report`]: scaling summaries over results files
//! - [`svg`]: tour plots

pub mod bench;
pub mod dataset;
pub mod driver;
pub mod error;
pub mod external;
pub mod lpfile;
pub mod report;
pub mod results;
pub mod svg;

pub use error::{AppError, Result};
