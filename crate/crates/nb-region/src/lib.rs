//! IO, file formats and parallel drivers on top of `nb-region-core`.
//!
//! * [`countfile`] reads whitespace-separated count samples.
//! * [`render`] writes contour grids as CSV or SVG.
//! * [`report`] writes Monte Carlo reports as CSV.
//! * [`parallel`] runs replicates and grid points on a rayon pool; results
//!   are identical to the sequential paths in the core crate.

pub mod countfile;
pub mod format;
pub mod parallel;
pub mod render;
pub mod report;

pub use nb_region_core as core;
