//! Negative binomial method-of-moments estimation with joint confidence
//! regions for the mean `mu` and shape `P`.
//!
//! The distribution is parametrized as `NB(mu, P)` with mean `mu` and variance
//! `mu (1 + P)`; `P = 0` is the Poisson limit. Estimates are formed on the
//! log scale, `ln mu` and `ln(P + 1)`, where the sampling distribution is close
//! to bivariate normal, then decorrelated so the region becomes a disc of
//! radius `sqrt(-2 ln delta)` in standardized coordinates.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, rendering,
//! parallel drivers and the command line live in the `nb-region` crate.
//!
//! Historical note: the older "trials until the k-th success" variant of the
//! distribution is not modeled; counts here are failures before the
//! `alpha`-th success.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;

pub mod contour;
pub mod estimators;
pub mod model;
pub mod region;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result};
pub use estimators::{AsymptoticMoments, EstimateResult, Regime, SampleStats};
pub use model::{ClassicParams, NbParams, RawMoments, SamplingMoments};
pub use region::{ConfidenceLevel, ContourGrid, GridSpec, RegionProblem};
pub use simulate::SeededStream;
pub use verify::{CoverageReport, UnderdispersionReport};
