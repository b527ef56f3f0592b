//! Bayesian hierarchical GEV regression for regional flood frequency analysis.

pub mod error;
pub mod gev;
pub mod io;
pub mod local;
pub mod model;
pub mod prediction;
pub mod proposal;
pub mod run;
pub mod sampler;
pub mod scalar;
pub mod selection;
pub mod simulate;
pub mod special;
pub mod validation;

pub use error::{Error, Result};
pub use gev::GevParams;
pub use model::{Dataset, GevParam, HierState, Priors, RegressionBlock, Station, StationRecord};
pub use scalar::Real;

/// Double-precision GEV parameters.
pub type Gev64 = GevParams<f64>;
/// Single-precision GEV parameters.
pub type Gev32 = GevParams<f32>;
