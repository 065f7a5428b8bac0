//! Extremal dependence between two groups of components of a random vector.
//!
//! The crate computes exact tail functionals for several model families
//! ([`models`]), simulates from them ([`simulate`]), estimates the stable tail
//! dependence function, extremal coefficients and the upper-tail dependence
//! function from data with simple moment estimators ([`estimate`]), checks
//! those estimators by Monte Carlo ([`validate`]) and runs a block-maxima
//! workflow on daily price data ([`pipeline`]).

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimate;
pub mod models;
pub mod normal;
pub mod pipeline;
pub mod sample;
pub mod simulate;
pub mod stats;
pub mod validate;

pub use error::{Error, Result};
pub use estimate::{Estimate, EstimatorKind};
pub use models::{ModelSpec, TailFunctionals};
pub use sample::{
    make_index_pair, IndexPair, Margin, Margins, Provenance, PseudoSample, RawSample,
};
pub use simulate::{Seed, SimOutput};
