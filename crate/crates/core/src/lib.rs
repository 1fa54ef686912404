//! Integral-transform estimators of spectral densities: Fejer, qubitized Fejer,
//! Gaussian (via Chebyshev expansion) and Jackson kernels, classical simulators
//! of the measurement primitives, sample-budget planners and accuracy metrics.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cheb;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod kernels;
pub mod metrics;
pub mod quad;
pub mod sampler;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
