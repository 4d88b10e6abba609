//! Universal densities for entropy rate estimation and sequence prediction.
//!
//! This crate implements two families of universal densities and the
//! estimators and predictors they induce:
//!
//! - **Adaptive Markov mixtures** over a finite alphabet: per-order adaptive
//!   models with Laplace smoothing, mixed over all Markov orders with the
//!   weights `w_k = 1/(k+1) - 1/(k+2)`. The mixture is exactly computable
//!   because all orders beyond the longest repeated substring collapse to
//!   the uniform value.
//! - **Quantization mixtures**: densities relative to a finite reference
//!   measure, obtained by mixing, over all levels of a nested partition
//!   filtration, the per-level Markov mixture evaluated on the quantized
//!   sample divided by the product of reference cell masses.
//!
//! On top of these the crate provides entropy rate estimators for finite
//! alphabets, countably infinite alphabets (with a cross-entropy
//! correction), and real-valued processes (with a Gaussian reference
//! correction), a Cesàro-mean conditional distribution estimator, and the
//! induced maximum-probability predictor evaluated under the 0-1 loss.
//!
//! The `harness` module wires everything into reproducible experiments and
//! backs the `entrod` command line tool; `selftest` hosts the verification
//! battery behind `entrod selftest` and the `acceptance` test suite.

pub mod core;
pub mod error;
pub mod harness;
pub mod npd;
pub mod ppm;
pub mod prediction;
pub mod quantization;
pub mod selftest;
pub mod sources;

pub use error::{Error, Result};
