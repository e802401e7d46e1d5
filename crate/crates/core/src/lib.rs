//! Sequence classifiers for heavily imbalanced charge-history data.
//!
//! The crate contains a small reverse-mode autodiff engine ([`autodiff`]),
//! the neural baselines built on it ([`nn`]), a complex-valued
//! density-matrix classifier ([`qicvn`]), a synthetic data generator plus
//! ingestion and sequence construction ([`data`]), training and metrics
//! ([`train`]), and post-hoc interpretability reports ([`explain`]).

pub mod autodiff;
pub mod nn;
pub mod data;
pub mod qicvn;
pub mod rng;
pub mod error;

pub use autodiff::{Tensor, TensorJson};
pub use error::{Error, Result};
