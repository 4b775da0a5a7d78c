//! Multipath channel estimation: recover per-path delays and attenuations
//! from a received record and a known pulse by minimising a thresholded
//! frequency-domain least-squares error with a binary genetic algorithm.

pub mod bench;
pub mod error;
pub mod error_fn;
pub mod estimator;
pub mod ga;
pub mod seed;
pub mod signal;
pub mod spectral;

pub use error::{Error, Result};
