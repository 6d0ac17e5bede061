//! Adaptive spectral shaping for graph signals.
//!
//! A learnable filter family built from a shared baseline kernel `g(λ)`
//! modulated by Gaussian shaping components, applied either exactly through
//! an eigendecomposition or through a Chebyshev expansion of the scaled
//! Laplacian. Includes a training loop with AdamW, the freeze-and-adapt
//! transfer procedure, and the synthetic experiment harness.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod filtering;
pub mod graphs;
pub mod io;
pub mod kernel;
pub mod rng;
pub mod training;

pub use error::{Error, Result};
