//! Variance-reduced stochastic optimization for compositional minimax
//! problems `min_x max_y f(g(x), y)` where both the inner map `g` and the
//! outer function `f` are only available through stochastic samples.
//!
//! The crate is organised bottom-up:
//!
//! - [`oracle`]: the two-level stochastic problem interface.
//! - [`estimators`]: nested recursive-momentum (STORM) estimators and their
//!   step-size schedules.
//! - [`optimizers`]: NSTORM, its PL-condition variant, ADA-NSTORM with four
//!   adaptive-matrix generators, and two biased baselines.
//! - [`problems`]: five benchmark problems realizing the oracle interface.
//! - [`harness`]: declarative run configs, multi-seed execution, sweeps,
//!   method comparison and CSV/JSON output.

pub mod error;
pub mod estimators;
pub mod harness;
pub mod optimizers;
pub mod oracle;
pub mod problems;

pub use error::{Error, Result};
pub use oracle::{CompositionalOracle, Dims, InnerEval, OracleCapabilities, OuterEval};

/// Dense column vector used for all iterates and gradients.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix; Jacobians are stored with rows = outputs.
pub type Matrix = nalgebra::DMatrix<f64>;
