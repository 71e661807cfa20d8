//! Gaussian random-field textures with prescribed local orientation.
//!
//! Synthesizes isotropic fractional Brownian fields, stationary anisotropic
//! elementary fields, and locally anisotropic fractional Brownian fields on
//! (r+1)x(r+1) grids via the turning-bands method: the field is a weighted
//! sum of exact 1-D fractional Brownian motions evaluated on projections
//! onto rational directions tan(theta) = p/q. A validation suite provides
//! the variogram quadrature oracle, Monte-Carlo estimators, and a coarse
//! Hurst regression.

pub mod bands;
pub mod config;
pub mod error;
pub mod fbm;
pub mod grid_io;
pub mod orientation;
pub mod synthesis;
pub mod validation;

pub use error::{Error, Result};
