//! Quantitative risk engine for linear portfolios whose risk-factor returns
//! follow a finite mixture of elliptic distributions (Student-t, Gaussian, or
//! a user-supplied radial profile).
//!
//! The crate computes Value-at-Risk and Expected Shortfall analytically —
//! reducing the multivariate problem to one-dimensional tail functions — and
//! ships a Monte Carlo cross-check, reference-table reproduction, and a CLI
//! (see the `mixrisk-cli` crate).
//!
//! Numerical kernels are generic over the scalar type through [`scalar::Real`];
//! `f64` aliases for the main model types are re-exported at the crate root.

pub mod error;
pub mod es;
pub mod mc;
pub mod model;
pub mod quad;
pub mod radial;
pub mod scalar;
pub mod schema;
pub mod solve;
pub mod specfun;
pub mod tables;
pub mod var;

pub use error::{Error, Result};

/// Concrete `f64` aliases for the common precision.
pub type MixtureModel64 = model::MixtureModel<f64>;
pub type ValidatedModel64 = model::ValidatedModel<f64>;
pub type Portfolio64 = model::Portfolio<f64>;
pub type QuantileSolution64 = var::QuantileSolution<f64>;
pub type RiskReport64 = var::RiskReport<f64>;
pub type EsCoefficient64 = es::EsCoefficient<f64>;
