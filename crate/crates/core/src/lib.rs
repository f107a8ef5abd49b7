//! Monte Carlo engine for studying how collinearity (targeted through the
//! variance inflation factor) and sample size affect OLS inference on one
//! tracked coefficient.
//!
//! The pipeline is: [`corrstruct`] builds a correlation matrix for a target
//! VIF, [`datagen`] draws seeded replicates, [`engine`] fits them via
//! [`ols`], [`metrics`] aggregates coverage, bias, MAE, precision assurance
//! and power, [`runner`] drives whole grids, and [`report`] writes the
//! result files. [`oracles`] holds closed-form cross-checks.

pub mod config;
pub mod corrstruct;
pub mod datagen;
pub mod engine;
mod error;
pub mod experiments;
pub mod linalg;
pub mod metrics;
pub mod ols;
pub mod oracles;
pub mod registry;
pub mod report;
pub mod runner;

pub use error::{Error, Result};
