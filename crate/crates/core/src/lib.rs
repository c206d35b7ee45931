//! Analyticity certificates for Lyapunov exponents of random matrix products,
//! with Monte Carlo and transfer-operator cross-checks.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::should_implement_trait)]

pub mod certificates;
pub mod commands;
pub mod config;
pub mod error;
pub mod example;
pub mod geometry;
pub mod oracles;
pub mod report;
pub mod transfer;
pub mod verification;

pub use error::{Error, Result};
