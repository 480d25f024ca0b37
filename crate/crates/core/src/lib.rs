//! High-excursion asymptotics of a centered Gaussian field on a square whose
//! standard deviation loss has the product form
//! `t1^beta + t2^beta + t1^a t2^a`.
//!
//! The crate provides the field model ([`model`]), the integration engine and
//! every constant of the asymptotic expansions ([`quad`]), Pickands-constant
//! estimation by exact fractional Brownian motion simulation ([`pickands`]),
//! exact lattice simulation of the field ([`fieldsim`]), the assembled
//! leading-order predictions ([`asymptotics`]), and the experiment driver
//! behind the `gexcursion` binary ([`cli`]).

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod fieldsim;
pub mod linalg;
pub mod model;
pub mod pickands;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
pub use model::{ModelParams, Point2, Regime};
