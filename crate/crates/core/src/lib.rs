//! Bayesian inference for stochastic differential equation mixed-effects
//! models of tumor growth.
//!
//! Two routes to the posterior of the population parameters are provided:
//!
//! * [`pmm`]: pseudo-marginal Metropolis–Hastings, driven by unbiased
//!   particle-filter likelihood estimates from [`smc`];
//! * [`bsl`]: Bayesian synthetic likelihood, driven by the unbiased
//!   Gaussian-density estimator on summary statistics of simulated datasets.
//!
//! Both samplers share the adaptive random-walk machinery in [`pmm`] and the
//! post-processing in [`diagnostics`]. Every stochastic routine takes an
//! explicit [`rng::Stream`], and independent work (subjects, simulated
//! datasets) is spread over threads by [`exec`] without changing results.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bsl;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod model;
pub mod pmm;
pub mod rng;
pub mod smc;
pub mod stats;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{Dataset, ModelKind, ObservationDesign, Param, PriorSpec, SubjectData, Theta};
pub use rng::Stream;
