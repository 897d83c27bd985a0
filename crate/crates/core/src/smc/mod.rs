//! Particle-filter likelihood estimation.

mod filters;
mod kalman;
mod resample;

pub use filters::{auxiliary_filter, bootstrap_filter, subject_loglik};
pub use kalman::kalman_oracle_loglik;
pub use resample::stratified_resample;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::model::{Dataset, Theta};
use crate::rng::{keys, Stream};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FilterKind {
    Bootstrap,
    #[default]
    Auxiliary,
}

impl FilterKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FilterKind::Bootstrap => "bootstrap",
            FilterKind::Auxiliary => "auxiliary",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bootstrap" => Ok(FilterKind::Bootstrap),
            "auxiliary" | "apf" => Ok(FilterKind::Auxiliary),
            _ => Err(Error::param(format!("unknown filter kind '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmcConfig {
    /// Particle count.
    pub particles: usize,
    /// First-stage propagations per particle (auxiliary filter only).
    pub first_stage: usize,
    pub filter: FilterKind,
    /// How subjects are spread over threads.
    pub execution: Execution,
}

impl Default for SmcConfig {
    fn default() -> Self {
        Self { particles: 2000, first_stage: 5, filter: FilterKind::Auxiliary, execution: Execution::Parallel }
    }
}

impl SmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles < 2 {
            return Err(Error::param(format!("need at least 2 particles, got {}", self.particles)));
        }
        if self.first_stage < 1 {
            return Err(Error::param("first-stage propagation count must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodEstimate {
    /// Sum of `per_subject`; `-inf` if any subject's filter degenerated.
    pub log_value: f64,
    pub per_subject: Vec<f64>,
}

/// Log-likelihood estimate of a whole dataset: the sum of independent
/// per-subject estimates. Subject `i` uses the sub-stream
/// `stream.path([SUBJECT, i])`.
pub fn dataset_loglik(
    dataset: &Dataset,
    theta: &Theta,
    config: &SmcConfig,
    stream: Stream,
) -> Result<LikelihoodEstimate> {
    config.validate()?;
    let design = dataset.design();
    let per_subject = try_map_indexed(config.execution, dataset.len(), |i| {
        let mut rng = stream.path(&[keys::SUBJECT, i as u64]).rng();
        subject_loglik(dataset.subject(i), design.v0(i), theta, config, &mut rng)
    })?;
    let log_value = if per_subject.contains(&f64::NEG_INFINITY) { f64::NEG_INFINITY } else { per_subject.iter().sum() };
    Ok(LikelihoodEstimate { log_value, per_subject })
}
