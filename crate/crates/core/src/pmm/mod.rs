//! Pseudo-marginal Metropolis-Hastings.

mod adaptive;
mod chain;

pub use adaptive::{adaptive_propose, AdaptiveProposal};
pub use chain::{run_chain, Chain, ChainState, Posterior};

use crate::error::{Error, Result};
use crate::model::{log_jacobian, Dataset, ModelKind, PriorSpec, Theta};
use crate::rng::Stream;
use crate::smc::{dataset_loglik, SmcConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct McmcConfig {
    /// Recorded iterations.
    pub iterations: usize,
    /// Leading draws discarded by summaries.
    pub burnin: usize,
    /// History length after which the empirical covariance is used.
    pub adapt_start: usize,
    /// Multiplier of the empirical covariance; `None` means `2.38^2 / d`.
    pub adapt_scale: Option<f64>,
    pub jitter: f64,
    /// Random-walk standard deviation of every coordinate before adaptation.
    pub initial_proposal_sd: f64,
    /// Attempts at a finite likelihood estimate at the starting value.
    pub init_attempts: usize,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 20_000,
            burnin: 10_000,
            adapt_start: 500,
            adapt_scale: None,
            jitter: 1e-6,
            initial_proposal_sd: 0.05,
            init_attempts: 100,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burnin >= self.iterations && self.iterations > 0 {
            return Err(Error::param(format!(
                "burnin {} must be smaller than the iteration count {}",
                self.burnin, self.iterations
            )));
        }
        if !(self.jitter >= 0.0) || !(self.initial_proposal_sd > 0.0) {
            return Err(Error::param("jitter must be >= 0 and initial_proposal_sd > 0"));
        }
        if self.adapt_scale.is_some_and(|s| !(s > 0.0)) {
            return Err(Error::param("adapt_scale must be positive"));
        }
        if self.init_attempts == 0 {
            return Err(Error::param("init_attempts must be at least 1"));
        }
        Ok(())
    }
}

/// Posterior of the population parameters with a particle-filter likelihood.
pub struct PmmPosterior<'a> {
    pub dataset: &'a Dataset,
    pub priors: &'a PriorSpec,
    pub smc: SmcConfig,
}

impl PmmPosterior<'_> {
    pub fn kind(&self) -> ModelKind {
        self.priors.kind()
    }
}

/// Prior density of an unconstrained vector: the prior of the stored fields
/// plus the log-Jacobian of the exponential maps.
pub fn unconstrained_log_prior(priors: &PriorSpec, u: &[f64]) -> f64 {
    let kind = priors.kind();
    match Theta::from_unconstrained(kind, u) {
        Ok(theta) => {
            let lp = priors.logdensity(&theta);
            if lp.is_finite() {
                lp + log_jacobian(kind, u)
            } else {
                f64::NEG_INFINITY
            }
        }
        Err(_) => f64::NEG_INFINITY,
    }
}

impl Posterior for PmmPosterior<'_> {
    fn dim(&self) -> usize {
        self.kind().dim()
    }

    fn log_prior(&self, u: &[f64]) -> f64 {
        unconstrained_log_prior(self.priors, u)
    }

    fn log_likelihood(&self, u: &[f64], stream: Stream) -> Result<f64> {
        let theta = Theta::from_unconstrained(self.kind(), u)?;
        Ok(dataset_loglik(self.dataset, &theta, &self.smc, stream)?.log_value)
    }
}

/// Pseudo-marginal chain for `dataset` started at `initial`.
pub fn run_pmm(
    dataset: &Dataset,
    priors: &PriorSpec,
    smc: &SmcConfig,
    mcmc: &McmcConfig,
    initial: &Theta,
    stream: Stream,
) -> Result<Chain> {
    if initial.kind() != priors.kind() {
        return Err(Error::param(format!(
            "initial value is {} but the priors are for {}",
            initial.kind(),
            priors.kind()
        )));
    }
    let target = PmmPosterior { dataset, priors, smc: *smc };
    run_chain(&target, &initial.to_unconstrained()?, mcmc, stream)
}
