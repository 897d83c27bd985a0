use crate::error::{Error, Result};
use crate::model::{ModelKind, Theta};
use crate::rng::{keys, Stream};

use super::adaptive::AdaptiveProposal;
use super::McmcConfig;

/// A target for Metropolis-Hastings on an unconstrained vector.
pub trait Posterior: Sync {
    fn dim(&self) -> usize;

    /// Log prior density of `u`, including any change-of-variables term.
    fn log_prior(&self, u: &[f64]) -> f64;

    /// Log-likelihood, or an estimate of it, at `u` using randomness from
    /// `stream` only. `-inf` means the proposal is rejected.
    fn log_likelihood(&self, u: &[f64], stream: Stream) -> Result<f64>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub theta_unconstrained: Vec<f64>,
    pub log_prior: f64,
    /// Estimate computed when this point was accepted; never refreshed.
    pub log_lik_estimate: f64,
    /// Whether the move into this state was accepted at this iteration.
    pub accepted: bool,
}

#[derive(Clone, Debug)]
pub struct Chain {
    pub states: Vec<ChainState>,
    pub acceptance_rate: f64,
    pub config: McmcConfig,
    pub seed: u64,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.theta_unconstrained.len())
    }

    /// Unconstrained draws after discarding the first `burnin`.
    pub fn draws(&self, burnin: usize) -> Vec<&[f64]> {
        self.states.iter().skip(burnin).map(|s| s.theta_unconstrained.as_slice()).collect()
    }

    /// Draws after `burnin` mapped back to model parameters.
    pub fn thetas(&self, kind: ModelKind, burnin: usize) -> Result<Vec<Theta>> {
        self.draws(burnin).into_iter().map(|u| Theta::from_unconstrained(kind, u)).collect()
    }

    /// Fraction of accepted moves after `burnin`.
    pub fn acceptance_after(&self, burnin: usize) -> f64 {
        let tail = &self.states[burnin.min(self.states.len())..];
        if tail.is_empty() {
            return 0.0;
        }
        tail.iter().filter(|s| s.accepted).count() as f64 / tail.len() as f64
    }
}

/// Adaptive random-walk Metropolis-Hastings with a noisy likelihood.
///
/// The proposal is symmetric, so acceptance uses only the log-likelihood
/// and log-prior differences. The incumbent's likelihood estimate is kept
/// until a proposal is accepted. Iteration `r` draws its proposal, its
/// likelihood and its acceptance uniform from separate sub-streams of
/// `stream`, so a chain is reproducible and independent of thread count.
pub fn run_chain<P: Posterior + ?Sized>(
    target: &P,
    initial: &[f64],
    config: &McmcConfig,
    stream: Stream,
) -> Result<Chain> {
    config.validate()?;
    let d = target.dim();
    if initial.len() != d {
        return Err(Error::Dimension { expected: d, got: initial.len() });
    }
    let mut current = initial.to_vec();
    let mut lp = target.log_prior(&current);
    if !lp.is_finite() {
        return Err(Error::Initialization("initial value has zero prior density".into()));
    }
    let mut ll = f64::NEG_INFINITY;
    for attempt in 0..config.init_attempts {
        ll = target.log_likelihood(&current, stream.path(&[keys::INIT, attempt as u64]))?;
        if ll.is_finite() {
            break;
        }
    }
    if !ll.is_finite() {
        return Err(Error::Initialization(format!(
            "likelihood estimate at the initial value was -inf in {} attempts",
            config.init_attempts
        )));
    }

    let mut proposal = AdaptiveProposal::new(d, config);
    let mut states = Vec::with_capacity(config.iterations);
    let mut accepted_count = 0usize;
    for r in 0..config.iterations as u64 {
        proposal.observe(&current);
        let cand = proposal.propose(&current, &mut stream.path(&[keys::PROPOSAL, r]).rng());
        let lp_new = target.log_prior(&cand);
        let mut accepted = false;
        if lp_new.is_finite() {
            let ll_new = target.log_likelihood(&cand, stream.path(&[keys::LIKELIHOOD, r]))?;
            if ll_new.is_finite() {
                let log_ratio = (ll_new - ll) + (lp_new - lp);
                let u: f64 = rand::Rng::random(&mut stream.path(&[keys::ACCEPT, r]).rng());
                if u.ln() < log_ratio {
                    current = cand;
                    lp = lp_new;
                    ll = ll_new;
                    accepted = true;
                    accepted_count += 1;
                }
            }
        }
        states.push(ChainState { theta_unconstrained: current.clone(), log_prior: lp, log_lik_estimate: ll, accepted });
    }
    let acceptance_rate = if states.is_empty() { 0.0 } else { accepted_count as f64 / states.len() as f64 };
    Ok(Chain { states, acceptance_rate, config: config.clone(), seed: stream.seed() })
}
