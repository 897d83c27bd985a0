//! Bayesian synthetic likelihood.

mod density;
mod summaries;

pub use density::{
    estimate_moments, gaussian_plugin_logdensity, ghurye_olkin_logdensity, ln_wishart_const, GhuryeOlkin,
};
pub use summaries::{inter_summaries, intra_summaries, summarize_dataset, summary_dim, SummaryVector};

use nalgebra::DMatrix;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::model::{
    draw_random_effects, simulate_log_totals, Dataset, Diffusion, ModelKind, ObservationDesign, PriorSpec, Theta,
};
use crate::pmm::{run_chain, unconstrained_log_prior, Chain, McmcConfig, Posterior};
use crate::rng::{keys, Stream, StreamRng};

#[derive(Clone, Debug, PartialEq)]
pub struct BslConfig {
    /// Simulated datasets per likelihood evaluation.
    pub simulations: usize,
    pub mcmc: McmcConfig,
    /// How the simulations of one evaluation are spread over threads.
    pub execution: Execution,
}

impl Default for BslConfig {
    fn default() -> Self {
        Self { simulations: 3000, mcmc: McmcConfig::default(), execution: Execution::Parallel }
    }
}

/// Draws one summary vector per call.
pub trait SummarySimulator: Sync {
    fn summary_dim(&self) -> usize;

    /// Writes a summary vector simulated at the unconstrained parameter `u`.
    fn simulate(&self, u: &[f64], rng: &mut StreamRng, out: &mut [f64]) -> Result<()>;
}

/// Simulates datasets from the growth model on a fixed layout (no sacrifice
/// truncation) and summarizes them.
#[derive(Clone, Debug)]
pub struct ModelSimulator {
    kind: ModelKind,
    times: Vec<Vec<f64>>,
    log_v0: Vec<f64>,
}

impl ModelSimulator {
    pub fn new(design: &ObservationDesign, kind: ModelKind) -> Result<Self> {
        if design.subject_count() < 2 {
            return Err(Error::Summary("need at least 2 subjects".into()));
        }
        let min_len = if kind == ModelKind::TwoCompartment { 3 } else { 2 };
        if let Some(i) = (0..design.subject_count()).find(|&i| design.times(i).len() < min_len) {
            return Err(Error::Summary(format!(
                "subject {i} has fewer than {min_len} time points for the {kind} summaries"
            )));
        }
        Ok(Self { kind, times: design.all_times().to_vec(), log_v0: design.all_v0().iter().map(|v| v.ln()).collect() })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Summary vector of one dataset simulated at `theta`.
    pub fn simulate_theta(&self, theta: &Theta, rng: &mut StreamRng, out: &mut [f64]) -> Result<()> {
        let k = self.kind.intra_summary_len();
        let m = self.times.len();
        let diff = Diffusion::of(theta);
        let mut x = Vec::new();
        let mut cols = [vec![0.0; m], vec![0.0; m], vec![0.0; m]];
        for (i, (times, &lv0)) in self.times.iter().zip(&self.log_v0).enumerate() {
            let phi = draw_random_effects(theta, rng);
            x.resize(times.len(), 0.0);
            simulate_log_totals(&phi, &diff, lv0, times, rng, &mut x);
            for xj in x.iter_mut() {
                let e: f64 = rand::Rng::sample(rng, StandardNormal);
                *xj += theta.sigma_eps * e;
            }
            summaries::intra_into(times, &x, self.kind, &mut out[i * k..(i + 1) * k])?;
            cols[0][i] = x[0];
            cols[1][i] = x[1];
            cols[2][i] = x[x.len() - 1];
        }
        out[k * m..].copy_from_slice(&summaries::inter_from_columns(&cols[0], &cols[1], &cols[2]));
        Ok(())
    }
}

impl SummarySimulator for ModelSimulator {
    fn summary_dim(&self) -> usize {
        summary_dim(self.kind, self.times.len())
    }

    fn simulate(&self, u: &[f64], rng: &mut StreamRng, out: &mut [f64]) -> Result<()> {
        let theta = Theta::from_unconstrained(self.kind, u)?;
        self.simulate_theta(&theta, rng, out)
    }
}

/// `N` simulated summary vectors as the rows of a matrix. Simulation `n`
/// uses the sub-stream `stream.path([SIMULATION, n])`.
pub fn simulate_summaries<S: SummarySimulator + ?Sized>(
    simulator: &S,
    u: &[f64],
    n: usize,
    exec: Execution,
    stream: Stream,
) -> Result<DMatrix<f64>> {
    let d = simulator.summary_dim();
    let rows = try_map_indexed(exec, n, |j| {
        let mut rng = stream.path(&[keys::SIMULATION, j as u64]).rng();
        let mut out = vec![0.0; d];
        simulator.simulate(u, &mut rng, &mut out)?;
        Ok::<_, Error>(out)
    })?;
    Ok(DMatrix::from_fn(n, d, |r, c| rows[r][c]))
}

/// Synthetic log-likelihood of an observed summary vector.
pub struct SyntheticLikelihood<'a, S: ?Sized> {
    pub simulator: &'a S,
    pub observed: Vec<f64>,
    estimator: GhuryeOlkin,
    execution: Execution,
}

impl<'a, S: SummarySimulator + ?Sized> SyntheticLikelihood<'a, S> {
    pub fn new(simulator: &'a S, observed: Vec<f64>, simulations: usize, execution: Execution) -> Result<Self> {
        let d = simulator.summary_dim();
        if observed.len() != d {
            return Err(Error::Dimension { expected: d, got: observed.len() });
        }
        if observed.iter().any(|v| !v.is_finite()) {
            return Err(Error::Summary("observed summaries must be finite".into()));
        }
        Ok(Self { simulator, observed, estimator: GhuryeOlkin::new(d, simulations)?, execution })
    }

    /// One Ghurye-Olkin estimate from fresh simulations; `-inf` when a
    /// simulated summary is not finite or the estimator's guard triggers.
    pub fn estimate(&self, u: &[f64], stream: Stream) -> Result<f64> {
        let samples = simulate_summaries(self.simulator, u, self.estimator.simulations(), self.execution, stream)?;
        if samples.iter().any(|v| !v.is_finite()) {
            return Ok(f64::NEG_INFINITY);
        }
        let (mu, sigma) = estimate_moments(&samples)?;
        self.estimator.logdensity(&self.observed, &mu, &sigma)
    }
}

struct BslPosterior<'a> {
    likelihood: SyntheticLikelihood<'a, ModelSimulator>,
    priors: &'a PriorSpec,
}

impl Posterior for BslPosterior<'_> {
    fn dim(&self) -> usize {
        self.priors.kind().dim()
    }

    fn log_prior(&self, u: &[f64]) -> f64 {
        unconstrained_log_prior(self.priors, u)
    }

    fn log_likelihood(&self, u: &[f64], stream: Stream) -> Result<f64> {
        self.likelihood.estimate(u, stream)
    }
}

/// Synthetic-likelihood chain for `dataset` started at `initial`. Simulated
/// datasets reuse the observed times and initial volumes of every subject.
pub fn run_bsl(
    dataset: &Dataset,
    priors: &PriorSpec,
    config: &BslConfig,
    initial: &Theta,
    stream: Stream,
) -> Result<Chain> {
    let kind = priors.kind();
    if initial.kind() != kind {
        return Err(Error::param(format!("initial value is {} but the priors are for {kind}", initial.kind())));
    }
    let observed = summarize_dataset(dataset, kind)?;
    let simulator = ModelSimulator::new(&dataset.observed_design(), kind)?;
    let likelihood = SyntheticLikelihood::new(&simulator, observed.values, config.simulations, config.execution)?;
    let target = BslPosterior { likelihood, priors };
    run_chain(&target, &initial.to_unconstrained()?, &config.mcmc, stream)
}
