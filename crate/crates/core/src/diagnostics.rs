//! Chain post-processing.

use nalgebra::{DMatrix, DVector};
use rand_distr::StandardNormal;

use crate::bsl::{estimate_moments, simulate_summaries, summarize_dataset, ModelSimulator};
use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::model::{Dataset, ModelKind, Param, Theta};
use crate::pmm::Chain;
use crate::rng::{keys, Stream};
use crate::stats::{mean, quantile_sorted, sample_variance, std_normal_quantile};

/// Potential scale reduction factor of one scalar quantity.
///
/// `W` is the mean within-chain variance, `B/n` the variance of the chain
/// means, and the result is `sqrt(((n-1)/n W + B/n) / W)`. A zero `W` with a
/// non-zero `B` gives `+inf`.
pub fn gelman_rubin(chains: &[&[f64]]) -> Result<f64> {
    if chains.len() < 2 {
        return Err(Error::Samples(format!("need at least 2 chains, got {}", chains.len())));
    }
    let n = chains[0].len();
    if n < 2 || chains.iter().any(|c| c.len() != n) {
        return Err(Error::Samples("chains must have equal lengths of at least 2".into()));
    }
    let nf = n as f64;
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let w = mean(&chains.iter().map(|c| sample_variance(c)).collect::<Vec<_>>());
    let b_over_n = sample_variance(&means);
    if w == 0.0 {
        return Ok(if b_over_n == 0.0 { f64::NAN } else { f64::INFINITY });
    }
    let v = (nf - 1.0) / nf * w + b_over_n;
    Ok((v / w).sqrt())
}

/// Scale reduction of every coordinate of several chains, on the
/// unconstrained scale, after discarding `burnin` draws from each.
pub fn gelman_rubin_chains(chains: &[Chain], burnin: usize) -> Result<Vec<f64>> {
    let Some(first) = chains.first() else {
        return Err(Error::Samples("no chains".into()));
    };
    let d = first.dim();
    (0..d)
        .map(|k| {
            let cols: Vec<Vec<f64>> = chains.iter().map(|c| c.draws(burnin).iter().map(|u| u[k]).collect()).collect();
            let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
            gelman_rubin(&refs)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamSummary {
    pub param: Param,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainSummary {
    pub params: Vec<ParamSummary>,
    /// Fraction of accepted moves after burn-in.
    pub acceptance_rate: f64,
    pub draws: usize,
}

impl ChainSummary {
    pub fn get(&self, p: Param) -> Option<&ParamSummary> {
        self.params.iter().find(|s| s.param == p)
    }

    /// Posterior means as model parameters.
    pub fn mean_theta(&self, kind: ModelKind) -> Result<Theta> {
        let v: Vec<f64> = self.params.iter().map(|s| s.mean).collect();
        Theta::from_reported(kind, &v)
    }
}

/// Posterior mean and equal-tailed 95% interval of every parameter on its
/// reported scale.
pub fn chain_summary(chain: &Chain, kind: ModelKind, burnin: usize) -> Result<ChainSummary> {
    if burnin >= chain.len() {
        return Err(Error::Samples(format!("burnin {burnin} leaves no draws from a chain of length {}", chain.len())));
    }
    if chain.dim() != kind.dim() {
        return Err(Error::Dimension { expected: kind.dim(), got: chain.dim() });
    }
    let reported: Vec<Vec<f64>> = chain.thetas(kind, burnin)?.iter().map(|t| t.to_reported()).collect();
    let params = kind
        .params()
        .iter()
        .enumerate()
        .map(|(k, &param)| {
            let mut col: Vec<f64> = reported.iter().map(|r| r[k]).collect();
            col.sort_by(f64::total_cmp);
            ParamSummary {
                param,
                mean: mean(&col),
                lower: quantile_sorted(&col, 0.025),
                upper: quantile_sorted(&col, 0.975),
            }
        })
        .collect();
    Ok(ChainSummary { params, acceptance_rate: chain.acceptance_after(burnin), draws: reported.len() })
}

#[derive(Clone, Debug)]
pub struct PredictiveDraws {
    /// One simulated summary vector per retained posterior draw.
    pub draws: DMatrix<f64>,
    /// Summary vector of the observed data.
    pub observed: Vec<f64>,
}

/// Symmetric square root factor used to sample `N(mu, sigma)`. Falls back to
/// an eigendecomposition with negative eigenvalues clamped to zero when the
/// Cholesky factorization fails.
fn sampling_factor(sigma: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(ch) = sigma.clone().cholesky() {
        return ch.l();
    }
    let eig = sigma.clone().symmetric_eigen();
    let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals)
}

/// Posterior predictive summaries: for every `thin`-th draw after `burnin`,
/// simulate `simulations` datasets on the observed layout, estimate their
/// moments and draw one summary vector from the fitted Gaussian.
#[allow(clippy::too_many_arguments)]
pub fn posterior_predictive_draws(
    chain: &Chain,
    dataset: &Dataset,
    kind: ModelKind,
    simulations: usize,
    burnin: usize,
    thin: usize,
    execution: Execution,
    stream: Stream,
) -> Result<PredictiveDraws> {
    if thin == 0 {
        return Err(Error::param("thinning interval must be at least 1"));
    }
    if burnin >= chain.len() {
        return Err(Error::Samples("burnin leaves no draws".into()));
    }
    if simulations < 2 {
        return Err(Error::Samples("need at least 2 simulations per draw".into()));
    }
    let observed = summarize_dataset(dataset, kind)?.values;
    let simulator = ModelSimulator::new(&dataset.observed_design(), kind)?;
    let d = observed.len();
    let draws: Vec<&[f64]> = chain.draws(burnin).into_iter().step_by(thin).collect();
    // draws are spread over threads; simulations within a draw stay sequential
    let rows = try_map_indexed(execution, draws.len(), |r| {
        let s = stream.path(&[keys::PREDICTIVE, r as u64]);
        let samples = simulate_summaries(&simulator, draws[r], simulations, Execution::Sequential, s)?;
        let (mu, sigma) = estimate_moments(&samples)?;
        let mut rng = s.child(keys::SAMPLE).rng();
        let z = DVector::from_iterator(d, (0..d).map(|_| rand::Rng::sample::<f64, _>(&mut rng, StandardNormal)));
        Ok::<_, Error>(mu + sampling_factor(&sigma) * z)
    })?;
    let draws = DMatrix::from_fn(rows.len(), d, |r, c| rows[r][c]);
    Ok(PredictiveDraws { draws, observed })
}

/// Ordered sample paired with standard-normal quantiles at `(i - 0.5)/n`,
/// as `(theoretical, sample)` points.
pub fn normal_qq_points(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::Samples(format!("need at least 3 samples, got {n}")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted.into_iter().enumerate().map(|(i, x)| (std_normal_quantile((i as f64 + 0.5) / n as f64), x)).collect())
}
