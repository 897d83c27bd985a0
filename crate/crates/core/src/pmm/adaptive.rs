use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::McmcConfig;

/// Haario-style adaptive Gaussian random walk.
///
/// Keeps a running mean and the running sum of centred outer products of the
/// chain history (Welford), so each update costs `O(d^2)`. Until
/// `adapt_start` points have been observed the proposal covariance is
/// `diag(initial_proposal_sd^2)`; afterwards it is `adapt_scale * C + jitter * I`
/// with `C` the empirical covariance (denominator `n - 1`).
#[derive(Clone, Debug)]
pub struct AdaptiveProposal {
    n: usize,
    mean: DVector<f64>,
    m2: DMatrix<f64>,
    initial_sd: f64,
    adapt_start: usize,
    scale: f64,
    jitter: f64,
}

impl AdaptiveProposal {
    pub fn new(dim: usize, config: &McmcConfig) -> Self {
        Self {
            n: 0,
            mean: DVector::zeros(dim),
            m2: DMatrix::zeros(dim, dim),
            initial_sd: config.initial_proposal_sd,
            adapt_start: config.adapt_start,
            scale: config.adapt_scale.unwrap_or(2.38 * 2.38 / dim.max(1) as f64),
            jitter: config.jitter,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Number of observed points.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn observe(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.dim(), "history point of wrong dimension");
        self.n += 1;
        let x = DVector::from_column_slice(x);
        let delta = &x - &self.mean;
        self.mean += &delta / self.n as f64;
        let delta2 = &x - &self.mean;
        self.m2.ger(1.0, &delta, &delta2, 1.0);
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Empirical covariance of the history; zero with fewer than two points.
    pub fn covariance(&self) -> DMatrix<f64> {
        if self.n < 2 {
            return DMatrix::zeros(self.dim(), self.dim());
        }
        let c = &self.m2 / (self.n - 1) as f64;
        // symmetrize away rounding from the rank-one updates
        (&c + c.transpose()) * 0.5
    }

    pub fn is_adapting(&self) -> bool {
        self.n >= self.adapt_start.max(1)
    }

    pub fn proposal_covariance(&self) -> DMatrix<f64> {
        let d = self.dim();
        if self.is_adapting() {
            self.covariance() * self.scale + DMatrix::identity(d, d) * self.jitter
        } else {
            DMatrix::from_diagonal_element(d, d, self.initial_sd * self.initial_sd)
        }
    }

    pub fn propose<R: Rng + ?Sized>(&self, current: &[f64], rng: &mut R) -> Vec<f64> {
        let d = self.dim();
        let z = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let step = match self.proposal_covariance().cholesky() {
            Some(ch) => ch.l() * z,
            None => z * self.initial_sd,
        };
        current.iter().zip(step.iter()).map(|(c, s)| c + s).collect()
    }
}

/// One proposal from an explicit history: builds the running moments of
/// `history` and draws around `current`.
pub fn adaptive_propose<R: Rng + ?Sized>(
    history: &[Vec<f64>],
    current: &[f64],
    config: &McmcConfig,
    rng: &mut R,
) -> Vec<f64> {
    let mut p = AdaptiveProposal::new(current.len(), config);
    for h in history {
        p.observe(h);
    }
    p.propose(current, rng)
}
