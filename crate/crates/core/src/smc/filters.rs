use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{draw_random_effects, Diffusion, LogState, RandomEffects, SubjectData, Theta};
use crate::stats::{log_sum_exp, LN_2PI};

use super::resample::resample_into;
use super::{FilterKind, SmcConfig};

/// Observation log-density with its normalizing constant precomputed.
#[derive(Clone, Copy)]
struct ObsDensity {
    c: f64,
    inv_var: f64,
}

impl ObsDensity {
    fn new(sigma_eps: f64) -> Result<Self> {
        if !(sigma_eps > 0.0) || !sigma_eps.is_finite() {
            return Err(Error::param(format!("sigma_eps must be positive, got {sigma_eps}")));
        }
        Ok(Self { c: -0.5 * LN_2PI - sigma_eps.ln(), inv_var: 1.0 / (sigma_eps * sigma_eps) })
    }

    #[inline]
    fn eval(&self, y: f64, x: f64) -> f64 {
        let d = y - x;
        self.c - 0.5 * d * d * self.inv_var
    }
}

struct Particles {
    phi: Vec<RandomEffects>,
    state: Vec<LogState>,
}

impl Particles {
    fn draw<R: Rng + ?Sized>(theta: &Theta, log_v0: f64, n: usize, rng: &mut R) -> Self {
        let phi: Vec<RandomEffects> = (0..n).map(|_| draw_random_effects(theta, rng)).collect();
        let state = phi.iter().map(|p| LogState::initial(p, log_v0)).collect();
        Self { phi, state }
    }

    fn gather(&mut self, idx: &[usize], scratch: &mut Particles) {
        scratch.phi.clear();
        scratch.state.clear();
        scratch.phi.extend(idx.iter().map(|&k| self.phi[k]));
        scratch.state.extend(idx.iter().map(|&k| self.state[k]));
        std::mem::swap(self, scratch);
    }
}

fn check(subject: &SubjectData, v0: f64, theta: &Theta, config: &SmcConfig) -> Result<ObsDensity> {
    config.validate()?;
    theta.validate()?;
    if subject.is_empty() {
        return Err(Error::InvalidData(format!("subject {} has no observations", subject.id)));
    }
    if !(v0 > 0.0) || !v0.is_finite() {
        return Err(Error::param(format!("initial volume must be positive, got {v0}")));
    }
    ObsDensity::new(theta.sigma_eps)
}

/// Per-subject log-likelihood estimate from the bootstrap filter.
///
/// Particles carry their own random effects. Each observation time
/// propagates every particle through the exact transition, weights it by the
/// measurement density and resamples. Returns `-inf` when every weight
/// vanishes at some step. `exp` of the estimate is unbiased.
pub fn bootstrap_filter<R: Rng + ?Sized>(
    subject: &SubjectData,
    v0: f64,
    theta: &Theta,
    config: &SmcConfig,
    rng: &mut R,
) -> Result<f64> {
    let obs = check(subject, v0, theta, config)?;
    let l = config.particles;
    let ln_l = (l as f64).ln();
    let diff = Diffusion::of(theta);
    let mut p = Particles::draw(theta, v0.ln(), l, rng);
    let mut scratch = Particles { phi: Vec::with_capacity(l), state: Vec::with_capacity(l) };
    let mut logw = vec![0.0; l];
    let mut idx = vec![0; l];
    let mut total = 0.0;
    let mut prev = 0.0;
    for (&t, &y) in subject.times.iter().zip(&subject.y) {
        let dt = t - prev;
        prev = t;
        for ((s, phi), lw) in p.state.iter_mut().zip(&p.phi).zip(logw.iter_mut()) {
            s.step(phi, &diff, dt, rng);
            *lw = obs.eval(y, s.log_total());
        }
        let lse = log_sum_exp(&logw);
        if !lse.is_finite() {
            return Ok(f64::NEG_INFINITY);
        }
        total += lse - ln_l;
        for lw in logw.iter_mut() {
            *lw = (*lw - lse).exp();
        }
        resample_into(&logw, rng, &mut idx);
        p.gather(&idx, &mut scratch);
    }
    Ok(total)
}

/// Per-subject log-likelihood estimate from the auxiliary particle filter.
///
/// Each step first propagates every particle `first_stage` times and scores
/// it by the measurement density at the mean of those log total volumes.
/// Ancestors are drawn from these first-stage weights and propagated once;
/// the second-stage weight divides the measurement density by the ancestor's
/// first-stage score. The step factor is `mean(w) * sum(omega)`.
pub fn auxiliary_filter<R: Rng + ?Sized>(
    subject: &SubjectData,
    v0: f64,
    theta: &Theta,
    config: &SmcConfig,
    rng: &mut R,
) -> Result<f64> {
    let obs = check(subject, v0, theta, config)?;
    let l = config.particles;
    let l2 = config.first_stage;
    let ln_l = (l as f64).ln();
    let diff = Diffusion::of(theta);
    let mut p = Particles::draw(theta, v0.ln(), l, rng);
    let mut scratch = Particles { phi: Vec::with_capacity(l), state: Vec::with_capacity(l) };
    // normalized log weights carried from the previous step
    let mut log_wprev = vec![-ln_l; l];
    let mut log_gbar = vec![0.0; l];
    let mut log_omega = vec![0.0; l];
    let mut logw = vec![0.0; l];
    let mut idx = vec![0; l];
    let mut total = 0.0;
    let mut prev = 0.0;
    for (&t, &y) in subject.times.iter().zip(&subject.y) {
        let dt = t - prev;
        prev = t;
        for i in 0..l {
            let mut xbar = 0.0;
            for _ in 0..l2 {
                let mut s = p.state[i];
                s.step(&p.phi[i], &diff, dt, rng);
                xbar += s.log_total();
            }
            xbar /= l2 as f64;
            log_gbar[i] = obs.eval(y, xbar);
            log_omega[i] = log_gbar[i] + log_wprev[i];
        }
        let lse_omega = log_sum_exp(&log_omega);
        if !lse_omega.is_finite() {
            return Ok(f64::NEG_INFINITY);
        }
        for (w, lo) in logw.iter_mut().zip(&log_omega) {
            *w = (lo - lse_omega).exp();
        }
        resample_into(&logw, rng, &mut idx);
        p.gather(&idx, &mut scratch);
        for (i, &k) in idx.iter().enumerate() {
            let s = &mut p.state[i];
            s.step(&p.phi[i], &diff, dt, rng);
            logw[i] = obs.eval(y, s.log_total()) - log_gbar[k];
        }
        let lse_w = log_sum_exp(&logw);
        if !lse_w.is_finite() {
            return Ok(f64::NEG_INFINITY);
        }
        total += lse_w - ln_l + lse_omega;
        for (wp, lw) in log_wprev.iter_mut().zip(&logw) {
            *wp = lw - lse_w;
        }
    }
    Ok(total)
}

/// Dispatch on `config.filter`.
pub fn subject_loglik<R: Rng + ?Sized>(
    subject: &SubjectData,
    v0: f64,
    theta: &Theta,
    config: &SmcConfig,
    rng: &mut R,
) -> Result<f64> {
    match config.filter {
        FilterKind::Bootstrap => bootstrap_filter(subject, v0, theta, config, rng),
        FilterKind::Auxiliary => auxiliary_filter(subject, v0, theta, config, rng),
    }
}
