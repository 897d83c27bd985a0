//! Exact forward simulation of the growth models.
//!
//! Both compartments are geometric Brownian motions with drift chosen so that
//! `log V` is a Brownian motion with drift, so transitions are sampled exactly:
//! `log V(t + dt) = log V(t) + rate * dt + diffusion * sqrt(dt) * xi`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{keys, Stream};
use crate::stats::{log_add_exp, normal_logpdf, std_normal_cdf, std_normal_quantile};

use super::design::{Dataset, ObservationDesign, SubjectData};
use super::theta::Theta;

/// Subject-level random effects.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomEffects {
    /// Kill fraction in `[0, 1]`.
    pub alpha: f64,
    /// Growth rate of the surviving compartment.
    pub beta: f64,
    /// Elimination rate of the killed compartment (`NaN` for the
    /// one-compartment model, where it is never read).
    pub delta: f64,
}

/// Compartment volumes at one time point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatentState {
    pub v_surv: f64,
    pub v_kill: f64,
}

impl LatentState {
    /// Split of the initial volume between the two compartments.
    pub fn initial(phi: &RandomEffects, v0: f64) -> Self {
        Self { v_surv: (1.0 - phi.alpha) * v0, v_kill: phi.alpha * v0 }
    }

    pub fn total(&self) -> f64 {
        self.v_surv + self.v_kill
    }

    /// Exact transition over `dt >= 0`.
    pub fn propagate<R: Rng + ?Sized>(&self, phi: &RandomEffects, theta: &Theta, dt: f64, rng: &mut R) -> Self {
        let mut s = LogState::from_volumes(self);
        s.step(phi, &Diffusion::of(theta), dt, rng);
        s.to_volumes()
    }
}

/// Diffusion coefficients of the two compartments; `None` for the
/// one-compartment model.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Diffusion {
    pub gamma: f64,
    pub tau: Option<f64>,
}

impl Diffusion {
    pub fn of(theta: &Theta) -> Self {
        Self { gamma: theta.gamma, tau: theta.treatment.map(|t| t.tau) }
    }
}

/// Log-volumes of both compartments, the representation used by the
/// filters and simulators. An empty compartment has log-volume `-inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct LogState {
    pub surv: f64,
    pub kill: f64,
}

impl LogState {
    #[inline]
    pub fn initial(phi: &RandomEffects, log_v0: f64) -> Self {
        Self { surv: log_v0 + (1.0 - phi.alpha).ln(), kill: log_v0 + phi.alpha.ln() }
    }

    fn from_volumes(s: &LatentState) -> Self {
        Self { surv: s.v_surv.ln(), kill: s.v_kill.ln() }
    }

    fn to_volumes(self) -> LatentState {
        LatentState { v_surv: self.surv.exp(), v_kill: self.kill.exp() }
    }

    #[inline]
    pub fn log_total(&self) -> f64 {
        log_add_exp(self.surv, self.kill)
    }

    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, phi: &RandomEffects, diff: &Diffusion, dt: f64, rng: &mut R) {
        if dt <= 0.0 {
            return;
        }
        let sq = dt.sqrt();
        let xi: f64 = rng.sample(StandardNormal);
        self.surv += phi.beta * dt + diff.gamma * sq * xi;
        if let Some(tau) = diff.tau {
            let zeta: f64 = rng.sample(StandardNormal);
            self.kill += -phi.delta * dt + tau * sq * zeta;
        }
    }
}

/// Draw from `N(mean, sd^2)` truncated to `[lower, upper]` by inversion.
pub fn sample_truncated_normal<R: Rng + ?Sized>(mean: f64, sd: f64, lower: f64, upper: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    if sd <= 0.0 {
        return mean.clamp(lower, upper);
    }
    let a = (lower - mean) / sd;
    let b = (upper - mean) / sd;
    // invert in the lower tail for precision
    let (a, b, sign) = if a > 0.0 { (-b, -a, -1.0) } else { (a, b, 1.0) };
    let (pa, pb) = (std_normal_cdf(a), std_normal_cdf(b));
    if !(pb > pa) {
        return if sign > 0.0 { lower.max(mean.min(upper)) } else { upper.min(mean.max(lower)) };
    }
    let z = std_normal_quantile(pa + u * (pb - pa)).clamp(a, b);
    (mean + sign * sd * z).clamp(lower, upper)
}

/// Draw `phi_i` given the population parameters.
///
/// `log beta_i ~ N(mean_log_beta, sigma_beta^2)`, `log delta_i ~
/// N(mean_log_delta, sigma_delta^2)` and `alpha_i ~ N(mean_alpha,
/// sigma_alpha^2)` truncated to `[0, 1]`.
pub fn draw_random_effects<R: Rng + ?Sized>(theta: &Theta, rng: &mut R) -> RandomEffects {
    let z: f64 = rng.sample(StandardNormal);
    let beta = (theta.mean_log_beta + theta.sigma_beta * z).exp();
    match &theta.treatment {
        None => RandomEffects { alpha: 0.0, beta, delta: f64::NAN },
        Some(t) => {
            let z: f64 = rng.sample(StandardNormal);
            let delta = (t.mean_log_delta + t.sigma_delta * z).exp();
            let alpha = sample_truncated_normal(t.mean_alpha, t.sigma_alpha, 0.0, 1.0, rng);
            RandomEffects { alpha, beta, delta }
        }
    }
}

/// Latent path at `times`, starting from the initial split at time 0.
pub fn simulate_path<R: Rng + ?Sized>(
    phi: &RandomEffects,
    theta: &Theta,
    v0: f64,
    times: &[f64],
    rng: &mut R,
) -> Result<Vec<LatentState>> {
    if !(v0 > 0.0) {
        return Err(Error::param(format!("initial volume must be positive, got {v0}")));
    }
    check_times(times)?;
    let diff = Diffusion::of(theta);
    let mut state = LogState::initial(phi, v0.ln());
    let mut prev = 0.0;
    Ok(times
        .iter()
        .map(|&t| {
            state.step(phi, &diff, t - prev, rng);
            prev = t;
            state.to_volumes()
        })
        .collect())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.first().is_some_and(|&t| !(t >= 0.0)) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("times must be non-negative and strictly increasing"));
    }
    Ok(())
}

/// Log-total-volume path at `times`, written into `out`.
#[inline]
pub(crate) fn simulate_log_totals<R: Rng + ?Sized>(
    phi: &RandomEffects,
    diff: &Diffusion,
    log_v0: f64,
    times: &[f64],
    rng: &mut R,
    out: &mut [f64],
) {
    let mut state = LogState::initial(phi, log_v0);
    let mut prev = 0.0;
    for (o, &t) in out.iter_mut().zip(times) {
        state.step(phi, diff, t - prev, rng);
        prev = t;
        *o = state.log_total();
    }
}

/// `y_j = log(total volume_j) + eps_j`, `eps_j ~ N(0, sigma_eps^2)` i.i.d.
pub fn apply_observation_noise<R: Rng + ?Sized>(path: &[LatentState], sigma_eps: f64, rng: &mut R) -> Vec<f64> {
    path.iter()
        .map(|s| {
            let e: f64 = rng.sample(StandardNormal);
            s.total().ln() + sigma_eps * e
        })
        .collect()
}

/// `log N(y; x, sigma_eps^2)` for a log-volume measurement `y` given the
/// latent log total volume `x`.
pub fn obs_logdensity(y: f64, x: f64, sigma_eps: f64) -> Result<f64> {
    if !(sigma_eps > 0.0) {
        return Err(Error::param(format!("sigma_eps must be positive, got {sigma_eps}")));
    }
    Ok(normal_logpdf(y, x, sigma_eps))
}

/// One subject's measurements at `times`, without sacrifice truncation.
pub fn simulate_observations<R: Rng + ?Sized>(
    theta: &Theta,
    v0: f64,
    times: &[f64],
    rng: &mut R,
) -> Result<(Vec<LatentState>, Vec<f64>)> {
    let phi = draw_random_effects(theta, rng);
    let path = simulate_path(&phi, theta, v0, times, rng)?;
    let y = apply_observation_noise(&path, theta.sigma_eps, rng);
    Ok((path, y))
}

/// Simulate every subject of `design`. With a sacrifice threshold, a
/// subject's series stops at the first time its latent total volume exceeds
/// the threshold (that measurement is kept).
pub fn simulate_dataset(theta: &Theta, design: &ObservationDesign, stream: Stream) -> Result<Dataset> {
    theta.validate()?;
    let subjects = (0..design.subject_count())
        .map(|i| {
            let mut rng = stream.path(&[keys::SUBJECT, i as u64]).rng();
            let times = design.times(i);
            let (path, y) = simulate_observations(theta, design.v0(i), times, &mut rng)?;
            let keep = match design.sacrifice_threshold() {
                Some(th) => path.iter().position(|s| s.total() > th).map_or(path.len(), |j| j + 1),
                None => path.len(),
            };
            if keep < 2 {
                return Err(Error::Truncated { subject: i, kept: keep });
            }
            SubjectData::new(format!("{}", i + 1), times[..keep].to_vec(), y[..keep].to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(subjects, design.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{presets, ModelKind, TreatmentParams};
    use crate::rng::Stream;

    fn one(beta: f64, gamma: f64) -> Theta {
        Theta { mean_log_beta: beta.ln(), gamma, sigma_beta: 0.0, sigma_eps: 0.0, treatment: None }
    }

    fn degenerate_two(beta: f64, delta: f64, alpha: f64) -> Theta {
        Theta {
            mean_log_beta: beta.ln(),
            gamma: 0.0,
            sigma_beta: 0.0,
            sigma_eps: 0.0,
            treatment: Some(TreatmentParams {
                mean_log_delta: delta.ln(),
                mean_alpha: alpha,
                tau: 0.0,
                sigma_delta: 0.0,
                sigma_alpha: 0.0,
            }),
        }
    }

    #[test]
    fn degenerate_variances_force_means() {
        let theta = degenerate_two(3.33, 1.14, 0.75);
        let phi = draw_random_effects(&theta, &mut Stream::new(1).rng());
        assert_eq!(phi.alpha, 0.75);
        assert!((phi.beta - 3.33).abs() < 1e-12);
        assert!((phi.delta - 1.14).abs() < 1e-12);
    }

    #[test]
    fn deterministic_double_exponential() {
        let ln2 = 2f64.ln();
        let theta = degenerate_two(ln2, ln2, 0.5);
        let phi = RandomEffects { alpha: 0.5, beta: ln2, delta: ln2 };
        let path = simulate_path(&phi, &theta, 100.0, &[0.0, 1.0], &mut Stream::new(0).rng()).unwrap();
        assert!((path[0].total() - 100.0).abs() < 1e-12);
        assert!((path[1].v_surv - 100.0).abs() < 1e-12);
        assert!((path[1].v_kill - 25.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_exponential() {
        let theta = one(3.33, 0.0);
        let phi = RandomEffects { alpha: 0.0, beta: 3.33, delta: f64::NAN };
        let path = simulate_path(&phi, &theta, 50.0, &[0.0, 2.0], &mut Stream::new(0).rng()).unwrap();
        let expected = 50.0 * 6.66f64.exp();
        assert!((path[1].total() - expected).abs() <= 1e-12 * expected);
        assert_eq!(path[1].v_kill, 0.0);
    }

    #[test]
    fn closed_form_zero_diffusion() {
        let theta = degenerate_two(2.1, 0.7, 0.3);
        let phi = RandomEffects { alpha: 0.3, beta: 2.1, delta: 0.7 };
        let times = [0.0, 0.1, 0.35, 0.8, 1.0];
        let path = simulate_path(&phi, &theta, 120.0, &times, &mut Stream::new(0).rng()).unwrap();
        for (s, &t) in path.iter().zip(&times) {
            let exact = 0.7 * 120.0 * (2.1 * t).exp() + 0.3 * 120.0 * (-0.7 * t).exp();
            assert!((s.total() - exact).abs() <= 1e-13 * exact);
        }
    }

    #[test]
    fn rejects_nonpositive_volume() {
        let theta = one(1.0, 0.1);
        let phi = RandomEffects { alpha: 0.0, beta: 1.0, delta: f64::NAN };
        assert!(simulate_path(&phi, &theta, 0.0, &[0.0, 1.0], &mut Stream::new(0).rng()).is_err());
    }

    #[test]
    fn noise_free_observations_are_log_volumes() {
        let path = [LatentState { v_surv: 100.0, v_kill: 0.0 }, LatentState { v_surv: 150.0, v_kill: 50.0 }];
        let y = apply_observation_noise(&path, 0.0, &mut Stream::new(0).rng());
        assert!((y[0] - 4.605_170_185_988_091).abs() < 1e-12);
        assert!((y[1] - 5.298_317_366_548_036).abs() < 1e-12);
    }

    #[test]
    fn obs_logdensity_values() {
        let s = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!(obs_logdensity(0.3, 0.3, s).unwrap().abs() < 1e-14);
        let v = obs_logdensity(5.0, 4.8, 0.2).unwrap();
        let hand = -0.5 * (2.0 * std::f64::consts::PI * 0.04).ln() - 0.5;
        assert!((v - hand).abs() < 1e-12);
        assert!((v - 0.190_499).abs() < 1e-6);
        assert!(obs_logdensity(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sacrifice_keeps_first_exceeding_observation() {
        let theta = degenerate_two(2f64.ln(), 1.0, 0.0);
        let design =
            ObservationDesign::shared_times(vec![0.0, 1.0, 2.0, 3.0], vec![600.0, 600.0], Some(1000.0)).unwrap();
        let ds = simulate_dataset(&theta, &design, Stream::new(3)).unwrap();
        for s in ds.subjects() {
            assert_eq!(s.times, vec![0.0, 1.0]);
        }
        let design = ObservationDesign::shared_times(vec![0.0, 1.0], vec![1200.0], Some(1000.0)).unwrap();
        assert!(matches!(
            simulate_dataset(&theta, &design, Stream::new(3)),
            Err(Error::Truncated { subject: 0, kept: 1 })
        ));
    }

    #[test]
    fn full_length_without_threshold() {
        let design = presets::group3_design();
        let ds = simulate_dataset(&presets::simulation_truth(), &design, Stream::new(11)).unwrap();
        assert_eq!(ds.len(), 8);
        for (i, s) in ds.subjects().iter().enumerate() {
            assert_eq!(s.times, design.times(i));
        }
        assert_eq!(ds.design().subject_count(), 8);
        assert_eq!(presets::simulation_truth().kind(), ModelKind::TwoCompartment);
    }

    #[test]
    fn truncated_normal_respects_bounds() {
        let mut rng = Stream::new(5).rng();
        for &(m, s) in &[(0.6, 0.2), (1.5, 0.05), (-3.0, 0.1), (0.5, 10.0), (0.9999, 1e-3)] {
            for _ in 0..1000 {
                let x = sample_truncated_normal(m, s, 0.0, 1.0, &mut rng);
                assert!((0.0..=1.0).contains(&x), "{m} {s} {x}");
            }
        }
    }
}
