//! Prior distributions over the stored parameter fields.

use crate::error::{Error, Result};
use crate::stats::{ln_gamma, normal_logpdf, std_normal_cdf};

use super::theta::{ModelKind, Param, Theta};

/// A univariate prior. Densities are with respect to the *stored* field of
/// [`Theta`], so the prior of `beta_bar` is a prior on `log beta_bar`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Prior {
    Normal {
        mean: f64,
        sd: f64,
    },
    TruncatedNormal {
        mean: f64,
        sd: f64,
        lower: f64,
        upper: f64,
    },
    /// Shape-scale convention: `p(x) ∝ x^-(shape+1) exp(-scale/x)`.
    InverseGamma {
        shape: f64,
        scale: f64,
    },
}

impl Prior {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Prior::Normal { mean, sd } => mean.is_finite() && sd > 0.0,
            Prior::TruncatedNormal { mean, sd, lower, upper } => mean.is_finite() && sd > 0.0 && lower < upper,
            Prior::InverseGamma { shape, scale } => shape > 0.0 && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid prior hyperparameters {self:?}")))
        }
    }

    pub fn logpdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NEG_INFINITY;
        }
        match *self {
            Prior::Normal { mean, sd } => normal_logpdf(x, mean, sd),
            Prior::TruncatedNormal { mean, sd, lower, upper } => {
                if x < lower || x > upper {
                    return f64::NEG_INFINITY;
                }
                let mass = std_normal_cdf((upper - mean) / sd) - std_normal_cdf((lower - mean) / sd);
                normal_logpdf(x, mean, sd) - mass.ln()
            }
            Prior::InverseGamma { shape, scale } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - scale / x
            }
        }
    }

    /// Location of the density maximum.
    pub fn mode(&self) -> f64 {
        match *self {
            Prior::Normal { mean, .. } => mean,
            Prior::TruncatedNormal { mean, lower, upper, .. } => mean.clamp(lower, upper),
            Prior::InverseGamma { shape, scale } => scale / (shape + 1.0),
        }
    }
}

/// One prior per parameter of a model.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorSpec {
    kind: ModelKind,
    priors: Vec<Prior>,
}

impl PriorSpec {
    /// `priors` in the canonical order of `kind.params()`.
    pub fn new(kind: ModelKind, priors: Vec<Prior>) -> Result<Self> {
        if priors.len() != kind.dim() {
            return Err(Error::Dimension { expected: kind.dim(), got: priors.len() });
        }
        for p in &priors {
            p.validate()?;
        }
        Ok(Self { kind, priors })
    }

    /// The informative priors of the case study: `alpha_bar ~ N_[0,1](0.6, 0.2^2)`,
    /// `log beta_bar, log delta_bar ~ N(0.7, 0.6^2)`, `sigma_beta, sigma_delta ~ IG(4, 2)`,
    /// `sigma_alpha ~ IG(5, 1.5)`, `gamma, tau ~ IG(5, 7)`, `sigma_eps ~ IG(2, 1)`.
    pub fn default_for(kind: ModelKind) -> Self {
        let priors = kind.params().iter().map(|&p| default_prior(p)).collect();
        Self { kind, priors }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn get(&self, p: Param) -> Option<&Prior> {
        self.kind.params().iter().position(|&q| q == p).map(|i| &self.priors[i])
    }

    pub fn set(&mut self, p: Param, prior: Prior) -> Result<()> {
        prior.validate()?;
        let i = self.kind.params().iter().position(|&q| q == p).ok_or(Error::NotInModel(p.name()))?;
        self.priors[i] = prior;
        Ok(())
    }

    pub fn priors(&self) -> &[Prior] {
        &self.priors
    }

    /// Sum of component log-densities; `-inf` outside the support or when
    /// `theta` is of a different model kind.
    pub fn logdensity(&self, theta: &Theta) -> f64 {
        if theta.kind() != self.kind {
            return f64::NEG_INFINITY;
        }
        self.kind
            .params()
            .iter()
            .zip(&self.priors)
            .map(|(&p, prior)| prior.logpdf(theta.field(p).expect("kind checked")))
            .sum()
    }

    /// Theta with every field at its prior mode.
    pub fn mode(&self) -> Theta {
        let mut t = Theta::zeros(self.kind);
        for (&p, prior) in self.kind.params().iter().zip(&self.priors) {
            t.set_field(p, prior.mode()).expect("kind matches");
        }
        t
    }
}

fn default_prior(p: Param) -> Prior {
    match p {
        Param::BetaBar | Param::DeltaBar => Prior::Normal { mean: 0.7, sd: 0.6 },
        Param::AlphaBar => Prior::TruncatedNormal { mean: 0.6, sd: 0.2, lower: 0.0, upper: 1.0 },
        Param::Gamma | Param::Tau => Prior::InverseGamma { shape: 5.0, scale: 7.0 },
        Param::SigmaBeta | Param::SigmaDelta => Prior::InverseGamma { shape: 4.0, scale: 2.0 },
        Param::SigmaAlpha => Prior::InverseGamma { shape: 5.0, scale: 1.5 },
        Param::SigmaEps => Prior::InverseGamma { shape: 2.0, scale: 1.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    #[test]
    fn alpha_outside_truncation_has_no_mass() {
        let spec = PriorSpec::default_for(ModelKind::TwoCompartment);
        let mut t = presets::simulation_truth();
        t.treatment.as_mut().unwrap().mean_alpha = 1.2;
        assert_eq!(spec.logdensity(&t), f64::NEG_INFINITY);
    }

    #[test]
    fn inverse_gamma_hand_value() {
        let ig = Prior::InverseGamma { shape: 4.0, scale: 2.0 };
        // 2^4 / Gamma(4) * 0.5^-5 * e^-4
        let expected = 4.0 * 2f64.ln() - 6f64.ln() + 5.0 * 2f64.ln() - 4.0;
        assert!((ig.logpdf(0.5) - expected).abs() < 1e-12);
        assert!((ig.logpdf(0.5) - 0.446_566).abs() < 1e-6);
        assert_eq!(ig.logpdf(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn truncated_normal_is_normalized() {
        let p = Prior::TruncatedNormal { mean: 0.6, sd: 0.2, lower: 0.0, upper: 1.0 };
        let n = 200_000;
        let h = 1.0 / n as f64;
        let integral: f64 = (0..n).map(|i| p.logpdf((i as f64 + 0.5) * h).exp() * h).sum();
        assert!((integral - 1.0).abs() < 1e-8);
    }

    #[test]
    fn mode_is_a_strict_maximum() {
        for kind in [ModelKind::OneCompartment, ModelKind::TwoCompartment] {
            let spec = PriorSpec::default_for(kind);
            let mode = spec.mode();
            let at_mode = spec.logdensity(&mode);
            assert!(at_mode.is_finite());
            for &p in kind.params() {
                for step in [-0.05, 0.05] {
                    let mut t = mode;
                    t.set_field(p, mode.field(p).unwrap() + step).unwrap();
                    assert!(spec.logdensity(&t) < at_mode, "{p} {step}");
                }
            }
        }
    }

    #[test]
    fn finite_exactly_on_support() {
        let spec = PriorSpec::default_for(ModelKind::TwoCompartment);
        let mut t = spec.mode();
        assert!(spec.logdensity(&t).is_finite());
        t.gamma = -0.1;
        assert_eq!(spec.logdensity(&t), f64::NEG_INFINITY);
        let mut t = spec.mode();
        t.treatment.as_mut().unwrap().mean_alpha = 0.0;
        assert!(spec.logdensity(&t).is_finite());
        assert_eq!(spec.logdensity(&presets::control_posterior_means()), f64::NEG_INFINITY);
    }
}
