//! Population parameter vector and its unconstrained representation.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Untreated growth: a single geometric Brownian motion compartment.
    OneCompartment,
    /// Treated growth: surviving and killed compartments.
    TwoCompartment,
}

impl ModelKind {
    /// Parameters of this model, in canonical order.
    pub fn params(self) -> &'static [Param] {
        match self {
            ModelKind::OneCompartment => &Param::ONE_COMPARTMENT,
            ModelKind::TwoCompartment => &Param::TWO_COMPARTMENT,
        }
    }

    pub fn dim(self) -> usize {
        self.params().len()
    }

    /// Number of per-subject summary statistics used by BSL.
    pub fn intra_summary_len(self) -> usize {
        match self {
            ModelKind::OneCompartment => 4,
            ModelKind::TwoCompartment => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::OneCompartment => "one-compartment",
            ModelKind::TwoCompartment => "two-compartment",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-compartment" | "one" => Ok(ModelKind::OneCompartment),
            "two-compartment" | "two" => Ok(ModelKind::TwoCompartment),
            other => Err(Error::param(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Named population parameters.
///
/// The *reported* value of every parameter is positive: `beta_bar` and
/// `delta_bar` are reported as rates (`exp` of the stored log-mean), all
/// other parameters are stored as-is. The unconstrained coordinate is the
/// log of the reported value in every case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Param {
    BetaBar,
    DeltaBar,
    AlphaBar,
    Gamma,
    Tau,
    SigmaBeta,
    SigmaDelta,
    SigmaAlpha,
    SigmaEps,
}

impl Param {
    pub const TWO_COMPARTMENT: [Param; 9] = [
        Param::BetaBar,
        Param::DeltaBar,
        Param::AlphaBar,
        Param::Gamma,
        Param::Tau,
        Param::SigmaBeta,
        Param::SigmaDelta,
        Param::SigmaAlpha,
        Param::SigmaEps,
    ];

    pub const ONE_COMPARTMENT: [Param; 4] = [Param::BetaBar, Param::Gamma, Param::SigmaBeta, Param::SigmaEps];

    pub fn name(self) -> &'static str {
        match self {
            Param::BetaBar => "beta_bar",
            Param::DeltaBar => "delta_bar",
            Param::AlphaBar => "alpha_bar",
            Param::Gamma => "gamma",
            Param::Tau => "tau",
            Param::SigmaBeta => "sigma_beta",
            Param::SigmaDelta => "sigma_delta",
            Param::SigmaAlpha => "sigma_alpha",
            Param::SigmaEps => "sigma_eps",
        }
    }

    pub fn from_name(name: &str) -> Option<Param> {
        Param::TWO_COMPARTMENT.into_iter().find(|p| p.name() == name)
    }

    /// True when the stored field is already the unconstrained coordinate
    /// (the log-mean rates), so the reparameterization has unit Jacobian.
    pub fn stored_on_log_scale(self) -> bool {
        matches!(self, Param::BetaBar | Param::DeltaBar)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters that only exist in the two-compartment model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreatmentParams {
    /// Mean of `log delta_i`.
    pub mean_log_delta: f64,
    /// Location of the truncated normal for the kill fraction `alpha_i`.
    pub mean_alpha: f64,
    /// Diffusion of the killed compartment.
    pub tau: f64,
    pub sigma_delta: f64,
    pub sigma_alpha: f64,
}

/// Full parameter vector `(eta, kappa, sigma_eps)`.
///
/// Scales may be zero for degenerate simulation; the sampler works on the
/// unconstrained scale, which requires them to be strictly positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theta {
    /// Mean of `log beta_i`.
    pub mean_log_beta: f64,
    /// Diffusion of the (surviving) growth compartment.
    pub gamma: f64,
    pub sigma_beta: f64,
    pub sigma_eps: f64,
    pub treatment: Option<TreatmentParams>,
}

impl Theta {
    pub fn kind(&self) -> ModelKind {
        if self.treatment.is_some() {
            ModelKind::TwoCompartment
        } else {
            ModelKind::OneCompartment
        }
    }

    pub fn treatment(&self) -> Result<&TreatmentParams> {
        self.treatment.as_ref().ok_or(Error::NotInModel("treatment parameters"))
    }

    pub fn mean_log_delta(&self) -> Result<f64> {
        self.treatment.map(|t| t.mean_log_delta).ok_or(Error::NotInModel("delta_bar"))
    }

    pub fn mean_alpha(&self) -> Result<f64> {
        self.treatment.map(|t| t.mean_alpha).ok_or(Error::NotInModel("alpha_bar"))
    }

    pub fn tau(&self) -> Result<f64> {
        self.treatment.map(|t| t.tau).ok_or(Error::NotInModel("tau"))
    }

    pub fn sigma_delta(&self) -> Result<f64> {
        self.treatment.map(|t| t.sigma_delta).ok_or(Error::NotInModel("sigma_delta"))
    }

    pub fn sigma_alpha(&self) -> Result<f64> {
        self.treatment.map(|t| t.sigma_alpha).ok_or(Error::NotInModel("sigma_alpha"))
    }

    /// Value of the stored field for `p` (log-mean for the rates).
    pub fn field(&self, p: Param) -> Result<f64> {
        Ok(match p {
            Param::BetaBar => self.mean_log_beta,
            Param::Gamma => self.gamma,
            Param::SigmaBeta => self.sigma_beta,
            Param::SigmaEps => self.sigma_eps,
            Param::DeltaBar => self.mean_log_delta()?,
            Param::AlphaBar => self.mean_alpha()?,
            Param::Tau => self.tau()?,
            Param::SigmaDelta => self.sigma_delta()?,
            Param::SigmaAlpha => self.sigma_alpha()?,
        })
    }

    fn field_mut(&mut self, p: Param) -> Result<&mut f64> {
        if let Some(t) = self.treatment.as_mut() {
            match p {
                Param::DeltaBar => return Ok(&mut t.mean_log_delta),
                Param::AlphaBar => return Ok(&mut t.mean_alpha),
                Param::Tau => return Ok(&mut t.tau),
                Param::SigmaDelta => return Ok(&mut t.sigma_delta),
                Param::SigmaAlpha => return Ok(&mut t.sigma_alpha),
                _ => {}
            }
        }
        match p {
            Param::BetaBar => Ok(&mut self.mean_log_beta),
            Param::Gamma => Ok(&mut self.gamma),
            Param::SigmaBeta => Ok(&mut self.sigma_beta),
            Param::SigmaEps => Ok(&mut self.sigma_eps),
            other => Err(Error::NotInModel(other.name())),
        }
    }

    /// Set the stored field for `p`.
    pub fn set_field(&mut self, p: Param, value: f64) -> Result<()> {
        *self.field_mut(p)? = value;
        Ok(())
    }

    /// Reported (natural-scale) value of `p`.
    pub fn reported(&self, p: Param) -> Result<f64> {
        let v = self.field(p)?;
        Ok(if p.stored_on_log_scale() { v.exp() } else { v })
    }

    /// Reported values in canonical parameter order.
    pub fn to_reported(&self) -> Vec<f64> {
        self.kind().params().iter().map(|&p| self.reported(p).expect("param belongs to kind")).collect()
    }

    /// Build from reported values in canonical order.
    pub fn from_reported(kind: ModelKind, values: &[f64]) -> Result<Theta> {
        check_len(kind, values.len())?;
        let mut theta = Theta::zeros(kind);
        for (&p, &v) in kind.params().iter().zip(values) {
            let stored = if p.stored_on_log_scale() {
                if v <= 0.0 {
                    return Err(Error::param(format!("{p} must be positive, got {v}")));
                }
                v.ln()
            } else {
                v
            };
            theta.set_field(p, stored)?;
        }
        theta.validate()?;
        Ok(theta)
    }

    /// All-zero parameter vector of the given kind.
    pub fn zeros(kind: ModelKind) -> Theta {
        Theta {
            mean_log_beta: 0.0,
            gamma: 0.0,
            sigma_beta: 0.0,
            sigma_eps: 0.0,
            treatment: match kind {
                ModelKind::OneCompartment => None,
                ModelKind::TwoCompartment => Some(TreatmentParams {
                    mean_log_delta: 0.0,
                    mean_alpha: 0.0,
                    tau: 0.0,
                    sigma_delta: 0.0,
                    sigma_alpha: 0.0,
                }),
            },
        }
    }

    /// Finite fields, non-negative scales, `mean_alpha` in `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        for &p in self.kind().params() {
            let v = self.field(p)?;
            if !v.is_finite() {
                return Err(Error::param(format!("{p} is not finite")));
            }
            if !p.stored_on_log_scale() && v < 0.0 {
                return Err(Error::param(format!("{p} must be non-negative, got {v}")));
            }
        }
        if let Some(t) = &self.treatment {
            if !(0.0..=1.0).contains(&t.mean_alpha) {
                return Err(Error::param(format!("alpha_bar must lie in [0, 1], got {}", t.mean_alpha)));
            }
        }
        Ok(())
    }

    /// Map to the unconstrained sampling coordinates: the log of each
    /// reported value.
    pub fn to_unconstrained(&self) -> Result<Vec<f64>> {
        self.kind()
            .params()
            .iter()
            .map(|&p| {
                let v = self.field(p)?;
                if p.stored_on_log_scale() {
                    Ok(v)
                } else if v > 0.0 {
                    Ok(v.ln())
                } else {
                    Err(Error::param(format!("{p} must be positive to take its log, got {v}")))
                }
            })
            .collect()
    }

    /// Inverse of [`Theta::to_unconstrained`]. The result may have
    /// `alpha_bar > 1`; such points carry zero prior mass.
    pub fn from_unconstrained(kind: ModelKind, u: &[f64]) -> Result<Theta> {
        check_len(kind, u.len())?;
        let mut theta = Theta::zeros(kind);
        for (&p, &x) in kind.params().iter().zip(u) {
            if !x.is_finite() {
                return Err(Error::param(format!("unconstrained {p} is not finite")));
            }
            theta.set_field(p, if p.stored_on_log_scale() { x } else { x.exp() })?;
        }
        Ok(theta)
    }
}

/// Log-Jacobian of the map from unconstrained coordinates to the stored
/// fields: the sum of the coordinates that pass through `exp`.
pub fn log_jacobian(kind: ModelKind, u: &[f64]) -> f64 {
    kind.params().iter().zip(u).filter(|(p, _)| !p.stored_on_log_scale()).map(|(_, &x)| x).sum()
}

fn check_len(kind: ModelKind, got: usize) -> Result<()> {
    if got != kind.dim() {
        return Err(Error::Dimension { expected: kind.dim(), got });
    }
    Ok(())
}
