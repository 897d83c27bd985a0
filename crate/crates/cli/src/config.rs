//! Run configuration files.
//!
//! A TOML file with an optional top-level `model`, `seed` and
//! `days_per_time_unit`, parameter tables `truth` and `start` on the reported
//! scale, a `design`, per-parameter `priors` overrides and the sampler
//! sections `smc`, `bsl`, `mcmc`, `study` and `ppc`. Missing entries take the
//! case-study defaults.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use sdemem::model::presets;
use sdemem::model::Prior;
use sdemem::pmm::McmcConfig;
use sdemem::smc::{FilterKind, SmcConfig};
use sdemem::{Execution, ModelKind, ObservationDesign, Param, PriorSpec, Theta};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub days_per_time_unit: Option<f64>,
    pub truth: Option<BTreeMap<String, f64>>,
    pub start: Option<BTreeMap<String, f64>>,
    pub design: Option<DesignConfig>,
    #[serde(default)]
    pub priors: BTreeMap<String, PriorConfig>,
    #[serde(default)]
    pub smc: SmcSection,
    #[serde(default)]
    pub bsl: BslSection,
    #[serde(default)]
    pub mcmc: McmcSection,
    #[serde(default)]
    pub study: StudySection,
    #[serde(default)]
    pub ppc: PpcSection,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    /// `group3` or `large`.
    pub preset: Option<String>,
    /// Shared follow-up days.
    pub days: Option<Vec<f64>>,
    /// Per-subject number of kept follow-up days.
    pub lengths: Option<Vec<usize>>,
    pub v0: Option<Vec<f64>>,
    pub sacrifice_mm3: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(tag = "dist", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PriorConfig {
    Normal { mean: f64, sd: f64 },
    TruncatedNormal { mean: f64, sd: f64, lower: f64, upper: f64 },
    InverseGamma { shape: f64, scale: f64 },
}

impl From<PriorConfig> for Prior {
    fn from(p: PriorConfig) -> Self {
        match p {
            PriorConfig::Normal { mean, sd } => Prior::Normal { mean, sd },
            PriorConfig::TruncatedNormal { mean, sd, lower, upper } => {
                Prior::TruncatedNormal { mean, sd, lower, upper }
            }
            PriorConfig::InverseGamma { shape, scale } => Prior::InverseGamma { shape, scale },
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmcSection {
    pub particles: usize,
    pub first_stage: usize,
    pub filter: String,
}

impl Default for SmcSection {
    fn default() -> Self {
        let d = SmcConfig::default();
        Self { particles: d.particles, first_stage: d.first_stage, filter: d.filter.to_string() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BslSection {
    pub simulations: usize,
}

impl Default for BslSection {
    fn default() -> Self {
        Self { simulations: 3000 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcSection {
    pub iterations: usize,
    pub burnin: usize,
    pub adapt_start: usize,
    pub adapt_scale: Option<f64>,
    pub jitter: f64,
    pub initial_proposal_sd: f64,
    pub init_attempts: usize,
    pub chains: usize,
}

impl Default for McmcSection {
    fn default() -> Self {
        let d = McmcConfig::default();
        Self {
            iterations: d.iterations,
            burnin: d.burnin,
            adapt_start: d.adapt_start,
            adapt_scale: d.adapt_scale,
            jitter: d.jitter,
            initial_proposal_sd: d.initial_proposal_sd,
            init_attempts: d.init_attempts,
            chains: 1,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySection {
    /// `pmm` or `bsl`.
    pub method: String,
    pub replicates: usize,
    /// Fresh datasets tried per replicate before giving up.
    pub max_dataset_attempts: usize,
}

impl Default for StudySection {
    fn default() -> Self {
        Self { method: "pmm".into(), replicates: 30, max_dataset_attempts: 100 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpcSection {
    pub thin: usize,
}

impl Default for PpcSection {
    fn default() -> Self {
        Self { thin: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Pmm,
    Bsl,
}

/// Validated settings derived from a [`RunConfig`].
#[derive(Clone, Debug)]
pub struct Settings {
    pub kind: ModelKind,
    pub seed: Option<u64>,
    pub days_per_time_unit: f64,
    pub truth: Option<Theta>,
    pub start: Theta,
    pub design: Option<ObservationDesign>,
    pub priors: PriorSpec,
    pub smc: SmcConfig,
    pub bsl_simulations: usize,
    pub mcmc: McmcConfig,
    pub chains: usize,
    pub method: Method,
    pub replicates: usize,
    pub max_dataset_attempts: usize,
    pub ppc_thin: usize,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| usage(format!("invalid config: {}", e.message())))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn resolve(&self) -> CliResult<Settings> {
        let kind: ModelKind = match &self.model {
            Some(m) => m.parse().map_err(|e: sdemem::Error| usage(e.to_string()))?,
            None => ModelKind::TwoCompartment,
        };
        let days_per_time_unit = self.days_per_time_unit.unwrap_or(presets::DAYS_PER_TIME_UNIT);
        if !(days_per_time_unit > 0.0) {
            return Err(usage("days_per_time_unit must be positive"));
        }
        let truth = self.truth.as_ref().map(|m| theta_from_map(kind, m, "truth")).transpose()?;
        let start = match &self.start {
            Some(m) => theta_from_map(kind, m, "start")?,
            None => presets::default_start(kind),
        };
        let design = self.design.as_ref().map(|d| d.resolve(days_per_time_unit)).transpose()?;

        let mut priors = PriorSpec::default_for(kind);
        for (name, p) in &self.priors {
            let param = param_in(kind, name, "priors")?;
            priors.set(param, (*p).into())?;
        }

        let filter: FilterKind = self.smc.filter.parse().map_err(|e: sdemem::Error| usage(e.to_string()))?;
        let smc = SmcConfig {
            particles: self.smc.particles,
            first_stage: self.smc.first_stage,
            filter,
            execution: Execution::Parallel,
        };
        smc.validate()?;
        let m = &self.mcmc;
        let mcmc = McmcConfig {
            iterations: m.iterations,
            burnin: m.burnin,
            adapt_start: m.adapt_start,
            adapt_scale: m.adapt_scale,
            jitter: m.jitter,
            initial_proposal_sd: m.initial_proposal_sd,
            init_attempts: m.init_attempts,
        };
        if m.chains == 0 {
            return Err(usage("mcmc.chains must be at least 1"));
        }
        let method = match self.study.method.as_str() {
            "pmm" => Method::Pmm,
            "bsl" => Method::Bsl,
            other => return Err(usage(format!("unknown study method `{other}`"))),
        };
        if self.ppc.thin == 0 {
            return Err(usage("ppc.thin must be at least 1"));
        }
        Ok(Settings {
            kind,
            seed: self.seed,
            days_per_time_unit,
            truth,
            start,
            design,
            priors,
            smc,
            bsl_simulations: self.bsl.simulations,
            mcmc,
            chains: m.chains,
            method,
            replicates: self.study.replicates,
            max_dataset_attempts: self.study.max_dataset_attempts.max(1),
            ppc_thin: self.ppc.thin,
        })
    }
}

fn param_in(kind: ModelKind, name: &str, section: &str) -> CliResult<Param> {
    Param::from_name(name)
        .filter(|p| kind.params().contains(p))
        .ok_or_else(|| usage(format!("[{section}] `{name}` is not a parameter of the {kind} model")))
}

fn theta_from_map(kind: ModelKind, map: &BTreeMap<String, f64>, section: &str) -> CliResult<Theta> {
    for name in map.keys() {
        param_in(kind, name, section)?;
    }
    let values = kind
        .params()
        .iter()
        .map(|p| map.get(p.name()).copied().ok_or_else(|| usage(format!("[{section}] is missing `{}`", p.name()))))
        .collect::<CliResult<Vec<f64>>>()?;
    let theta = Theta::from_reported(kind, &values)?;
    theta.validate()?;
    Ok(theta)
}

impl DesignConfig {
    fn resolve(&self, days_per_time_unit: f64) -> CliResult<ObservationDesign> {
        let explicit = self.days.is_some() || self.v0.is_some() || self.lengths.is_some();
        match self.preset.as_deref() {
            Some(_) if explicit => Err(usage("design: give either `preset` or explicit days/v0, not both")),
            Some("group3") => Ok(presets::group3_design()),
            Some("large") => Ok(presets::large_design()),
            Some(other) => Err(usage(format!("unknown design preset `{other}`"))),
            None => {
                let days = self.days.as_ref().ok_or_else(|| usage("design: `days` is required"))?;
                let v0 = self.v0.clone().ok_or_else(|| usage("design: `v0` is required"))?;
                let times: Vec<f64> = days.iter().map(|d| (d - days[0]) / days_per_time_unit).collect();
                let per_subject = match &self.lengths {
                    Some(lengths) => {
                        if lengths.len() != v0.len() {
                            return Err(usage("design: `lengths` and `v0` differ in length"));
                        }
                        lengths
                            .iter()
                            .map(|&n| {
                                if n > times.len() {
                                    Err(usage(format!("design: length {n} exceeds the schedule")))
                                } else {
                                    Ok(times[..n].to_vec())
                                }
                            })
                            .collect::<CliResult<Vec<_>>>()?
                    }
                    None => vec![times; v0.len()],
                };
                Ok(ObservationDesign::new(per_subject, v0, self.sacrifice_mm3).map_err(|e| usage(e.to_string()))?)
            }
        }
    }
}
