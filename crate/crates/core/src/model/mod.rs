//! Growth models: parameters, priors and exact simulators.
//!
//! The one-compartment model is a geometric Brownian motion for untreated
//! growth; the two-compartment model splits the initial volume into a
//! surviving fraction that regrows and a killed fraction that is eliminated.
//! Measurements are log total volumes with Gaussian error.

mod design;
pub mod presets;
mod prior;
mod simulate;
mod theta;

pub use design::{Dataset, ObservationDesign, SubjectData};
pub use prior::{Prior, PriorSpec};
pub use simulate::{
    apply_observation_noise, draw_random_effects, obs_logdensity, sample_truncated_normal, simulate_dataset,
    simulate_observations, simulate_path, LatentState, RandomEffects,
};
pub(crate) use simulate::{simulate_log_totals, Diffusion, LogState};
pub use theta::{log_jacobian, ModelKind, Param, Theta, TreatmentParams};
