//! Reference parameter values and observation designs.
//!
//! Times in the designs are model time units of [`DAYS_PER_TIME_UNIT`] days,
//! counted from the first post-treatment measurement.

use super::design::ObservationDesign;
use super::theta::{ModelKind, Theta, TreatmentParams};

/// Days per model time unit used by the bundled designs.
pub const DAYS_PER_TIME_UNIT: f64 = 35.0;

/// Monday/Wednesday/Friday follow-up over five weeks, in days from the first
/// post-treatment measurement.
pub const FOLLOW_UP_DAYS: [f64; 16] =
    [0.0, 2.0, 4.0, 7.0, 9.0, 11.0, 14.0, 16.0, 18.0, 21.0, 23.0, 25.0, 28.0, 30.0, 32.0, 35.0];

/// Observations per subject in the bundled eight-subject design (subjects
/// sacrificed at different follow-up visits).
pub const GROUP3_LENGTHS: [usize; 8] = [16, 13, 11, 16, 9, 14, 16, 12];

/// Initial volumes (mm^3) of the bundled eight-subject design.
pub const GROUP3_V0: [f64; 8] = [142.0, 98.0, 176.0, 87.0, 231.0, 120.0, 75.0, 158.0];

/// Initial volumes (mm^3) of the bundled seventeen-subject design.
pub const LARGE_V0: [f64; 17] =
    [142.0, 98.0, 176.0, 87.0, 231.0, 120.0, 75.0, 158.0, 110.0, 205.0, 93.0, 167.0, 131.0, 82.0, 149.0, 190.0, 104.0];

/// Sacrifice threshold in mm^3.
pub const SACRIFICE_MM3: f64 = 1000.0;

#[allow(clippy::too_many_arguments)]
fn treated(
    beta_bar: f64,
    delta_bar: f64,
    alpha_bar: f64,
    gamma: f64,
    tau: f64,
    sigma_beta: f64,
    sigma_delta: f64,
    sigma_alpha: f64,
    sigma_eps: f64,
) -> Theta {
    Theta {
        mean_log_beta: beta_bar.ln(),
        gamma,
        sigma_beta,
        sigma_eps,
        treatment: Some(TreatmentParams {
            mean_log_delta: delta_bar.ln(),
            mean_alpha: alpha_bar,
            tau,
            sigma_delta,
            sigma_alpha,
        }),
    }
}

/// Ground truth of the eight-subject simulation study.
pub fn simulation_truth() -> Theta {
    treated(3.33, 1.14, 0.75, 1.09, 1.82, 0.51, 0.76, 0.29, 0.20)
}

/// Posterior means for treatment group 1 (exact inference).
pub fn group1_posterior_means() -> Theta {
    treated(5.81, 1.84, 0.52, 1.13, 1.50, 0.61, 0.67, 0.37, 0.22)
}

/// Posterior means for treatment group 3 (exact inference).
pub fn group3_posterior_means() -> Theta {
    treated(3.33, 1.14, 0.60, 1.09, 1.82, 0.51, 0.76, 0.29, 0.20)
}

/// Posterior means for the untreated control group (exact inference).
pub fn control_posterior_means() -> Theta {
    Theta { mean_log_beta: 6.57f64.ln(), gamma: 1.47, sigma_beta: 0.52, sigma_eps: 0.23, treatment: None }
}

/// Low-efficacy ground truth of the seventeen-subject study.
pub fn low_efficacy_truth() -> Theta {
    let mut t = group1_posterior_means();
    t.treatment.as_mut().unwrap().mean_alpha = 0.35;
    t
}

/// High-efficacy ground truth of the seventeen-subject study.
pub fn high_efficacy_truth() -> Theta {
    let mut t = group3_posterior_means();
    t.treatment.as_mut().unwrap().mean_alpha = 0.75;
    t
}

/// Chain starting point: `log beta_bar = log delta_bar = 1.6`,
/// `log alpha_bar = -0.36`, `log gamma = log tau = 0`,
/// `log sigma_beta = log sigma_delta = -0.7`, `log sigma_alpha = -2.3`,
/// `log sigma_eps = 0`.
pub fn default_start(kind: ModelKind) -> Theta {
    let u: &[f64] = match kind {
        ModelKind::TwoCompartment => &[1.6, 1.6, -0.36, 0.0, 0.0, -0.7, -0.7, -2.3, 0.0],
        ModelKind::OneCompartment => &[1.6, 0.0, -0.7, 0.0],
    };
    Theta::from_unconstrained(kind, u).expect("finite starting values")
}

fn to_time(days: &[f64]) -> Vec<f64> {
    days.iter().map(|d| d / DAYS_PER_TIME_UNIT).collect()
}

/// Eight subjects with fixed, already-censored follow-up lengths and no
/// sacrifice rule.
pub fn group3_design() -> ObservationDesign {
    let times = GROUP3_LENGTHS.iter().map(|&n| to_time(&FOLLOW_UP_DAYS[..n])).collect();
    ObservationDesign::new(times, GROUP3_V0.to_vec(), None).expect("valid bundled design")
}

/// Seventeen subjects on the full follow-up schedule with the sacrifice rule.
pub fn large_design() -> ObservationDesign {
    let times = vec![to_time(&FOLLOW_UP_DAYS); LARGE_V0.len()];
    ObservationDesign::new(times, LARGE_V0.to_vec(), Some(SACRIFICE_MM3)).expect("valid bundled design")
}
