use crate::error::{Error, Result};
use crate::model::SubjectData;
use crate::stats::normal_logpdf;

/// Exact log-likelihood of one subject under the one-compartment model with
/// a known growth rate `beta`.
///
/// Conditional on `beta`, `log V` is Brownian motion with drift started at
/// `log v0` at time 0, observed with Gaussian noise, so the prediction and
/// update steps of the Kalman filter are exact.
pub fn kalman_oracle_loglik(subject: &SubjectData, v0: f64, beta: f64, gamma: f64, sigma_eps: f64) -> Result<f64> {
    if !(v0 > 0.0) || !beta.is_finite() || !(gamma >= 0.0) || !(sigma_eps > 0.0) {
        return Err(Error::param(format!(
            "invalid oracle inputs v0={v0} beta={beta} gamma={gamma} sigma_eps={sigma_eps}"
        )));
    }
    let obs_var = sigma_eps * sigma_eps;
    let mut m = v0.ln();
    let mut p = 0.0;
    let mut prev = 0.0;
    let mut ll = 0.0;
    for (&t, &y) in subject.times.iter().zip(&subject.y) {
        let dt = t - prev;
        prev = t;
        m += beta * dt;
        p += gamma * gamma * dt;
        let s = p + obs_var;
        ll += normal_logpdf(y, m, s.sqrt());
        let k = p / s;
        m += k * (y - m);
        p *= 1.0 - k;
    }
    Ok(ll)
}
