use rand::Rng;

use crate::error::{Error, Result};

/// Stratified resampling: one uniform draw in each of the `n` strata
/// `[(k-1)/n, k/n)`, mapped through the inverse of the cumulative weights.
///
/// `weights` must be non-negative and sum to one within `1e-10`.
pub fn stratified_resample<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<Vec<usize>> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("empty weight vector".into()));
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidWeights("weights must be finite and non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, expected 1")));
    }
    let mut out = vec![0; weights.len()];
    resample_into(weights, rng, &mut out);
    Ok(out)
}

/// [`stratified_resample`] without validation, writing `out.len()` indices.
/// Weights only need to be non-negative with a positive sum; they are
/// normalized by that sum.
pub(crate) fn resample_into<R: Rng + ?Sized>(weights: &[f64], rng: &mut R, out: &mut [usize]) {
    let n = out.len();
    let total: f64 = weights.iter().sum();
    let last_positive = weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1);
    let step = total / n as f64;
    let mut cum = weights[0];
    let mut i = 0;
    for (k, o) in out.iter_mut().enumerate() {
        let u = (k as f64 + rng.random::<f64>()) * step;
        while cum <= u && i < last_positive {
            i += 1;
            cum += weights[i];
        }
        *o = i;
    }
}
