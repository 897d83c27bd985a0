use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::stats::{ln_gamma, LN_2PI};

/// Sample mean and covariance (denominator `N - 1`) of the rows of
/// `samples`.
pub fn estimate_moments(samples: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = samples.nrows();
    if n < 2 {
        return Err(Error::Samples(format!("need at least 2 samples, got {n}")));
    }
    let mu: DVector<f64> = samples.row_mean().transpose();
    let mut centred = samples.clone();
    for mut row in centred.row_iter_mut() {
        row -= mu.transpose();
    }
    let mut cov = centred.tr_mul(&centred) / (n - 1) as f64;
    cov.fill_upper_triangle_with_lower_triangle();
    Ok((mu, cov))
}

/// `ln c(k, v)` with `c(k, v) = 2^(-kv/2) pi^(-k(k-1)/4) / prod_{i=1..k} Gamma((v-i+1)/2)`.
pub fn ln_wishart_const(k: usize, v: f64) -> f64 {
    let kf = k as f64;
    let mut s = -(kf * v / 2.0) * std::f64::consts::LN_2 - kf * (kf - 1.0) / 4.0 * std::f64::consts::PI.ln();
    for i in 1..=k {
        s -= ln_gamma((v - i as f64 + 1.0) / 2.0);
    }
    s
}

/// Unbiased estimator of a Gaussian density at a point, from the sample
/// moments of `n` draws. The constant part depends only on `(d, n)`.
#[derive(Clone, Copy, Debug)]
pub struct GhuryeOlkin {
    d: usize,
    n: usize,
    log_const: f64,
}

impl GhuryeOlkin {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if n <= d + 3 {
            return Err(Error::Samples(format!("simulation count {n} must exceed summary dimension + 3 = {}", d + 3)));
        }
        let (df, nf) = (d as f64, n as f64);
        let log_const = -0.5 * df * LN_2PI + ln_wishart_const(d, nf - 2.0)
            - ln_wishart_const(d, nf - 1.0)
            - 0.5 * df * (1.0 - 1.0 / nf).ln();
        Ok(Self { d, n, log_const })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn simulations(&self) -> usize {
        self.n
    }

    /// Log of the estimate, `-inf` when the rank-one-downdated scatter
    /// matrix is not positive definite.
    pub fn logdensity(&self, s: &[f64], mu: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<f64> {
        check_shapes(self.d, s, mu, sigma)?;
        let nf = self.n as f64;
        let df = self.d as f64;
        let a = sigma * (nf - 1.0);
        let Some(ch) = a.cholesky() else {
            return Ok(f64::NEG_INFINITY);
        };
        let l = ch.l_dirty();
        let log_det_a = 2.0 * (0..self.d).map(|i| l[(i, i)].ln()).sum::<f64>();
        let z = DVector::from_iterator(self.d, s.iter().zip(mu.iter()).map(|(a, b)| a - b));
        let w = l.solve_lower_triangular(&z).expect("cholesky factor is invertible");
        let k = 1.0 - w.norm_squared() / (1.0 - 1.0 / nf);
        if !(k > 0.0) || !log_det_a.is_finite() {
            return Ok(f64::NEG_INFINITY);
        }
        let log_det_b = log_det_a + k.ln();
        Ok(self.log_const - 0.5 * (nf - df - 2.0) * log_det_a + 0.5 * (nf - df - 3.0) * log_det_b)
    }
}

fn check_shapes(d: usize, s: &[f64], mu: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<()> {
    if s.len() != d {
        return Err(Error::Dimension { expected: d, got: s.len() });
    }
    if mu.len() != d {
        return Err(Error::Dimension { expected: d, got: mu.len() });
    }
    if sigma.nrows() != d || sigma.ncols() != d {
        return Err(Error::Dimension { expected: d, got: sigma.nrows().max(sigma.ncols()) });
    }
    let scale = sigma.amax().max(f64::MIN_POSITIVE);
    for i in 0..d {
        for j in 0..i {
            if (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::Samples("covariance matrix is not symmetric".into()));
            }
        }
    }
    Ok(())
}

/// Ghurye-Olkin estimate of `log N(s; mu, Sigma)` from moments of `n`
/// simulations.
pub fn ghurye_olkin_logdensity(s: &[f64], mu_hat: &DVector<f64>, sigma_hat: &DMatrix<f64>, n: usize) -> Result<f64> {
    GhuryeOlkin::new(s.len(), n)?.logdensity(s, mu_hat, sigma_hat)
}

/// `log N(s; mu, Sigma)`, `-inf` when `Sigma` is not positive definite.
pub fn gaussian_plugin_logdensity(s: &[f64], mu_hat: &DVector<f64>, sigma_hat: &DMatrix<f64>) -> Result<f64> {
    let d = s.len();
    check_shapes(d, s, mu_hat, sigma_hat)?;
    let Some(ch) = sigma_hat.clone().cholesky() else {
        return Ok(f64::NEG_INFINITY);
    };
    let l = ch.l_dirty();
    let log_det = 2.0 * (0..d).map(|i| l[(i, i)].ln()).sum::<f64>();
    let z = DVector::from_iterator(d, s.iter().zip(mu_hat.iter()).map(|(a, b)| a - b));
    let w = l.solve_lower_triangular(&z).expect("cholesky factor is invertible");
    Ok(-0.5 * d as f64 * LN_2PI - 0.5 * log_det - 0.5 * w.norm_squared())
}
