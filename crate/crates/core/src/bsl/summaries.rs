use crate::error::{Error, Result};
use crate::model::{Dataset, ModelKind, SubjectData};
use crate::stats::{mean, mean_abs_deviation};

/// Observed or simulated summary statistics: one block per subject followed
/// by the three between-subject statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryVector {
    pub values: Vec<f64>,
    pub kind: ModelKind,
    pub subjects: usize,
}

impl SummaryVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Length of the summary vector for `m` subjects.
pub fn summary_dim(kind: ModelKind, m: usize) -> usize {
    kind.intra_summary_len() * m + 3
}

/// Slope of the OLS regression with intercept of `y[1..]` on `y[..n-1]`;
/// zero when the predictor has no spread.
fn ar1_slope(y: &[f64]) -> f64 {
    let x = &y[..y.len() - 1];
    let z = &y[1..];
    let mx = mean(x);
    let mz = mean(z);
    let (mut sxz, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(z) {
        sxz += (a - mx) * (b - mz);
        sxx += (a - mx) * (a - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxz / sxx
    }
}

pub(crate) fn intra_into(times: &[f64], y: &[f64], kind: ModelKind, out: &mut [f64]) -> Result<()> {
    let n = y.len();
    if n < 2 {
        return Err(Error::Summary(format!("need at least 2 observations, got {n}")));
    }
    out[0] = mean_abs_deviation(y);
    out[1] = (y[n - 1] - y[0]) / (times[n - 1] - times[0]);
    out[2] = y[0];
    out[3] = y[1];
    if kind == ModelKind::TwoCompartment {
        if n < 3 {
            return Err(Error::Summary("the autoregressive slope needs at least 3 observations".into()));
        }
        out[4] = ar1_slope(y);
    }
    Ok(())
}

/// Within-subject statistics: mean absolute deviation, first-to-last slope,
/// first and second measurement and, for the two-compartment model, the
/// lag-one autoregressive slope.
pub fn intra_summaries(subject: &SubjectData, kind: ModelKind) -> Result<Vec<f64>> {
    let mut out = vec![0.0; kind.intra_summary_len()];
    intra_into(&subject.times, &subject.y, kind, &mut out)?;
    Ok(out)
}

pub(crate) fn inter_from_columns(first: &[f64], second: &[f64], last: &[f64]) -> [f64; 3] {
    [mean_abs_deviation(first), mean_abs_deviation(second), mean_abs_deviation(last)]
}

/// Mean absolute deviation across subjects of the first, second and last
/// measurements.
pub fn inter_summaries(dataset: &Dataset) -> Result<[f64; 3]> {
    if dataset.len() < 2 {
        return Err(Error::Summary(format!("need at least 2 subjects, got {}", dataset.len())));
    }
    let mut cols = [Vec::new(), Vec::new(), Vec::new()];
    for s in dataset.subjects() {
        if s.len() < 2 {
            return Err(Error::Summary(format!("subject {} has fewer than 2 observations", s.id)));
        }
        cols[0].push(s.y[0]);
        cols[1].push(s.y[1]);
        cols[2].push(s.y[s.len() - 1]);
    }
    Ok(inter_from_columns(&cols[0], &cols[1], &cols[2]))
}

pub fn summarize_dataset(dataset: &Dataset, kind: ModelKind) -> Result<SummaryVector> {
    let k = kind.intra_summary_len();
    let inter = inter_summaries(dataset)?;
    let mut values = vec![0.0; summary_dim(kind, dataset.len())];
    for (i, s) in dataset.subjects().iter().enumerate() {
        intra_into(&s.times, &s.y, kind, &mut values[i * k..(i + 1) * k])?;
    }
    let m = dataset.len();
    values[k * m..].copy_from_slice(&inter);
    Ok(SummaryVector { values, kind, subjects: m })
}
