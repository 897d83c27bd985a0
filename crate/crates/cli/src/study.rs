//! Repeated simulate-then-fit studies.

use std::io::Write;
use std::path::Path;

use sdemem::bsl::{run_bsl, BslConfig};
use sdemem::diagnostics::chain_summary;
use sdemem::exec::{try_map_indexed, Execution};
use sdemem::model::simulate_dataset;
use sdemem::pmm::{run_pmm, Chain};
use sdemem::rng::keys;
use sdemem::stats::median;
use sdemem::{Dataset, Error, ModelKind, ObservationDesign, Stream, Theta};

use crate::config::{Method, Settings};
use crate::error::{CliError, CliResult};

/// Runs one chain of `method` on `dataset` with the sampler settings.
pub fn fit(settings: &Settings, dataset: &Dataset, method: Method, stream: Stream) -> CliResult<Chain> {
    let chain = match method {
        Method::Pmm => run_pmm(dataset, &settings.priors, &settings.smc, &settings.mcmc, &settings.start, stream)?,
        Method::Bsl => {
            let cfg = BslConfig {
                simulations: settings.bsl_simulations,
                mcmc: settings.mcmc.clone(),
                execution: Execution::Parallel,
            };
            run_bsl(dataset, &settings.priors, &cfg, &settings.start, stream)?
        }
    };
    Ok(chain)
}

/// Fewest observations per subject that every summary statistic accepts.
pub fn min_observations(kind: ModelKind) -> usize {
    match kind {
        ModelKind::TwoCompartment => 3,
        ModelKind::OneCompartment => 2,
    }
}

/// Simulates the dataset of replicate `b`. Datasets in which sacrifice
/// truncation leaves some subject too short are discarded and the next
/// dataset sub-stream is tried.
pub fn replicate_dataset(
    truth: &Theta,
    design: &ObservationDesign,
    root: Stream,
    b: usize,
    attempts: usize,
) -> CliResult<Dataset> {
    let need = min_observations(truth.kind());
    for a in 0..attempts as u64 {
        let stream = root.path(&[keys::REPLICATE, b as u64, keys::DATASET, a]);
        match simulate_dataset(truth, design, stream) {
            Ok(ds) if ds.subjects().iter().all(|s| s.len() >= need) => return Ok(ds),
            Ok(_) | Err(Error::Truncated { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(CliError::Data(format!(
        "replicate {b}: every one of {attempts} simulated datasets had a subject with fewer than {need} observations"
    )))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyResult {
    pub kind: ModelKind,
    pub theta0: Vec<f64>,
    /// Posterior means, one row per replicate, on the reported scale.
    pub estimates: Vec<Vec<f64>>,
    pub acceptance: Vec<f64>,
    pub median_bias: Vec<f64>,
    pub rmse: Vec<f64>,
}

/// Per-parameter median of `estimate - theta0` and
/// `sqrt(mean((estimate - theta0)^2))`.
pub fn aggregate(theta0: &[f64], estimates: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let b = estimates.len() as f64;
    theta0
        .iter()
        .enumerate()
        .map(|(k, t0)| {
            let dev: Vec<f64> = estimates.iter().map(|e| e[k] - t0).collect();
            (median(&dev), (dev.iter().map(|d| d * d).sum::<f64>() / b).sqrt())
        })
        .unzip()
}

pub fn run_study(settings: &Settings, replicates: usize, burnin: usize, root: Stream) -> CliResult<StudyResult> {
    let truth = settings.truth.ok_or_else(|| CliError::Usage("sim-study needs a [truth] table".into()))?;
    let design =
        settings.design.as_ref().ok_or_else(|| CliError::Usage("sim-study needs a [design] section".into()))?;
    if truth.kind() != settings.kind {
        return Err(CliError::Usage("[truth] does not match the model kind".into()));
    }
    if replicates == 0 {
        return Err(CliError::Usage("need at least one replicate".into()));
    }
    let rows = try_map_indexed(Execution::Parallel, replicates, |b| {
        let ds = replicate_dataset(&truth, design, root, b, settings.max_dataset_attempts)?;
        let chain = fit(settings, &ds, settings.method, root.path(&[keys::REPLICATE, b as u64, keys::CHAIN]))?;
        let summary = chain_summary(&chain, settings.kind, burnin)?;
        Ok::<_, CliError>((summary.params.iter().map(|p| p.mean).collect::<Vec<f64>>(), chain.acceptance_rate))
    })?;
    let (estimates, acceptance): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let theta0 = truth.to_reported();
    let (median_bias, rmse) = aggregate(&theta0, &estimates);
    Ok(StudyResult { kind: settings.kind, theta0, estimates, acceptance, median_bias, rmse })
}

/// Rows `theta0`, `1..B`, `median_bias`, `rmse`; the last column holds the
/// acceptance rate of each replicate's chain.
pub fn write_study<W: Write>(writer: W, result: &StudyResult) -> CliResult<()> {
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["row".to_string()];
    header.extend(result.kind.params().iter().map(|p| p.name().to_string()));
    header.push("acceptance_rate".into());
    w.write_record(&header).map_err(io)?;
    let mut row = |label: String, values: &[f64], acc: Option<f64>| {
        let mut r = vec![label];
        r.extend(values.iter().map(|v| v.to_string()));
        r.push(acc.map_or(String::new(), |a| a.to_string()));
        w.write_record(&r).map_err(io)
    };
    row("theta0".into(), &result.theta0, None)?;
    for (b, (e, a)) in result.estimates.iter().zip(&result.acceptance).enumerate() {
        row((b + 1).to_string(), e, Some(*a))?;
    }
    row("median_bias".into(), &result.median_bias, None)?;
    row("rmse".into(), &result.rmse, None)?;
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn write_study_csv(path: &Path, result: &StudyResult) -> CliResult<()> {
    let f = std::fs::File::create(path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    write_study(std::io::BufWriter::new(f), result)
}
