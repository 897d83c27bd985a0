//! Chain CSV files: `iter,<parameters on the reported scale>,log_lik_est,accepted`.
//!
//! Values are written in shortest round-trip form, so reading a file back
//! reproduces the reported values exactly.

use std::io::{Read, Write};
use std::path::Path;

use sdemem::pmm::{Chain, ChainState, McmcConfig};
use sdemem::{ModelKind, Theta};

use crate::error::{CliError, CliResult};

pub fn header(kind: ModelKind) -> Vec<String> {
    let mut h = vec!["iter".to_string()];
    h.extend(kind.params().iter().map(|p| p.name().to_string()));
    h.push("log_lik_est".into());
    h.push("accepted".into());
    h
}

pub fn write_chain<W: Write>(writer: W, chain: &Chain, kind: ModelKind) -> CliResult<()> {
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header(kind)).map_err(io)?;
    for (r, s) in chain.states.iter().enumerate() {
        let theta = Theta::from_unconstrained(kind, &s.theta_unconstrained)?;
        let mut row = vec![(r + 1).to_string()];
        row.extend(theta.to_reported().iter().map(|v| v.to_string()));
        row.push(s.log_lik_estimate.to_string());
        row.push(if s.accepted { "1" } else { "0" }.to_string());
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn write_chain_csv(path: &Path, chain: &Chain, kind: ModelKind) -> CliResult<()> {
    let f = std::fs::File::create(path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    write_chain(std::io::BufWriter::new(f), chain, kind)
}

/// Reads a chain file; the model kind is recognized from the header. Draws
/// are stored back on the unconstrained scale.
pub fn read_chain<R: Read>(reader: R, source: &str) -> CliResult<(ModelKind, Chain)> {
    let err = |msg: String| CliError::Data(format!("{source}: {msg}"));
    let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
    let h: Vec<String> =
        rdr.headers().map_err(|e| err(format!("cannot read header: {e}")))?.iter().map(String::from).collect();
    let kind = [ModelKind::TwoCompartment, ModelKind::OneCompartment]
        .into_iter()
        .find(|k| header(*k) == h)
        .ok_or_else(|| err(format!("unrecognized chain header `{}`", h.join(","))))?;
    let d = kind.dim();
    let mut states = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(format!("malformed row: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize| -> CliResult<f64> {
            rec[i].parse().map_err(|_| err(format!("line {line}: `{}` is not a number", &rec[i])))
        };
        let reported = (1..=d).map(num).collect::<CliResult<Vec<f64>>>()?;
        let theta = Theta::from_reported(kind, &reported).map_err(|e| err(format!("line {line}: {e}")))?;
        let u = theta.to_unconstrained().map_err(|e| err(format!("line {line}: {e}")))?;
        let accepted = match &rec[d + 2] {
            "1" => true,
            "0" => false,
            other => return Err(err(format!("line {line}: accepted must be 0 or 1, got `{other}`"))),
        };
        states.push(ChainState {
            theta_unconstrained: u,
            log_prior: f64::NAN,
            log_lik_estimate: num(d + 1)?,
            accepted,
        });
    }
    if states.is_empty() {
        return Err(err("no draws".into()));
    }
    let acceptance_rate = states.iter().filter(|s| s.accepted).count() as f64 / states.len() as f64;
    let config = McmcConfig { iterations: states.len(), burnin: 0, ..Default::default() };
    Ok((kind, Chain { states, acceptance_rate, config, seed: 0 }))
}

pub fn read_chain_csv(path: &Path) -> CliResult<(ModelKind, Chain)> {
    let f = std::fs::File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open chain file {}: {e}", path.display())))?;
    read_chain(std::io::BufReader::new(f), &path.display().to_string())
}
