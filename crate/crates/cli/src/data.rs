//! Dataset CSV files: `subject_id,day,volume_mm3`, one row per measurement.
//!
//! Volumes are stored on the natural scale; the model works with their logs.
//! Model time is `(day - first day of the subject) / days_per_time_unit`, and
//! each subject's first volume is its initial volume.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use sdemem::{Dataset, SubjectData};

use crate::error::{CliError, CliResult};

pub const HEADER: [&str; 3] = ["subject_id", "day", "volume_mm3"];

fn data_err(msg: impl Into<String>) -> CliError {
    CliError::Data(msg.into())
}

/// Subject ordering: numeric when every id is an integer, lexicographic
/// otherwise.
fn order_ids(ids: &mut [String]) {
    if ids.iter().all(|s| s.parse::<i64>().is_ok()) {
        ids.sort_by_key(|s| s.parse::<i64>().unwrap());
    } else {
        ids.sort();
    }
}

pub fn read_dataset<R: Read>(reader: R, days_per_time_unit: f64) -> CliResult<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| data_err(format!("cannot read header: {e}")))?;
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(data_err(format!(
            "line 1: header must be exactly `{}`, got `{}`",
            HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows: BTreeMap<String, Vec<(f64, f64, u64)>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| data_err(format!("malformed row: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(data_err(format!("line {line}: expected 3 fields, got {}", rec.len())));
        }
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(data_err(format!("line {line}: empty subject_id")));
        }
        let day: f64 =
            rec[1].parse().map_err(|_| data_err(format!("line {line}: day `{}` is not a number", &rec[1])))?;
        let vol: f64 =
            rec[2].parse().map_err(|_| data_err(format!("line {line}: volume `{}` is not a number", &rec[2])))?;
        if !day.is_finite() {
            return Err(data_err(format!("line {line}: day must be finite")));
        }
        if !(vol > 0.0) || !vol.is_finite() {
            return Err(data_err(format!("line {line}: volume must be positive, got {vol}")));
        }
        rows.entry(id).or_default().push((day, vol, line));
    }
    if rows.is_empty() {
        return Err(data_err("no data rows"));
    }
    let mut ids: Vec<String> = rows.keys().cloned().collect();
    order_ids(&mut ids);
    let mut subjects = Vec::with_capacity(ids.len());
    let mut v0 = Vec::with_capacity(ids.len());
    for id in ids {
        let mut r = rows.remove(&id).unwrap();
        r.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = r.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(data_err(format!(
                "line {}: duplicate day {} for subject {id} (also on line {})",
                w[1].2, w[1].0, w[0].2
            )));
        }
        if r.len() < 2 {
            return Err(data_err(format!("subject {id} has {} row(s), need at least 2", r.len())));
        }
        let first = r[0].0;
        let times = r.iter().map(|x| (x.0 - first) / days_per_time_unit).collect();
        let y = r.iter().map(|x| x.1.ln()).collect();
        v0.push(r[0].1);
        subjects.push(SubjectData::new(id, times, y)?);
    }
    Ok(Dataset::from_observations(subjects, v0)?)
}

pub fn parse_dataset_csv(path: &Path, days_per_time_unit: f64) -> CliResult<Dataset> {
    let f =
        std::fs::File::open(path).map_err(|e| data_err(format!("cannot open data file {}: {e}", path.display())))?;
    read_dataset(std::io::BufReader::new(f), days_per_time_unit)
}

/// Days printed without spurious rounding noise from the time conversion.
fn tidy_day(d: f64) -> f64 {
    let r = (d * 1e6).round() / 1e6;
    if (d - r).abs() < 1e-9 * d.abs().max(1.0) {
        r
    } else {
        d
    }
}

pub fn write_dataset<W: Write>(writer: W, dataset: &Dataset, days_per_time_unit: f64) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for s in dataset.subjects() {
        for (t, y) in s.times.iter().zip(&s.y) {
            let day = tidy_day(t * days_per_time_unit);
            w.write_record([s.id.clone(), day.to_string(), y.exp().to_string()]).map_err(io)?;
        }
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn write_dataset_csv(path: &Path, dataset: &Dataset, days_per_time_unit: f64) -> CliResult<()> {
    let f = std::fs::File::create(path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    write_dataset(std::io::BufWriter::new(f), dataset, days_per_time_unit)
}
