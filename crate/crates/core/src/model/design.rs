//! Observation designs and datasets.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Sampling times, initial volumes and the sacrifice rule for a group of
/// subjects. Time zero is the initial state; `times[i][0]` is normally 0.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationDesign {
    times: Vec<Vec<f64>>,
    v0: Vec<f64>,
    sacrifice_threshold: Option<f64>,
}

impl ObservationDesign {
    pub fn new(times: Vec<Vec<f64>>, v0: Vec<f64>, sacrifice_threshold: Option<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidDesign("no subjects".into()));
        }
        if times.len() != v0.len() {
            return Err(Error::InvalidDesign(format!(
                "{} time sequences but {} initial volumes",
                times.len(),
                v0.len()
            )));
        }
        for (i, t) in times.iter().enumerate() {
            check_times(t).map_err(|m| Error::InvalidDesign(format!("subject {i}: {m}")))?;
        }
        if let Some((i, v)) = v0.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidDesign(format!("subject {i}: initial volume must be positive, got {v}")));
        }
        if let Some(th) = sacrifice_threshold {
            if !(th > 0.0) {
                return Err(Error::InvalidDesign(format!("sacrifice threshold must be positive, got {th}")));
            }
        }
        Ok(Self { times, v0, sacrifice_threshold })
    }

    /// Same schedule for every subject.
    pub fn shared_times(times: Vec<f64>, v0: Vec<f64>, threshold: Option<f64>) -> Result<Self> {
        let n = v0.len();
        Self::new(vec![times; n], v0, threshold)
    }

    pub fn subject_count(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self, subject: usize) -> &[f64] {
        &self.times[subject]
    }

    pub fn all_times(&self) -> &[Vec<f64>] {
        &self.times
    }

    pub fn v0(&self, subject: usize) -> f64 {
        self.v0[subject]
    }

    pub fn all_v0(&self) -> &[f64] {
        &self.v0
    }

    pub fn sacrifice_threshold(&self) -> Option<f64> {
        self.sacrifice_threshold
    }

    pub fn without_sacrifice(&self) -> Self {
        Self { sacrifice_threshold: None, ..self.clone() }
    }
}

fn check_times(t: &[f64]) -> std::result::Result<(), String> {
    if t.len() < 2 {
        return Err(format!("needs at least 2 sampling times, got {}", t.len()));
    }
    if !(t[0] >= 0.0) {
        return Err(format!("first time must be >= 0, got {}", t[0]));
    }
    if t.iter().any(|x| !x.is_finite()) {
        return Err("non-finite time".into());
    }
    if let Some(w) = t.windows(2).find(|w| w[1] <= w[0]) {
        return Err(format!("times must be strictly increasing ({} then {})", w[0], w[1]));
    }
    Ok(())
}

/// Log-volume measurements of one subject.
#[derive(Clone, Debug, PartialEq)]
pub struct SubjectData {
    pub id: String,
    pub times: Vec<f64>,
    pub y: Vec<f64>,
}

impl SubjectData {
    pub fn new(id: impl Into<String>, times: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if times.len() != y.len() {
            return Err(Error::InvalidData(format!(
                "subject {id}: {} times but {} measurements",
                times.len(),
                y.len()
            )));
        }
        check_times(&times).map_err(|m| Error::InvalidData(format!("subject {id}: {m}")))?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("subject {id}: non-finite measurement")));
        }
        Ok(Self { id, times, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Measurements for a group of subjects together with the design that
/// produced them. `subjects[i]` pairs with `design` subject `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    subjects: Vec<SubjectData>,
    design: ObservationDesign,
}

impl Dataset {
    pub fn new(subjects: Vec<SubjectData>, design: ObservationDesign) -> Result<Self> {
        if subjects.len() != design.subject_count() {
            return Err(Error::InvalidData(format!(
                "{} subjects but the design has {}",
                subjects.len(),
                design.subject_count()
            )));
        }
        let mut seen = HashSet::new();
        for s in &subjects {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::InvalidData(format!("duplicate subject id `{}`", s.id)));
            }
        }
        Ok(Self { subjects, design })
    }

    /// Dataset whose design is the observed layout itself: each subject
    /// observed at its own (already censored) times with no sacrifice rule.
    pub fn from_observations(subjects: Vec<SubjectData>, v0: Vec<f64>) -> Result<Self> {
        let times = subjects.iter().map(|s| s.times.clone()).collect();
        let design = ObservationDesign::new(times, v0, None)?;
        Self::new(subjects, design)
    }

    pub fn subjects(&self) -> &[SubjectData] {
        &self.subjects
    }

    pub fn subject(&self, i: usize) -> &SubjectData {
        &self.subjects[i]
    }

    pub fn design(&self) -> &ObservationDesign {
        &self.design
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    /// The layout actually observed: per-subject times as recorded, the
    /// design's initial volumes, no sacrifice rule.
    pub fn observed_design(&self) -> ObservationDesign {
        ObservationDesign {
            times: self.subjects.iter().map(|s| s.times.clone()).collect(),
            v0: self.design.v0.clone(),
            sacrifice_threshold: None,
        }
    }
}
