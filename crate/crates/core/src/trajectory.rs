//! Evaluation log shared by every optimizer, and the objective interface the
//! optimizers drive.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Anneal,
    Local,
    RestartAnneal,
    Nes,
}

/// One objective evaluation, i.e. one batch of shots on the emulated device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub eval: usize,
    pub phase: Phase,
    pub x: Vec<f64>,
    pub value: f64,
    pub shots: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
}

/// Metadata an optimizer attaches to an evaluation request.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalTag {
    pub phase: Phase,
    /// Overrides the objective's default shot count.
    pub shots: Option<usize>,
    pub temperature: Option<f64>,
    pub generation: Option<usize>,
    pub member: Option<usize>,
    pub z: Option<Vec<f64>>,
}

impl EvalTag {
    pub fn new(phase: Phase) -> Self {
        Self {
            phase,
            shots: None,
            temperature: None,
            generation: None,
            member: None,
            z: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
}

impl Trajectory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends a record, assigning the next 1-based evaluation index.
    pub fn push(&mut self, tag: &EvalTag, x: &[f64], value: f64, shots: usize) -> usize {
        let eval = self.records.len() + 1;
        self.records.push(TrajectoryRecord {
            eval,
            phase: tag.phase,
            x: x.to_vec(),
            value,
            shots,
            temperature: tag.temperature,
            generation: tag.generation,
            member: tag.member,
            z: tag.z.clone(),
        });
        eval
    }

    pub fn last(&self) -> Option<&TrajectoryRecord> {
        self.records.last()
    }

    /// Values of coordinate `dim` across all records.
    pub fn coordinate(&self, dim: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.x[dim]).collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<std::result::Result<Vec<TrajectoryRecord>, _>>()?;
        Ok(Self { records })
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        file.write_all(self.to_jsonl().as_bytes())?;
        file.flush()?;
        Ok(())
    }

    pub fn read_jsonl(path: &Path) -> Result<Self> {
        Self::from_jsonl(&std::fs::read_to_string(path)?)
    }
}

/// A black-box objective to be maximized, whose every call is logged.
pub trait Objective {
    /// Evaluates at `x`, records one trajectory entry and returns the
    /// (possibly noisy) value.
    fn evaluate(&mut self, x: &[f64], tag: &EvalTag) -> f64;

    fn trajectory(&self) -> &Trajectory;

    fn evaluations(&self) -> usize {
        self.trajectory().len()
    }

    /// Noise-free value at `x`, when the objective knows it.
    fn exact(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

/// Wraps a closure as a logged objective; used for synthetic test problems.
pub struct FnObjective<F> {
    f: F,
    trajectory: Trajectory,
}

impl<F> FnObjective<F>
where
    F: FnMut(&[f64]) -> f64,
{
    pub fn new(f: F) -> Self {
        Self {
            f,
            trajectory: Trajectory::new(),
        }
    }
}

impl<F> Objective for FnObjective<F>
where
    F: FnMut(&[f64]) -> f64,
{
    fn evaluate(&mut self, x: &[f64], tag: &EvalTag) -> f64 {
        let value = (self.f)(x);
        self.trajectory.push(tag, x, value, tag.shots.unwrap_or(1));
        value
    }

    fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }
}

/// Outcome of an optimizer run. Values follow the maximization convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    /// Point with the highest observed value.
    pub best_x: Vec<f64>,
    pub best_value: f64,
    /// Where the run ended: the last accepted point (annealing) or the final
    /// search mean (NES).
    pub final_x: Vec<f64>,
    /// Noise-free objective at `best_x`, when available.
    pub exact_at_best: Option<f64>,
    /// Noise-free objective at `final_x`, when available.
    pub exact_at_final: Option<f64>,
    pub evaluations: usize,
}

/// Wraps `x` into `[lo, hi)` periodically.
pub fn wrap(x: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    let r = (x - lo).rem_euclid(width);
    // rem_euclid can round up to exactly `width`
    if r >= width {
        lo
    } else {
        lo + r
    }
}

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds(pub Vec<[f64; 2]>);

impl Bounds {
    /// `[0, pi]` in every one of `dim` coordinates.
    pub fn angle_box(dim: usize) -> Self {
        Self(vec![[0.0, std::f64::consts::PI]; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(crate::error::invalid("bounds must have at least one dimension"));
        }
        for (k, &[lo, hi]) in self.0.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(crate::error::invalid(format!(
                    "bounds[{k}] = [{lo}, {hi}] must be finite with lo < hi"
                )));
            }
        }
        Ok(())
    }

    pub fn wrap_point(&self, x: &mut [f64]) {
        for (v, &[lo, hi]) in x.iter_mut().zip(&self.0) {
            *v = wrap(*v, lo, hi);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.0).all(|(&v, &[lo, hi])| lo <= v && v <= hi)
    }

    pub fn widths(&self) -> Vec<f64> {
        self.0.iter().map(|&[lo, hi]| hi - lo).collect()
    }

    pub fn sample_uniform(&self, rng: &mut impl rand::Rng) -> Vec<f64> {
        self.0
            .iter()
            .map(|&[lo, hi]| lo + (hi - lo) * rng.random::<f64>())
            .collect()
    }
}
