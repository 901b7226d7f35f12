//! Domain types shared across the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// The model: k learnable memories, optionally weighted.
///
/// Each row of `memories` is one memory ρ_μ in data units. Weights ε_μ scale
/// the relative attraction of each memory; `None` means all ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeSet {
    memories: Matrix,
    weights: Option<Vec<f64>>,
}

impl PrototypeSet {
    /// Unweighted set. Validates k ≥ 1, d ≥ 1 and finiteness.
    pub fn new(memories: Matrix) -> Result<Self> {
        Self::with_weights(memories, None)
    }

    /// Weighted set; every weight must be positive and finite.
    pub fn with_weights(memories: Matrix, weights: Option<Vec<f64>>) -> Result<Self> {
        if memories.rows() == 0 || memories.cols() == 0 {
            return Err(Error::InvalidConfig(
                "prototype set needs k >= 1 and d >= 1".into(),
            ));
        }
        if !memories.is_finite() {
            return Err(Error::NonFinite("prototype memories"));
        }
        if let Some(w) = &weights {
            if w.len() != memories.rows() {
                return Err(Error::DimensionMismatch {
                    expected: memories.rows(),
                    got: w.len(),
                    context: "prototype weights length",
                });
            }
            if w.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
                return Err(Error::InvalidConfig(
                    "prototype weights must be positive and finite".into(),
                ));
            }
        }
        Ok(Self { memories, weights })
    }

    pub fn k(&self) -> usize {
        self.memories.rows()
    }

    pub fn dim(&self) -> usize {
        self.memories.cols()
    }

    pub fn memories(&self) -> &Matrix {
        &self.memories
    }

    pub fn memory(&self, mu: usize) -> &[f64] {
        self.memories.row(mu)
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// log ε_μ per memory; zeros when unweighted.
    pub fn log_weights(&self) -> Vec<f64> {
        match &self.weights {
            Some(w) => w.iter().map(|x| x.ln()).collect(),
            None => vec![0.0; self.k()],
        }
    }

    /// Mutable access used by the trainer's optimizer step.
    pub(crate) fn memories_mut(&mut self) -> &mut Matrix {
        &mut self.memories
    }

    pub(crate) fn set_weights_from_log(&mut self, log_w: &[f64]) {
        self.weights = Some(log_w.iter().map(|x| x.exp()).collect());
    }
}

/// Distance convention for the energy and the recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Spherical,
}

/// Parameters of the attractor recursion.
///
/// `step_factor` is the dimensionless dt/τ ratio; the constructor defaults it
/// to 1/steps so that `steps` recursions cover one time constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub beta: f64,
    pub steps: usize,
    pub step_factor: f64,
    pub metric: Metric,
}

impl DynamicsConfig {
    pub fn new(beta: f64, steps: usize) -> Result<Self> {
        Self::with_step_factor(beta, steps, 1.0 / steps.max(1) as f64, Metric::Euclidean)
    }

    pub fn with_step_factor(
        beta: f64,
        steps: usize,
        step_factor: f64,
        metric: Metric,
    ) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidConfig(format!("beta must be > 0, got {beta}")));
        }
        if steps == 0 {
            return Err(Error::InvalidConfig("steps must be >= 1".into()));
        }
        if !(step_factor.is_finite() && step_factor > 0.0 && step_factor <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "step_factor must lie in (0, 1], got {step_factor}"
            )));
        }
        Ok(Self {
            beta,
            steps,
            step_factor,
            metric,
        })
    }

    pub fn metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }
}

/// A particle evolving under the recursion, with optional clamped coordinates.
///
/// `observed[i] == true` pins coordinate i to `clamp_values[i]` at every step;
/// free coordinates follow the dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    pub position: Vec<f64>,
    clamp: Option<Clamp>,
}

#[derive(Debug, Clone, PartialEq)]
struct Clamp {
    observed: Vec<bool>,
    values: Vec<f64>,
}

impl ParticleState {
    pub fn free(position: Vec<f64>) -> Self {
        Self {
            position,
            clamp: None,
        }
    }

    /// Clamped particle. The position must already agree with `values` on
    /// observed coordinates.
    pub fn clamped(position: Vec<f64>, observed: Vec<bool>, values: Vec<f64>) -> Result<Self> {
        let d = position.len();
        if observed.len() != d || values.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: observed.len().min(values.len()),
                context: "clamp mask/values length",
            });
        }
        for i in 0..d {
            if observed[i] && position[i] != values[i] {
                return Err(Error::InvalidConfig(format!(
                    "clamped coordinate {i} disagrees with its clamp value"
                )));
            }
        }
        Ok(Self {
            position,
            clamp: Some(Clamp { observed, values }),
        })
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    pub fn clamp_mask(&self) -> Option<&[bool]> {
        self.clamp.as_ref().map(|c| c.observed.as_slice())
    }

    pub fn clamp_values(&self) -> Option<&[f64]> {
        self.clamp.as_ref().map(|c| c.values.as_slice())
    }

    pub fn is_clamped(&self, i: usize) -> bool {
        self.clamp
            .as_ref()
            .map(|c| c.observed[i])
            .unwrap_or(false)
    }

    /// Restores clamp values by assignment (guards against float drift).
    pub(crate) fn reclamp(&mut self) {
        if let Some(c) = &self.clamp {
            for i in 0..self.position.len() {
                if c.observed[i] {
                    self.position[i] = c.values[i];
                }
            }
        }
    }
}

/// Per-feature summary statistics of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl FeatureStats {
    pub fn compute(points: &Matrix) -> Self {
        let (n, d) = (points.rows(), points.cols());
        let mut mean = vec![0.0; d];
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for row in points.iter_rows() {
            for j in 0..d {
                mean[j] += row[j];
                min[j] = min[j].min(row[j]);
                max[j] = max[j].max(row[j]);
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut var = vec![0.0; d];
        for row in points.iter_rows() {
            for j in 0..d {
                let c = row[j] - mean[j];
                var[j] += c * c;
            }
        }
        let std = var.iter().map(|v| (v / n as f64).sqrt()).collect();
        Self {
            mean,
            std,
            min,
            max,
        }
    }
}

/// Record of an applied standardization, kept so results can be mapped back
/// to raw units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// An n×d point set with optional ground-truth labels (evaluation only).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Matrix,
    pub labels: Option<Vec<usize>>,
    pub feature_stats: FeatureStats,
    /// Set when `standardize` produced this dataset.
    pub standardization: Option<Standardization>,
}

impl Dataset {
    pub fn new(points: Matrix, labels: Option<Vec<usize>>) -> Result<Self> {
        if points.rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if !points.is_finite() {
            return Err(Error::NonFinite("dataset points"));
        }
        if let Some(l) = &labels {
            if l.len() != points.rows() {
                return Err(Error::LabelLengthMismatch(l.len(), points.rows()));
            }
        }
        let feature_stats = FeatureStats::compute(&points);
        Ok(Self {
            points,
            labels,
            feature_stats,
            standardization: None,
        })
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.points.row(i)
    }
}
