//! Cluster assignment: run the unclamped recursion from each point and label
//! it by the nearest memory to its settled state.

use rayon::prelude::*;

use crate::dynamics::run_recursion;
use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix};
use crate::model::{Dataset, DynamicsConfig, ParticleState, PrototypeSet};

/// Labels plus the settled positions and residual distances behind them.
#[derive(Debug, Clone)]
pub struct Assignment {
    pub labels: Vec<usize>,
    pub converged_positions: Matrix,
    /// ‖x^T - ρ_assigned‖ per point.
    pub residuals: Vec<f64>,
}

/// Index and squared distance of the memory nearest to `v`; ties break to
/// the lowest index.
pub fn nearest_memory(v: &[f64], protos: &PrototypeSet) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for mu in 0..protos.k() {
        let d = sq_dist(v, protos.memory(mu));
        if d < best.1 {
            best = (mu, d);
        }
    }
    best
}

/// Assigns every point of `data`: x⁰ = x, T unclamped recursion steps, then
/// argmin distance over memories. Deterministic.
pub fn infer(data: &Dataset, protos: &PrototypeSet, cfg: &DynamicsConfig) -> Result<Assignment> {
    if data.dim() != protos.dim() {
        return Err(Error::DimensionMismatch {
            expected: protos.dim(),
            got: data.dim(),
            context: "inference data dimension",
        });
    }
    let results: Vec<(usize, Vec<f64>, f64)> = (0..data.len())
        .into_par_iter()
        .with_min_len(32)
        .map(|i| {
            let finl = run_recursion(&ParticleState::free(data.point(i).to_vec()), protos, cfg)?;
            let (label, d2) = nearest_memory(&finl.position, protos);
            Ok((label, finl.position, d2.sqrt()))
        })
        .collect::<Result<_>>()?;

    let mut labels = Vec::with_capacity(results.len());
    let mut converged = Matrix::zeros(data.len(), data.dim());
    let mut residuals = Vec::with_capacity(results.len());
    for (i, (label, pos, res)) in results.into_iter().enumerate() {
        labels.push(label);
        converged.row_mut(i).copy_from_slice(&pos);
        residuals.push(res);
    }
    Ok(Assignment {
        labels,
        converged_positions: converged,
        residuals,
    })
}
