//! Reverse-mode differentiation of the reconstruction loss through the
//! T-step recursion, with respect to the memories and (optionally) their
//! log-weights.
//!
//! The forward pass records the full trajectory and per-step attractions
//! (`dynamics::Trajectory` is the tape); the backward pass walks the steps in
//! reverse, propagating the adjoint through each softmax and affine update.
//! Gradients flow only to the memories and log-weights — data points are
//! constants. Everything accumulates in f64.

use crate::dynamics::{run_recursion_trajectory, Trajectory};
use crate::error::{Error, Result};
use crate::matrix::{dot, norm, sq_dist, Matrix};
use crate::model::{DynamicsConfig, Metric, ParticleState, PrototypeSet};

/// One drawn mask: `observed[i]` keeps coordinate i clamped to the input,
/// masked-out coordinates start at `fill[i]` and carry the loss.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSample {
    pub observed: Vec<bool>,
    pub fill: Vec<f64>,
}

impl MaskSample {
    pub fn masked_out_count(&self) -> usize {
        self.observed.iter().filter(|o| !**o).count()
    }
}

/// Loss value plus gradients, shaped like the prototype set.
#[derive(Debug, Clone)]
pub struct LossGradient {
    pub d_memories: Matrix,
    pub d_log_weights: Option<Vec<f64>>,
    pub loss: f64,
}

impl LossGradient {
    fn zeros(k: usize, d: usize, train_weights: bool) -> Self {
        Self {
            d_memories: Matrix::zeros(k, d),
            d_log_weights: train_weights.then(|| vec![0.0; k]),
            loss: 0.0,
        }
    }

    fn add_assign(&mut self, other: &LossGradient) {
        self.loss += other.loss;
        for (a, b) in self
            .d_memories
            .as_mut_slice()
            .iter_mut()
            .zip(other.d_memories.as_slice())
        {
            *a += b;
        }
        if let (Some(a), Some(b)) = (&mut self.d_log_weights, &other.d_log_weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.loss.is_finite()
            && self.d_memories.is_finite()
            && self
                .d_log_weights
                .as_ref()
                .map(|w| w.iter().all(|v| v.is_finite()))
                .unwrap_or(true)
    }
}

fn initial_state(x: &[f64], mask: Option<&MaskSample>) -> Result<ParticleState> {
    match mask {
        None => Ok(ParticleState::free(x.to_vec())),
        Some(m) => {
            let d = x.len();
            if m.observed.len() != d || m.fill.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: m.observed.len().min(m.fill.len()),
                    context: "mask sample length",
                });
            }
            let mut pos = Vec::with_capacity(d);
            let mut values = Vec::with_capacity(d);
            for i in 0..d {
                pos.push(if m.observed[i] { x[i] } else { m.fill[i] });
                values.push(if m.observed[i] { x[i] } else { 0.0 });
            }
            ParticleState::clamped(pos, m.observed.clone(), values)
        }
    }
}

/// Forward + backward for one example.
///
/// Masked: x⁰ keeps observed coordinates and fills the rest; the loss is the
/// squared residual on masked-out coordinates only. Unmasked: x⁰ = x and the
/// loss covers every coordinate.
pub fn loss_and_grad(
    x: &[f64],
    mask: Option<&MaskSample>,
    protos: &PrototypeSet,
    cfg: &DynamicsConfig,
    train_weights: bool,
) -> Result<LossGradient> {
    if x.len() != protos.dim() {
        return Err(Error::DimensionMismatch {
            expected: protos.dim(),
            got: x.len(),
            context: "loss input point",
        });
    }
    let state0 = initial_state(x, mask)?;
    let tape = run_recursion_trajectory(&state0, protos, cfg)?;
    let free: Vec<bool> = match mask {
        Some(m) => m.observed.iter().map(|o| !o).collect(),
        None => vec![true; x.len()],
    };
    let grad = backward(x, &free, &tape, protos, cfg, train_weights)?;
    if !grad.is_finite() {
        return Err(Error::NonFinite("loss gradient"));
    }
    Ok(grad)
}

fn backward(
    x: &[f64],
    free: &[bool],
    tape: &Trajectory,
    protos: &PrototypeSet,
    cfg: &DynamicsConfig,
    train_weights: bool,
) -> Result<LossGradient> {
    let d = x.len();
    let k = protos.k();
    let sf = cfg.step_factor;
    let beta = cfg.beta;
    let x_final = tape.final_position();

    let mut loss = 0.0;
    // Adjoint of the current state, seeded by the residual on free coords.
    let mut g = vec![0.0; d];
    for i in 0..d {
        if free[i] {
            let r = x_final[i] - x[i];
            loss += r * r;
            g[i] = 2.0 * r;
        }
    }

    let mut out = LossGradient::zeros(k, d, train_weights);
    out.loss = loss;

    let mut gh = vec![0.0; d];
    match cfg.metric {
        Metric::Euclidean => {
            for t in (0..cfg.steps).rev() {
                let v = &tape.positions[t];
                let sig = &tape.attractions[t];
                for i in 0..d {
                    gh[i] = if free[i] { sf * g[i] } else { 0.0 };
                }
                // Softmax adjoint over the attraction logits.
                let mut s = 0.0;
                let mut a = vec![0.0; k];
                for mu in 0..k {
                    let rho = protos.memory(mu);
                    let mut am = 0.0;
                    for i in 0..d {
                        am += (rho[i] - v[i]) * gh[i];
                    }
                    a[mu] = am;
                    s += sig[mu] * am;
                }
                for mu in 0..k {
                    let dl = sig[mu] * (a[mu] - s);
                    let rho = protos.memory(mu);
                    let drow = out.d_memories.row_mut(mu);
                    for i in 0..d {
                        let diff = rho[i] - v[i];
                        drow[i] += sig[mu] * gh[i] - 2.0 * beta * dl * diff;
                        g[i] += 2.0 * beta * dl * diff;
                    }
                    if let Some(dw) = &mut out.d_log_weights {
                        dw[mu] += dl;
                    }
                }
                for i in 0..d {
                    g[i] -= gh[i];
                }
            }
        }
        Metric::Spherical => {
            // Normalized memories and their norms, reused across steps.
            let norms: Vec<f64> = (0..k).map(|mu| norm(protos.memory(mu))).collect();
            for t in (0..cfg.steps).rev() {
                let v = &tape.positions[t];
                let v_next = &tape.positions[t + 1];
                let sig = &tape.attractions[t];
                let q = tape.prenorms[t];
                // Through the renormalization w ↦ w/‖w‖.
                let gdot = dot(&g, v_next);
                let mut gw = vec![0.0; d];
                for i in 0..d {
                    gw[i] = (g[i] - gdot * v_next[i]) / q;
                }
                for i in 0..d {
                    gh[i] = if free[i] { sf * gw[i] } else { 0.0 };
                }
                let mut s = 0.0;
                let mut a = vec![0.0; k];
                for mu in 0..k {
                    let rho = protos.memory(mu);
                    let mut am = 0.0;
                    for i in 0..d {
                        am += rho[i] / norms[mu] * gh[i];
                    }
                    a[mu] = am;
                    s += sig[mu] * am;
                }
                g.copy_from_slice(&gw);
                for mu in 0..k {
                    let dl = sig[mu] * (a[mu] - s);
                    let rho = protos.memory(mu);
                    // Adjoint of the unit memory, then through ρ̃ = ρ/‖ρ‖.
                    let mut dtilde = vec![0.0; d];
                    for i in 0..d {
                        dtilde[i] = sig[mu] * gh[i] + beta * dl * v[i];
                        g[i] += beta * dl * rho[i] / norms[mu];
                    }
                    let proj = (0..d).map(|i| dtilde[i] * rho[i] / norms[mu]).sum::<f64>();
                    let drow = out.d_memories.row_mut(mu);
                    for i in 0..d {
                        drow[i] += (dtilde[i] - proj * rho[i] / norms[mu]) / norms[mu];
                    }
                    if let Some(dw) = &mut out.d_log_weights {
                        dw[mu] += dl;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Sum of per-example losses and gradients over a batch.
///
/// `masks`, when given, must pair one sample per point. The reduction is a
/// fixed-order sequential sum, so results are bit-identical run to run.
pub fn batch_loss_and_grad(
    points: &[&[f64]],
    masks: Option<&[MaskSample]>,
    protos: &PrototypeSet,
    cfg: &DynamicsConfig,
    train_weights: bool,
) -> Result<LossGradient> {
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(m) = masks {
        if m.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: m.len(),
                context: "masks per batch point",
            });
        }
    }
    let mut total = LossGradient::zeros(protos.k(), protos.dim(), train_weights);
    for (idx, x) in points.iter().enumerate() {
        let g = loss_and_grad(x, masks.map(|m| &m[idx]), protos, cfg, train_weights)?;
        total.add_assign(&g);
    }
    Ok(total)
}

/// Convenience: the unmasked reconstruction loss of one point, no gradient.
pub fn reconstruction_loss(x: &[f64], protos: &PrototypeSet, cfg: &DynamicsConfig) -> Result<f64> {
    let state = crate::dynamics::run_recursion(&ParticleState::free(x.to_vec()), protos, cfg)?;
    Ok(sq_dist(&state.position, x))
}
