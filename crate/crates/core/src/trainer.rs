//! Training loop: seeding, epoch/batch iteration, mask sampling, Adam with a
//! reduce-on-plateau schedule, and independent restarts.
//!
//! Each restart draws its own prototype initialization and RNG stream from
//! the base seed, runs the full epoch budget, and reports its loss curve; the
//! restart with the least final training loss wins. A restart that produces a
//! non-finite loss is marked diverged and dropped from the competition while
//! the others continue.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autograd::{batch_loss_and_grad, MaskSample};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Dataset, DynamicsConfig, FeatureStats, PrototypeSet};

/// Value used to fill masked-out coordinates of x⁰.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FillMode {
    #[default]
    Mean,
    Min,
    Max,
    Zero,
}

/// How masks are drawn: each coordinate is masked OUT independently with
/// `probability`; a draw that masks nothing is retried, so the loss always
/// covers at least one coordinate. With probability 0 this degenerates to a
/// single uniformly random masked coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub probability: f64,
    pub fill_mode: FillMode,
}

impl Default for MaskSpec {
    fn default() -> Self {
        Self {
            probability: 0.15,
            fill_mode: FillMode::Mean,
        }
    }
}

impl MaskSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.probability >= 0.0 && self.probability < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "mask probability must lie in [0, 1), got {}",
                self.probability
            )));
        }
        Ok(())
    }

    pub fn fill_values(&self, stats: &FeatureStats) -> Vec<f64> {
        match self.fill_mode {
            FillMode::Mean => stats.mean.clone(),
            FillMode::Min => stats.min.clone(),
            FillMode::Max => stats.max.clone(),
            FillMode::Zero => vec![0.0; stats.mean.len()],
        }
    }
}

/// Draws one mask for a d-dimensional point.
pub fn sample_mask<R: Rng>(spec: &MaskSpec, stats: &FeatureStats, rng: &mut R) -> MaskSample {
    let d = stats.mean.len();
    let fill = spec.fill_values(stats);
    let mut observed = vec![true; d];
    if spec.probability > 0.0 {
        for _ in 0..100 {
            for o in observed.iter_mut() {
                *o = !rng.gen_bool(spec.probability);
            }
            if observed.iter().any(|o| !o) {
                return MaskSample { observed, fill };
            }
        }
        observed.iter_mut().for_each(|o| *o = true);
    }
    // probability 0 (or a pathological retry streak): mask one coordinate.
    observed[rng.gen_range(0..d)] = false;
    MaskSample { observed, fill }
}

/// Which reconstruction loss the trainer optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LossVariant {
    /// Masked self-supervised pattern completion.
    #[default]
    Masked,
    /// Plain reconstruction from x⁰ = x, no mask, no clamp.
    Unmasked,
}

/// Training hyperparameters. Defaults: LR reduced by 0.8 after 5 epochs
/// without an improvement above 1e-3, floored at 1e-5; 200 epochs; 10
/// restarts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub restarts: usize,
    pub initial_lr: f64,
    pub lr_reduce_factor: f64,
    pub lr_patience_epochs: usize,
    pub min_lr: f64,
    pub lr_loss_threshold: f64,
    pub variant: LossVariant,
    pub train_weights: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 8,
            max_epochs: 200,
            restarts: 10,
            initial_lr: 0.1,
            lr_reduce_factor: 0.8,
            lr_patience_epochs: 5,
            min_lr: 1e-5,
            lr_loss_threshold: 1e-3,
            variant: LossVariant::Masked,
            train_weights: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be >= 1");
        }
        if self.restarts == 0 {
            return bad("restarts must be >= 1");
        }
        if !(self.initial_lr > 0.0) {
            return bad("initial_lr must be > 0");
        }
        if !(self.lr_reduce_factor > 0.0 && self.lr_reduce_factor < 1.0) {
            return bad("lr_reduce_factor must lie in (0, 1)");
        }
        if self.lr_patience_epochs == 0 {
            return bad("lr_patience_epochs must be >= 1");
        }
        if !(self.min_lr > 0.0) {
            return bad("min_lr must be > 0");
        }
        if !(self.lr_loss_threshold > 0.0) {
            return bad("lr_loss_threshold must be > 0");
        }
        Ok(())
    }
}

/// One epoch's training-log record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub lr: f64,
}

/// Loss curve of a single restart.
#[derive(Debug, Clone)]
pub struct RestartCurve {
    pub records: Vec<EpochRecord>,
    pub final_loss: f64,
    pub diverged: bool,
}

/// Training outcome: the selected model plus every restart's curve.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub best_protos: PrototypeSet,
    pub chosen_restart: usize,
    pub final_loss: f64,
    pub restarts: Vec<RestartCurve>,
}

/// Memories sampled coordinate-wise uniform between each feature's min and
/// max. Deterministic given the seed.
pub fn init_prototypes(data: &Dataset, k: usize, seed: u64) -> Result<PrototypeSet> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be >= 1".into()));
    }
    if k > data.len() {
        log::warn!("initializing {k} prototypes from only {} points", data.len());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = data.dim();
    let stats = &data.feature_stats;
    let mut mem = Matrix::zeros(k, d);
    for mu in 0..k {
        let row = mem.row_mut(mu);
        for j in 0..d {
            let (lo, hi) = (stats.min[j], stats.max[j]);
            row[j] = if lo == hi { lo } else { rng.gen_range(lo..hi) };
        }
    }
    PrototypeSet::new(mem)
}

/// First/second-moment state for Adam.
#[derive(Debug, Clone)]
pub struct AdamMoments {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamMoments {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Standard Adam update with bias correction, applied in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamMoments, lr: f64) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(params.len(), state.m.len());
    state.t += 1;
    let bc1 = 1.0 - ADAM_BETA1.powi(state.t as i32);
    let bc2 = 1.0 - ADAM_BETA2.powi(state.t as i32);
    for i in 0..params.len() {
        state.m[i] = ADAM_BETA1 * state.m[i] + (1.0 - ADAM_BETA1) * grads[i];
        state.v[i] = ADAM_BETA2 * state.v[i] + (1.0 - ADAM_BETA2) * grads[i] * grads[i];
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
}

fn restart_seed(base: u64, restart: usize) -> u64 {
    // SplitMix64 finalizer over (base, restart): restarts never share streams.
    let mut z = base.wrapping_add(0x9E3779B97F4A7C15_u64.wrapping_mul(restart as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Runs a single optimization from the given starting prototypes (no
/// restarts); the RNG stream is derived from `cfg.seed` alone.
pub fn train_warm(
    data: &Dataset,
    init: &PrototypeSet,
    dyn_cfg: &DynamicsConfig,
    mask: &MaskSpec,
    cfg: &TrainConfig,
) -> Result<(PrototypeSet, RestartCurve)> {
    cfg.validate()?;
    mask.validate()?;
    optimize(data, init.clone(), dyn_cfg, mask, cfg, restart_seed(cfg.seed, 0))
}

fn run_restart(
    data: &Dataset,
    k: usize,
    dyn_cfg: &DynamicsConfig,
    mask: &MaskSpec,
    cfg: &TrainConfig,
    restart: usize,
) -> Result<(PrototypeSet, RestartCurve)> {
    let seed = restart_seed(cfg.seed, restart);
    let protos = init_prototypes(data, k, seed)?;
    optimize(data, protos, dyn_cfg, mask, cfg, seed)
}

fn optimize(
    data: &Dataset,
    mut protos: PrototypeSet,
    dyn_cfg: &DynamicsConfig,
    mask: &MaskSpec,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(PrototypeSet, RestartCurve)> {
    let k = protos.k();
    let mut log_weights = protos.log_weights();
    if cfg.train_weights {
        protos.set_weights_from_log(&log_weights);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5_A5A5_5A5A_5A5A);
    let n = data.len();
    let d = data.dim();
    let mut mem_moments = AdamMoments::new(k * d);
    let mut weight_moments = AdamMoments::new(k);
    let mut lr = cfg.initial_lr;
    let mut best_loss = f64::INFINITY;
    let mut wait = 0usize;
    let mut records = Vec::with_capacity(cfg.max_epochs);
    let mut indices: Vec<usize> = (0..n).collect();

    for epoch in 0..cfg.max_epochs {
        indices.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in indices.chunks(cfg.batch_size) {
            let points: Vec<&[f64]> = chunk.iter().map(|&i| data.point(i)).collect();
            let masks: Option<Vec<MaskSample>> = match cfg.variant {
                LossVariant::Masked => Some(
                    chunk
                        .iter()
                        .map(|_| sample_mask(mask, &data.feature_stats, &mut rng))
                        .collect(),
                ),
                LossVariant::Unmasked => None,
            };
            let grad = batch_loss_and_grad(
                &points,
                masks.as_deref(),
                &protos,
                dyn_cfg,
                cfg.train_weights,
            )?;
            epoch_loss += grad.loss;
            adam_step(
                protos.memories_mut().as_mut_slice(),
                grad.d_memories.as_slice(),
                &mut mem_moments,
                lr,
            );
            if cfg.train_weights {
                let dw = grad
                    .d_log_weights
                    .as_ref()
                    .expect("weight gradients requested");
                adam_step(&mut log_weights, dw, &mut weight_moments, lr);
                protos.set_weights_from_log(&log_weights);
            }
        }
        let epoch_loss = epoch_loss / n as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::NonFinite("epoch loss"));
        }
        records.push(EpochRecord {
            epoch,
            loss: epoch_loss,
            lr,
        });
        if epoch_loss < best_loss - cfg.lr_loss_threshold {
            best_loss = epoch_loss;
            wait = 0;
        } else {
            wait += 1;
            if wait >= cfg.lr_patience_epochs {
                lr = (lr * cfg.lr_reduce_factor).max(cfg.min_lr);
                wait = 0;
            }
        }
    }

    let final_loss = records.last().map(|r| r.loss).unwrap_or(f64::INFINITY);
    Ok((
        protos,
        RestartCurve {
            records,
            final_loss,
            diverged: false,
        },
    ))
}

/// Learns k prototypes for `data`: for each restart, shuffle, iterate
/// epochs/batches, take Adam steps on the batch gradient, and anneal the
/// learning rate on plateaus; the restart with the least final loss is
/// selected.
pub fn train(
    data: &Dataset,
    k: usize,
    dyn_cfg: &DynamicsConfig,
    mask: &MaskSpec,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    mask.validate()?;
    if k == 0 {
        return Err(Error::InvalidConfig("k must be >= 1".into()));
    }

    let outcomes: Vec<(Option<PrototypeSet>, RestartCurve)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| match run_restart(data, k, dyn_cfg, mask, cfg, r) {
            Ok((protos, curve)) => (Some(protos), curve),
            Err(e) => {
                log::warn!("restart {r} aborted: {e}");
                (
                    None,
                    RestartCurve {
                        records: Vec::new(),
                        final_loss: f64::INFINITY,
                        diverged: true,
                    },
                )
            }
        })
        .collect();

    let mut chosen: Option<(usize, f64)> = None;
    for (i, (protos, curve)) in outcomes.iter().enumerate() {
        if protos.is_some() && chosen.map(|(_, best)| curve.final_loss < best).unwrap_or(true) {
            chosen = Some((i, curve.final_loss));
        }
    }
    let (chosen_restart, final_loss) = chosen.ok_or(Error::AllRestartsFailed)?;

    let mut restarts = Vec::with_capacity(outcomes.len());
    let mut best_protos = None;
    for (i, (protos, curve)) in outcomes.into_iter().enumerate() {
        if i == chosen_restart {
            best_protos = protos;
        }
        restarts.push(curve);
    }

    Ok(TrainReport {
        best_protos: best_protos.expect("chosen restart produced prototypes"),
        chosen_restart,
        final_loss,
        restarts,
    })
}
