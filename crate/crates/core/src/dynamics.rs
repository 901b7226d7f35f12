//! Energy evaluation and the attractor recursion.
//!
//! The energy of a particle v against memories ρ_μ with weights ε_μ is
//!
//! ```text
//! E(v) = -(1/β) · log Σ_μ ε_μ · exp(-β‖ρ_μ - v‖²)            (euclidean)
//! E(v) = -(1/β) · log Σ_μ ε_μ · exp( β⟨ρ̃_μ, v⟩)              (spherical)
//! ```
//!
//! with ρ̃_μ the unit-normalized memory. One recursion step moves the particle
//! by `step_factor` times the softmax-weighted attraction; clamped coordinates
//! are held fixed. All softmax/log-sum-exp evaluations are max-shifted: the
//! raw logits scale with β·‖·‖² and overflow long before the weights matter.

use crate::error::{Error, Result};
use crate::matrix::{dot, norm, sq_dist};
use crate::model::{DynamicsConfig, Metric, ParticleState, PrototypeSet};

/// Max-shifted log-sum-exp.
pub fn log_sum_exp(logits: &[f64]) -> f64 {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
}

/// Max-shifted softmax, written into `out`.
pub fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, l) in out.iter_mut().zip(logits) {
        *o = (l - m).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

fn check_dims(v: &[f64], protos: &PrototypeSet, context: &'static str) -> Result<()> {
    if v.len() != protos.dim() {
        return Err(Error::DimensionMismatch {
            expected: protos.dim(),
            got: v.len(),
            context,
        });
    }
    Ok(())
}

/// Logits of the attraction softmax: -β‖ρ_μ - v‖² + log ε_μ (euclidean) or
/// β⟨ρ̃_μ, v⟩ + log ε_μ (spherical).
fn attraction_logits(v: &[f64], protos: &PrototypeSet, cfg: &DynamicsConfig) -> Vec<f64> {
    let k = protos.k();
    let log_w = protos.log_weights();
    let mut logits = Vec::with_capacity(k);
    match cfg.metric {
        Metric::Euclidean => {
            for mu in 0..k {
                logits.push(-cfg.beta * sq_dist(protos.memory(mu), v) + log_w[mu]);
            }
        }
        Metric::Spherical => {
            for mu in 0..k {
                let rho = protos.memory(mu);
                let n = norm(rho);
                logits.push(cfg.beta * dot(rho, v) / n + log_w[mu]);
            }
        }
    }
    logits
}

/// Energy E(v) of a particle against the memories. Finite for finite inputs.
pub fn energy(v: &[f64], protos: &PrototypeSet, cfg: &DynamicsConfig) -> Result<f64> {
    check_dims(v, protos, "energy input")?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("energy input"));
    }
    if cfg.metric == Metric::Spherical {
        let n = norm(v);
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NotUnitNorm(n));
        }
    }
    let logits = attraction_logits(v, protos, cfg);
    Ok(-log_sum_exp(&logits) / cfg.beta)
}

/// Softmax attraction of v to each memory; entries sum to one.
pub fn attractions(v: &[f64], protos: &PrototypeSet, cfg: &DynamicsConfig) -> Result<Vec<f64>> {
    check_dims(v, protos, "attractions input")?;
    let logits = attraction_logits(v, protos, cfg);
    let mut out = vec![0.0; protos.k()];
    softmax_into(&logits, &mut out);
    Ok(out)
}

/// Outcome of one recursion step: the new state, the attraction vector that
/// produced it, and (spherical only) the norm before renormalization.
pub(crate) struct StepRecord {
    pub state: ParticleState,
    pub attractions: Vec<f64>,
    pub prenorm: f64,
}

pub(crate) fn step_once(
    state: &ParticleState,
    protos: &PrototypeSet,
    cfg: &DynamicsConfig,
) -> Result<StepRecord> {
    let v = &state.position;
    check_dims(v, protos, "update_step input")?;
    let sig = attractions(v, protos, cfg)?;
    let d = v.len();
    let k = protos.k();
    let mut next = state.clone();
    let mut prenorm = 1.0;

    match cfg.metric {
        Metric::Euclidean => {
            for i in 0..d {
                if state.is_clamped(i) {
                    continue;
                }
                let mut u = 0.0;
                for mu in 0..k {
                    u += sig[mu] * (protos.memory(mu)[i] - v[i]);
                }
                next.position[i] = v[i] + cfg.step_factor * u;
            }
            // Restore clamp values by assignment, not merely zero displacement.
            next.reclamp();
        }
        Metric::Spherical => {
            for i in 0..d {
                if state.is_clamped(i) {
                    continue;
                }
                let mut u = 0.0;
                for mu in 0..k {
                    let rho = protos.memory(mu);
                    u += sig[mu] * rho[i] / norm(rho);
                }
                next.position[i] = v[i] + cfg.step_factor * u;
            }
            let n = norm(&next.position);
            if n < 1e-12 {
                return Err(Error::DegenerateNorm(n));
            }
            for x in &mut next.position {
                *x /= n;
            }
            prenorm = n;
            // No reclamp: renormalization rescales every coordinate, so a
            // spherical clamp only suppresses the displacement. Exact
            // value-pinning is a euclidean-metric property.
        }
    }
    Ok(StepRecord {
        state: next,
        attractions: sig,
        prenorm,
    })
}

/// One recursion step. Euclidean: clamped coordinates receive zero
/// displacement and are restored by assignment. Spherical: the displacement
/// is zeroed on clamped coordinates, then the whole state is renormalized to
/// unit norm.
pub fn update_step(
    state: &ParticleState,
    protos: &PrototypeSet,
    cfg: &DynamicsConfig,
) -> Result<ParticleState> {
    Ok(step_once(state, protos, cfg)?.state)
}

/// Applies `update_step` exactly `cfg.steps` times.
pub fn run_recursion(
    state0: &ParticleState,
    protos: &PrototypeSet,
    cfg: &DynamicsConfig,
) -> Result<ParticleState> {
    let mut state = state0.clone();
    for _ in 0..cfg.steps {
        state = update_step(&state, protos, cfg)?;
    }
    Ok(state)
}

/// Full record of a recursion: all T+1 positions and the T attraction
/// vectors, as needed for backpropagation through the recursion.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub positions: Vec<Vec<f64>>,
    pub attractions: Vec<Vec<f64>>,
    /// Pre-normalization norms per step (spherical metric only).
    pub prenorms: Vec<f64>,
}

impl Trajectory {
    pub fn final_position(&self) -> &[f64] {
        self.positions.last().expect("trajectory is never empty")
    }
}

/// Runs the recursion while recording every state and attraction vector.
pub fn run_recursion_trajectory(
    state0: &ParticleState,
    protos: &PrototypeSet,
    cfg: &DynamicsConfig,
) -> Result<Trajectory> {
    let mut positions = Vec::with_capacity(cfg.steps + 1);
    let mut atts = Vec::with_capacity(cfg.steps);
    let mut prenorms = Vec::with_capacity(cfg.steps);
    let mut state = state0.clone();
    positions.push(state.position.clone());
    for _ in 0..cfg.steps {
        let rec = step_once(&state, protos, cfg)?;
        atts.push(rec.attractions);
        prenorms.push(rec.prenorm);
        state = rec.state;
        positions.push(state.position.clone());
    }
    Ok(Trajectory {
        positions,
        attractions: atts,
        prenorms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn protos(rows: &[Vec<f64>]) -> PrototypeSet {
        PrototypeSet::new(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn energy_zero_at_single_memory() {
        let p = protos(&[vec![0.3, -0.7]]);
        let cfg = DynamicsConfig::new(2.0, 5).unwrap();
        let e = energy(&[0.3, -0.7], &p, &cfg).unwrap();
        assert!(e.abs() < 1e-15);
    }

    #[test]
    fn energy_single_memory_equals_squared_distance() {
        // k=1 collapses the log-sum-exp: E = ‖ρ - v‖² for any β.
        let p = protos(&[vec![1.0, 2.0, 3.0]]);
        for beta in [0.01, 1.0, 37.5] {
            let cfg = DynamicsConfig::new(beta, 5).unwrap();
            let e = energy(&[0.0, 2.0, 1.0], &p, &cfg).unwrap();
            assert!((e - 5.0).abs() < 1e-12, "beta={beta}: {e}");
        }
    }

    #[test]
    fn energy_two_memories_midpoint() {
        // β=1, ρ₁=(0,0), ρ₂=(2,0), v=(1,0): E = 1 - log 2.
        let p = protos(&[vec![0.0, 0.0], vec![2.0, 0.0]]);
        let cfg = DynamicsConfig::new(1.0, 5).unwrap();
        let e = energy(&[1.0, 0.0], &p, &cfg).unwrap();
        assert!((e - (1.0 - 2.0_f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn energy_rejects_non_finite_and_mismatch() {
        let p = protos(&[vec![0.0, 0.0]]);
        let cfg = DynamicsConfig::new(1.0, 5).unwrap();
        assert!(matches!(
            energy(&[f64::NAN, 0.0], &p, &cfg),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            energy(&[0.0], &p, &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn energy_survives_extreme_logits() {
        // Without max-shifting exp(βs) overflows here.
        let p = protos(&[vec![0.0; 4], vec![100.0; 4]]);
        let cfg = DynamicsConfig::new(50.0, 5).unwrap();
        let e = energy(&[100.0, 100.0, 100.0, 100.0], &p, &cfg).unwrap();
        assert!(e.is_finite());
        assert!(e.abs() < 1e-9);
    }

    #[test]
    fn attractions_symmetric_pair() {
        let p = protos(&[vec![-1.0, 0.0], vec![1.0, 0.0]]);
        let cfg = DynamicsConfig::new(3.0, 5).unwrap();
        let a = attractions(&[0.0, 5.0], &p, &cfg).unwrap();
        assert!((a[0] - 0.5).abs() < 1e-12);
        assert!((a[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn attractions_two_memories_offset() {
        // β=1, ρ₁=(0,0), ρ₂=(2,0), v=(0.5,0): logit gap 2.25-0.25 = 2.
        let p = protos(&[vec![0.0, 0.0], vec![2.0, 0.0]]);
        let cfg = DynamicsConfig::new(1.0, 5).unwrap();
        let a = attractions(&[0.5, 0.0], &p, &cfg).unwrap();
        let expect0 = 1.0 / (1.0 + (-2.0_f64).exp());
        assert!((a[0] - expect0).abs() < 1e-12);
        assert!((a[1] - (1.0 - expect0)).abs() < 1e-12);
        assert!((a[0] - 0.88080).abs() < 1e-5);
    }

    #[test]
    fn attractions_weight_ratio_under_equal_distances() {
        let m = Matrix::from_rows(&[vec![-1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let p = PrototypeSet::with_weights(m, Some(vec![2.0, 1.0])).unwrap();
        let cfg = DynamicsConfig::new(1.0, 5).unwrap();
        let a = attractions(&[0.0, 0.0], &p, &cfg).unwrap();
        assert!((a[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((a[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn update_single_memory_moves_by_step_factor() {
        let p = protos(&[vec![1.0, 1.0]]);
        let cfg = DynamicsConfig::with_step_factor(1.0, 10, 0.1, Metric::Euclidean).unwrap();
        let next = update_step(&ParticleState::free(vec![0.0, 0.0]), &p, &cfg).unwrap();
        assert!((next.position[0] - 0.1).abs() < 1e-15);
        assert!((next.position[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn update_midpoint_is_fixed_point() {
        let p = protos(&[vec![-3.0, 1.0], vec![5.0, 1.0]]);
        let cfg = DynamicsConfig::new(0.7, 4).unwrap();
        let state = ParticleState::free(vec![1.0, 1.0]);
        let next = update_step(&state, &p, &cfg).unwrap();
        assert!((next.position[0] - 1.0).abs() < 1e-12);
        assert!((next.position[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn update_composes_attractions_example() {
        // δ_x = 0.1·(0.88080·(-0.5) + 0.11920·1.5) = -0.026160.
        let p = protos(&[vec![0.0, 0.0], vec![2.0, 0.0]]);
        let cfg = DynamicsConfig::with_step_factor(1.0, 10, 0.1, Metric::Euclidean).unwrap();
        let next = update_step(&ParticleState::free(vec![0.5, 0.0]), &p, &cfg).unwrap();
        let delta_x = next.position[0] - 0.5;
        assert!((delta_x - (-0.026160)).abs() < 1e-5);
        assert_eq!(next.position[1], 0.0);
    }

    #[test]
    fn clamped_coordinates_never_move() {
        let p = protos(&[vec![5.0, 5.0, 5.0]]);
        let cfg = DynamicsConfig::new(1.0, 20).unwrap();
        let state =
            ParticleState::clamped(vec![1.0, 0.0, 2.0], vec![true, false, true], vec![1.0, 0.0, 2.0])
                .unwrap();
        let finl = run_recursion(&state, &p, &cfg).unwrap();
        assert_eq!(finl.position[0], 1.0);
        assert_eq!(finl.position[2], 2.0);
        assert!(finl.position[1] > 0.0);
    }

    #[test]
    fn recursion_single_memory_geometric_contraction() {
        // k=1, step_factor=1/T: v^T = ρ + (1-1/T)^T (v⁰-ρ).
        let p = protos(&[vec![2.0]]);
        for t_steps in [1usize, 4, 10] {
            let cfg = DynamicsConfig::new(1.0, t_steps).unwrap();
            let finl = run_recursion(&ParticleState::free(vec![0.0]), &p, &cfg).unwrap();
            let sf = 1.0 / t_steps as f64;
            let expect = 2.0 + (1.0 - sf).powi(t_steps as i32) * (0.0 - 2.0);
            assert!(
                (finl.position[0] - expect).abs() < 1e-12,
                "T={t_steps}: {} vs {expect}",
                finl.position[0]
            );
        }
    }

    #[test]
    fn vanishing_step_factor_freezes_particle() {
        let p = protos(&[vec![10.0, -4.0]]);
        let cfg = DynamicsConfig::with_step_factor(1.0, 50, 1e-15, Metric::Euclidean).unwrap();
        let finl = run_recursion(&ParticleState::free(vec![1.0, 1.0]), &p, &cfg).unwrap();
        assert!((finl.position[0] - 1.0).abs() < 1e-12);
        assert!((finl.position[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basin_convergence_large_beta() {
        // A particle inside a basin lands on its memory for large β, T=50.
        let p = protos(&[vec![0.0, 0.0], vec![4.0, 0.0]]);
        let cfg = DynamicsConfig::with_step_factor(50.0, 50, 0.5, Metric::Euclidean).unwrap();
        let finl = run_recursion(&ParticleState::free(vec![0.9, 0.4]), &p, &cfg).unwrap();
        let dist = sq_dist(&finl.position, &[0.0, 0.0]).sqrt();
        assert!(dist <= 1e-3, "residual distance {dist}");
    }

    #[test]
    fn spherical_step_preserves_unit_norm() {
        let p = protos(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        let cfg =
            DynamicsConfig::with_step_factor(2.0, 12, 1.0 / 12.0, Metric::Spherical).unwrap();
        let s = 1.0 / 3.0_f64.sqrt();
        let mut state = ParticleState::free(vec![s, s, s]);
        for _ in 0..12 {
            state = update_step(&state, &p, &cfg).unwrap();
            assert!((norm(&state.position) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn spherical_energy_requires_unit_norm() {
        let p = protos(&[vec![1.0, 0.0]]);
        let cfg = DynamicsConfig::new(1.0, 5).unwrap().metric(Metric::Spherical);
        assert!(matches!(
            energy(&[2.0, 0.0], &p, &cfg),
            Err(Error::NotUnitNorm(_))
        ));
        assert!(energy(&[1.0, 0.0], &p, &cfg).is_ok());
    }

    #[test]
    fn spherical_energy_uses_normalized_memories() {
        // Memory (3,0) acts as (1,0): E(v=(1,0)) = -(1/β)·log exp(β·1) = -1.
        let p = protos(&[vec![3.0, 0.0]]);
        let cfg = DynamicsConfig::new(2.0, 5).unwrap().metric(Metric::Spherical);
        let e = energy(&[1.0, 0.0], &p, &cfg).unwrap();
        assert!((e - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_spherical_update_errors() {
        // Memory opposite the particle with a full step lands at the origin.
        let p = protos(&[vec![-1.0, 0.0]]);
        let cfg = DynamicsConfig::with_step_factor(1.0, 1, 1.0, Metric::Spherical).unwrap();
        let res = update_step(&ParticleState::free(vec![1.0, 0.0]), &p, &cfg);
        assert!(matches!(res, Err(Error::DegenerateNorm(_))));
    }

    #[test]
    fn trajectory_records_all_states() {
        let p = protos(&[vec![1.0, 0.0]]);
        let cfg = DynamicsConfig::new(1.0, 7).unwrap();
        let traj =
            run_recursion_trajectory(&ParticleState::free(vec![0.0, 0.0]), &p, &cfg).unwrap();
        assert_eq!(traj.positions.len(), 8);
        assert_eq!(traj.attractions.len(), 7);
        for a in &traj.attractions {
            assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let direct = run_recursion(&ParticleState::free(vec![0.0, 0.0]), &p, &cfg).unwrap();
        assert_eq!(traj.final_position(), direct.position.as_slice());
    }
}
