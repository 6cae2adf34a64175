//! Sampling-based model predictive path integral control on a cost map.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costmap::CostMap;
use crate::rng::{self, streams};
use crate::world::{ControlInput, VehicleParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MppiParams {
    /// Rollouts per call (K).
    pub samples: usize,
    /// Steps per rollout (T).
    pub horizon: usize,
    pub dt: f64,
    /// Temperature, in cost units.
    pub lambda: f64,
    pub steer_sigma: f64,
    pub speed_sigma: f64,
    /// AR(1) coefficient of the sampling noise across steps; 0 gives white noise.
    /// The per-step marginal spread stays at the sigmas above.
    pub noise_correlation: f64,
    /// Weight of Σδ² in the path cost.
    pub control_weight: f64,
    /// Weight of Σ(v - target_speed)² in the path cost.
    pub speed_weight: f64,
    pub target_speed: f64,
    /// Evaluate rollouts on the rayon pool. Results are identical either way.
    pub parallel: bool,
}

impl Default for MppiParams {
    fn default() -> Self {
        Self {
            samples: 5000,
            horizon: 20,
            dt: 0.05,
            lambda: 10.0,
            steer_sigma: 0.15,
            speed_sigma: 0.2,
            noise_correlation: 0.0,
            control_weight: 0.1,
            speed_weight: 1.0,
            target_speed: 1.0,
            parallel: true,
        }
    }
}

impl MppiParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.samples == 0 || self.horizon == 0 {
            return Err("samples and horizon must be >= 1".into());
        }
        if !(self.lambda > 0.0 && self.dt > 0.0) {
            return Err("lambda and dt must be positive".into());
        }
        if self.steer_sigma < 0.0 || self.speed_sigma < 0.0 || self.control_weight < 0.0 || self.speed_weight < 0.0 {
            return Err("noise scales and weights must be non-negative".into());
        }
        if !(0.0..1.0).contains(&self.noise_correlation) {
            return Err("noise_correlation must be in [0, 1)".into());
        }
        Ok(())
    }

    pub fn straight_nominal(&self) -> Vec<ControlInput> {
        vec![ControlInput::new(0.0, self.target_speed); self.horizon]
    }
}

/// Robot-frame pose: `forward`, `left` in meters, `yaw` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub forward: f64,
    pub left: f64,
    pub yaw: f64,
}

/// K sampled control sequences, their trajectories and path costs.
/// Row `k` of `controls`/`trajectories` is `[k*horizon .. (k+1)*horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutBatch {
    pub horizon: usize,
    pub controls: Vec<ControlInput>,
    pub trajectories: Vec<Pose2>,
    pub costs: Vec<f64>,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn controls_of(&self, k: usize) -> &[ControlInput] {
        &self.controls[k * self.horizon..(k + 1) * self.horizon]
    }

    pub fn trajectory_of(&self, k: usize) -> &[Pose2] {
        &self.trajectories[k * self.horizon..(k + 1) * self.horizon]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RolloutSummary {
    pub min_cost: f64,
    pub mean_cost: f64,
    /// Effective sample size, `1 / Σ w²`.
    pub ess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MppiOutput {
    pub control: ControlInput,
    pub sequence: Vec<ControlInput>,
    pub summary: RolloutSummary,
}

/// Simulates one rollout, writing its controls (and poses, if requested).
#[inline]
fn rollout(
    map: &CostMap,
    nominal: &[ControlInput],
    params: &MppiParams,
    vehicle: &VehicleParams,
    seed: u64,
    k: usize,
    controls: &mut [ControlInput],
    mut poses: Option<&mut [Pose2]>,
) -> f64 {
    let mut rng = rng::stream(&[seed, streams::ROLLOUT, k as u64]);
    let (mut fwd, mut left, mut yaw) = (0.0f64, 0.0f64, 0.0f64);
    let mut cost = 0.0;
    let inv_wheelbase = 1.0 / vehicle.wheelbase;
    let beta = params.noise_correlation;
    let innovation = (1.0 - beta * beta).sqrt();
    let (mut e_steer, mut e_speed) = (0.0f64, 0.0f64);
    for t in 0..params.horizon {
        let n_steer: f64 = rng.sample(StandardNormal);
        let n_speed: f64 = rng.sample(StandardNormal);
        if t == 0 {
            (e_steer, e_speed) = (n_steer, n_speed);
        } else {
            e_steer = beta * e_steer + innovation * n_steer;
            e_speed = beta * e_speed + innovation * n_speed;
        }
        let c = vehicle.clamp(ControlInput {
            steering: nominal[t].steering + params.steer_sigma * e_steer,
            speed: nominal[t].speed + params.speed_sigma * e_speed,
        });
        controls[t] = c;
        let (sin, cos) = yaw.sin_cos();
        fwd += c.speed * cos * params.dt;
        left += c.speed * sin * params.dt;
        yaw += c.speed * inv_wheelbase * c.steering.tan() * params.dt;
        if let Some(p) = poses.as_deref_mut() {
            p[t] = Pose2 { forward: fwd, left, yaw };
        }
        let dv = c.speed - params.target_speed;
        cost += map.cost_at(fwd, left) + params.control_weight * c.steering * c.steering + params.speed_weight * dv * dv;
    }
    cost
}

/// Samples and evaluates K rollouts around `nominal`.
pub fn sample_rollouts(
    map: &CostMap,
    nominal: &[ControlInput],
    params: &MppiParams,
    vehicle: &VehicleParams,
    seed: u64,
    keep_trajectories: bool,
) -> RolloutBatch {
    let (k_total, t) = (params.samples, params.horizon);
    assert_eq!(nominal.len(), t, "nominal sequence length must equal the horizon");
    let mut controls = vec![ControlInput::default(); k_total * t];
    let mut trajectories = if keep_trajectories { vec![Pose2::default(); k_total * t] } else { Vec::new() };
    let mut costs = vec![0.0; k_total];

    if keep_trajectories {
        let run = |(k, ((c, p), cost)): (usize, ((&mut [ControlInput], &mut [Pose2]), &mut f64))| {
            *cost = rollout(map, nominal, params, vehicle, seed, k, c, Some(p));
        };
        if params.parallel {
            controls
                .par_chunks_mut(t)
                .zip(trajectories.par_chunks_mut(t))
                .zip(costs.par_iter_mut())
                .enumerate()
                .for_each(run);
        } else {
            controls
                .chunks_mut(t)
                .zip(trajectories.chunks_mut(t))
                .zip(costs.iter_mut())
                .enumerate()
                .for_each(run);
        }
    } else {
        let run = |(k, (c, cost)): (usize, (&mut [ControlInput], &mut f64))| {
            *cost = rollout(map, nominal, params, vehicle, seed, k, c, None);
        };
        if params.parallel {
            controls.par_chunks_mut(t).zip(costs.par_iter_mut()).enumerate().for_each(run);
        } else {
            controls.chunks_mut(t).zip(costs.iter_mut()).enumerate().for_each(run);
        }
    }
    RolloutBatch {
        horizon: t,
        controls,
        trajectories,
        costs,
    }
}

/// Softmin weights `exp(-(S_i - min S)/λ)`, normalized to sum to one.
pub fn mppi_weights(costs: &[f64], lambda: f64) -> Vec<f64> {
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = costs.iter().map(|&s| (-(s - min) / lambda).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Element-wise `Σ_k w_k · controls_k`, reduced in rollout order.
pub fn weighted_sequence(batch: &RolloutBatch, weights: &[f64]) -> Vec<ControlInput> {
    let mut out = vec![ControlInput::default(); batch.horizon];
    for (k, &w) in weights.iter().enumerate() {
        for (acc, c) in out.iter_mut().zip(batch.controls_of(k)) {
            acc.steering += w * c.steering;
            acc.speed += w * c.speed;
        }
    }
    out
}

pub fn summarize(costs: &[f64], weights: &[f64]) -> RolloutSummary {
    RolloutSummary {
        min_cost: costs.iter().copied().fold(f64::INFINITY, f64::min),
        mean_cost: costs.iter().sum::<f64>() / costs.len() as f64,
        ess: 1.0 / weights.iter().map(|w| w * w).sum::<f64>(),
    }
}

/// One MPPI update around `nominal`; returns the first control, the updated
/// sequence and batch statistics.
pub fn plan_mppi(
    map: &CostMap,
    nominal: &[ControlInput],
    params: &MppiParams,
    vehicle: &VehicleParams,
    seed: u64,
) -> MppiOutput {
    let batch = sample_rollouts(map, nominal, params, vehicle, seed, false);
    let weights = mppi_weights(&batch.costs, params.lambda);
    let sequence = weighted_sequence(&batch, &weights);
    MppiOutput {
        control: sequence[0],
        summary: summarize(&batch.costs, &weights),
        sequence,
    }
}

/// Receding-horizon wrapper that keeps the warm-start sequence between calls.
#[derive(Debug, Clone)]
pub struct MppiPlanner {
    params: MppiParams,
    vehicle: VehicleParams,
    nominal: Vec<ControlInput>,
}

impl MppiPlanner {
    pub fn new(params: MppiParams, vehicle: VehicleParams) -> Self {
        Self {
            nominal: params.straight_nominal(),
            params,
            vehicle,
        }
    }

    pub fn params(&self) -> &MppiParams {
        &self.params
    }

    pub fn nominal(&self) -> &[ControlInput] {
        &self.nominal
    }

    pub fn reset(&mut self) {
        self.nominal = self.params.straight_nominal();
    }

    pub fn plan(&mut self, map: &CostMap, seed: u64) -> MppiOutput {
        let out = plan_mppi(map, &self.nominal, &self.params, &self.vehicle, seed);
        self.nominal = shift_sequence(&out.sequence);
        out
    }
}

/// Drops the first element and repeats the last.
pub fn shift_sequence(seq: &[ControlInput]) -> Vec<ControlInput> {
    let mut out: Vec<_> = seq.iter().skip(1).copied().collect();
    out.push(*seq.last().expect("non-empty sequence"));
    out
}
