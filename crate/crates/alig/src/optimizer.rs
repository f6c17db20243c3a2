//! Projected stochastic-gradient optimizer with optional momentum.
//!
//! Each step computes the rule's step size from the sampled loss and
//! gradient, composes the displacement with heavy-ball or Nesterov
//! momentum, and projects the result back onto the feasible region:
//!
//! ```text
//! v_{t+1} = mu * v_t - gamma_t * g_t
//! heavy-ball: w_{t+1} = P( w_t + v_{t+1} )
//! nesterov:   w_{t+1} = P( w_t + mu * v_{t+1} - gamma_t * g_t )
//! ```
//!
//! `mu = 0` reduces to the plain projected update `P(w_t - gamma_t * g_t)`.
//! The projection is applied to the displaced iterate only; the velocity
//! buffer is never projected or reset at the boundary.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{FeasibleRegion, ParamVector};
use crate::problems::{interpolation_residual, StochasticObjective};
use crate::step_rules::{step_size, StepInputs, StepRuleConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumFlavor {
    HeavyBall,
    Nesterov,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumConfig {
    /// Momentum coefficient in [0, 1); 0 disables momentum.
    pub mu: f64,
    pub flavor: MomentumFlavor,
}

impl MomentumConfig {
    pub fn none() -> Self {
        MomentumConfig {
            mu: 0.0,
            flavor: MomentumFlavor::HeavyBall,
        }
    }

    pub fn heavy_ball(mu: f64) -> Self {
        MomentumConfig {
            mu,
            flavor: MomentumFlavor::HeavyBall,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() || !(0.0..1.0).contains(&self.mu) {
            return Err(Error::domain("momentum.mu", "in [0, 1)", self.mu));
        }
        Ok(())
    }
}

/// Mutable optimizer state: iterate, velocity buffer and step counter.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub w: ParamVector,
    pub velocity: ParamVector,
    pub t: u64,
}

/// What a single step did, for tracing and assertions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepRecord {
    pub t: u64,
    pub gamma: f64,
    pub sample_loss: f64,
    pub grad_norm_sq: f64,
    /// Squared norm of the iterate after the step.
    pub param_norm_sq: f64,
}

/// A step rule, momentum setting and feasible region bound to one run's
/// state. Single-threaded: steps mutate the state sequentially.
#[derive(Debug, Clone)]
pub struct Optimizer {
    rule: StepRuleConfig,
    momentum: MomentumConfig,
    region: FeasibleRegion,
    state: OptimizerState,
}

impl Optimizer {
    /// Projects `w0` onto the region and starts with zero velocity at t=0.
    pub fn new(
        w0: &ParamVector,
        rule: StepRuleConfig,
        momentum: MomentumConfig,
        region: FeasibleRegion,
    ) -> Result<Self> {
        rule.validate()?;
        momentum.validate()?;
        let w = region.project(w0)?;
        let velocity = ParamVector::zeros(w.len());
        Ok(Optimizer {
            rule,
            momentum,
            region,
            state: OptimizerState { w, velocity, t: 0 },
        })
    }

    pub fn state(&self) -> &OptimizerState {
        &self.state
    }

    pub fn rule(&self) -> &StepRuleConfig {
        &self.rule
    }

    pub fn region(&self) -> &FeasibleRegion {
        &self.region
    }

    /// One update from a sampled loss and gradient.
    pub fn step(&mut self, sample_loss: f64, grad: &ParamVector) -> Result<StepRecord> {
        if grad.len() != self.state.w.len() {
            return Err(Error::DimensionMismatch {
                expected: self.state.w.len(),
                got: grad.len(),
            });
        }
        if !grad.is_finite() {
            return Err(Error::domain("grad", "finite", f64::NAN));
        }
        let grad_norm_sq = grad.norm_sq();
        let gamma = step_size(
            &self.rule,
            &StepInputs {
                loss: sample_loss,
                grad_norm_sq,
                iteration: self.state.t,
            },
        )?;

        let mu = self.momentum.mu;
        let w = self.state.w.as_slice();
        let v = self.state.velocity.as_slice();
        let g = grad.as_slice();
        let mut new_v = Vec::with_capacity(w.len());
        let mut displaced = Vec::with_capacity(w.len());
        match self.momentum.flavor {
            MomentumFlavor::HeavyBall => {
                for i in 0..w.len() {
                    let vi = mu * v[i] - gamma * g[i];
                    new_v.push(vi);
                    displaced.push(w[i] + vi);
                }
            }
            MomentumFlavor::Nesterov => {
                for i in 0..w.len() {
                    let vi = mu * v[i] - gamma * g[i];
                    new_v.push(vi);
                    displaced.push(w[i] + (mu * vi - gamma * g[i]));
                }
            }
        }

        let new_w = self.region.project(&ParamVector::from_vec(displaced))?;
        let param_norm_sq = new_w.norm_sq();
        let record = StepRecord {
            t: self.state.t,
            gamma,
            sample_loss,
            grad_norm_sq,
            param_norm_sq,
        };
        self.state.w = new_w;
        self.state.velocity = ParamVector::from_vec(new_v);
        self.state.t += 1;
        Ok(record)
    }
}

/// One trace entry per optimizer step. `full_loss` and `accuracy` are set
/// only at evaluation points.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub t: u64,
    pub epoch: u64,
    /// Index of the sample used this step; kept for paired-run diffing,
    /// not part of the persisted schema.
    pub sample_index: usize,
    pub gamma: f64,
    pub sample_loss: f64,
    pub grad_norm_sq: f64,
    pub param_norm_sq: f64,
    pub full_loss: Option<f64>,
    pub accuracy: Option<f64>,
}

/// Receives the trace rows of a single owning run.
pub trait TraceSink {
    fn record(&mut self, row: &TraceRow) -> Result<()>;
}

/// In-memory sink.
#[derive(Debug, Default)]
pub struct MemoryTrace {
    pub rows: Vec<TraceRow>,
}

impl TraceSink for MemoryTrace {
    fn record(&mut self, row: &TraceRow) -> Result<()> {
        self.rows.push(row.clone());
        Ok(())
    }
}

/// Discards every row.
pub struct NullTrace;

impl TraceSink for NullTrace {
    fn record(&mut self, _row: &TraceRow) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub epochs: u64,
    pub seed: u64,
    /// Evaluate the full objective every this many epochs.
    pub eval_every: u64,
    /// Abort when a sampled loss exceeds this. The numerically stable loss
    /// formulas keep runaway runs finite for a very long time, so waiting
    /// for NaN/inf alone would not catch them.
    pub divergence_loss_limit: f64,
    /// Abort when the squared iterate norm exceeds this. Many orders of
    /// magnitude above any sane iterate on unit-scale data.
    pub divergence_param_limit: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            epochs: 100,
            seed: 0,
            eval_every: 1,
            divergence_loss_limit: 1e12,
            divergence_param_limit: 1e10,
        }
    }
}

/// Outcome metrics of a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub final_full_loss: f64,
    /// Running minimum over all full-objective evaluations.
    pub best_full_loss: f64,
    pub final_accuracy: Option<f64>,
    pub steps_taken: u64,
    pub interpolation_residual_final: f64,
    pub wall_time_s: f64,
}

/// Runs `epochs` passes over a seeded without-replacement shuffle of the
/// sample indices, one optimizer step per sample, emitting a trace row per
/// step. Deterministic given the seed and configuration.
pub fn run_epochs(
    optimizer: &mut Optimizer,
    objective: &dyn StochasticObjective,
    options: &RunOptions,
    sink: &mut dyn TraceSink,
) -> Result<RunSummary> {
    if objective.num_samples() == 0 {
        return Err(Error::InvalidArgument("objective has no samples".into()));
    }
    if options.eval_every == 0 {
        return Err(Error::domain("eval_every", "a positive integer", 0.0));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let n = objective.num_samples();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut best_full_loss = f64::INFINITY;
    let mut steps_taken = 0u64;

    for epoch in 0..options.epochs {
        indices.shuffle(&mut rng);
        let eval_epoch = (epoch + 1) % options.eval_every == 0;
        for (k, &z) in indices.iter().enumerate() {
            let t = optimizer.state().t;
            let (loss, grad) = objective.eval(&optimizer.state().w, z);
            if !loss.is_finite() || !grad.is_finite() {
                return Err(Error::Diverged {
                    t,
                    reason: format!("non-finite loss or gradient on sample {z}"),
                });
            }
            if loss > options.divergence_loss_limit {
                return Err(Error::Diverged {
                    t,
                    reason: format!(
                        "sample loss {loss:e} exceeded divergence limit {:e}",
                        options.divergence_loss_limit
                    ),
                });
            }
            let record = optimizer.step(loss, &grad).map_err(|e| match e {
                Error::Diverged { .. } => e,
                other => Error::Diverged {
                    t,
                    reason: other.to_string(),
                },
            })?;
            steps_taken += 1;

            let mut row = TraceRow {
                t: record.t,
                epoch,
                sample_index: z,
                gamma: record.gamma,
                sample_loss: record.sample_loss,
                grad_norm_sq: record.grad_norm_sq,
                param_norm_sq: record.param_norm_sq,
                full_loss: None,
                accuracy: None,
            };
            if eval_epoch && k == n - 1 {
                let fl = objective.full_loss(&optimizer.state().w);
                best_full_loss = best_full_loss.min(fl);
                row.full_loss = Some(fl);
                row.accuracy = objective.accuracy(&optimizer.state().w);
            }
            sink.record(&row)?;
            if record.param_norm_sq > options.divergence_param_limit {
                return Err(Error::Diverged {
                    t,
                    reason: format!(
                        "squared iterate norm {:e} exceeded divergence limit {:e}",
                        record.param_norm_sq, options.divergence_param_limit
                    ),
                });
            }
        }
    }

    let w_final = &optimizer.state().w;
    let final_full_loss = objective.full_loss(w_final);
    best_full_loss = best_full_loss.min(final_full_loss);
    Ok(RunSummary {
        final_full_loss,
        best_full_loss,
        final_accuracy: objective.accuracy(w_final),
        steps_taken,
        interpolation_residual_final: interpolation_residual(objective, w_final),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
