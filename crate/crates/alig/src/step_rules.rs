//! Per-iteration step-size rules.
//!
//! All rules are pure functions of the sampled loss, its gradient norm and
//! the rule's constants:
//!
//! * ALI-G:  `gamma = min( loss / (||g||^2 + delta), eta )` with a constant
//!   maximal learning-rate `eta` and additive stabilizer `delta`.
//! * SPS:    `gamma = min( loss / (c * ||g||^2), bound(t) )` with a
//!   multiplicative constant `c` and a possibly decaying bound.
//! * Constant LR and the exact Polyak step `(loss - f*) / ||g||^2` serve as
//!   baselines.

use serde::Serialize;

use crate::error::{Error, Result};

/// Evolution of the SPS maximal learning-rate over iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundSchedule {
    Constant,
    /// `bound(t) = gamma_bound * factor^(t / period)` with integer division.
    MultiplicativeDecay { factor: f64, period: u64 },
}

impl BoundSchedule {
    pub fn bound_at(&self, gamma_bound: f64, iteration: u64) -> f64 {
        match self {
            BoundSchedule::Constant => gamma_bound,
            BoundSchedule::MultiplicativeDecay { factor, period } => {
                let k = (iteration / period).min(i32::MAX as u64) as i32;
                gamma_bound * factor.powi(k)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let BoundSchedule::MultiplicativeDecay { factor, period } = self {
            if !factor.is_finite() || *factor <= 0.0 || *factor > 1.0 {
                return Err(Error::domain("rule.bound_factor", "in (0, 1]", *factor));
            }
            if *period == 0 {
                return Err(Error::domain("rule.bound_period", "a positive integer", 0.0));
            }
        }
        Ok(())
    }
}

fn ser_f64_or_inf<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

/// Selects a step-size rule together with its constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum StepRuleConfig {
    #[serde(rename = "alig")]
    AliG {
        eta: f64,
        delta: f64,
    },
    Sps {
        c: f64,
        #[serde(serialize_with = "ser_f64_or_inf")]
        gamma_bound: f64,
        bound_schedule: BoundSchedule,
    },
    ConstantLr {
        lr: f64,
    },
    ExactPolyak {
        f_star: f64,
    },
}

impl StepRuleConfig {
    /// ALI-G with the default stabilizer `delta = 1e-5`.
    pub fn alig(eta: f64) -> Self {
        StepRuleConfig::AliG { eta, delta: 1e-5 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StepRuleConfig::AliG { eta, delta } => {
                if !eta.is_finite() || eta <= 0.0 {
                    return Err(Error::domain("rule.eta", "positive and finite", eta));
                }
                if !delta.is_finite() || delta < 0.0 {
                    return Err(Error::domain("rule.delta", "non-negative and finite", delta));
                }
            }
            StepRuleConfig::Sps {
                c,
                gamma_bound,
                bound_schedule,
            } => {
                if !c.is_finite() || c <= 0.0 {
                    return Err(Error::domain("rule.c", "positive and finite", c));
                }
                if gamma_bound.is_nan() || gamma_bound <= 0.0 {
                    return Err(Error::domain("rule.bound", "positive (or inf)", gamma_bound));
                }
                bound_schedule.validate()?;
            }
            StepRuleConfig::ConstantLr { lr } => {
                if !lr.is_finite() || lr <= 0.0 {
                    return Err(Error::domain("rule.lr", "positive and finite", lr));
                }
            }
            StepRuleConfig::ExactPolyak { f_star } => {
                if !f_star.is_finite() || f_star < 0.0 {
                    return Err(Error::domain("rule.f_star", "non-negative and finite", f_star));
                }
            }
        }
        Ok(())
    }

    /// Short name used in output tables and directory labels.
    pub fn variant_name(&self) -> &'static str {
        match self {
            StepRuleConfig::AliG { .. } => "alig",
            StepRuleConfig::Sps { .. } => "sps",
            StepRuleConfig::ConstantLr { .. } => "constant_lr",
            StepRuleConfig::ExactPolyak { .. } => "exact_polyak",
        }
    }

    /// The rule's maximal step size at iteration `t`, if it has one.
    pub fn bound_at(&self, iteration: u64) -> Option<f64> {
        match self {
            StepRuleConfig::AliG { eta, .. } => Some(*eta),
            StepRuleConfig::Sps {
                gamma_bound,
                bound_schedule,
                ..
            } => Some(bound_schedule.bound_at(*gamma_bound, iteration)),
            StepRuleConfig::ConstantLr { .. } | StepRuleConfig::ExactPolyak { .. } => None,
        }
    }
}

/// Per-iteration quantities every rule may consume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInputs {
    /// Sampled loss, non-negative.
    pub loss: f64,
    /// Squared Euclidean norm of the sampled gradient.
    pub grad_norm_sq: f64,
    /// Iteration counter, feeds the SPS bound schedule.
    pub iteration: u64,
}

impl StepInputs {
    fn validate(&self) -> Result<()> {
        if !self.loss.is_finite() || self.loss < 0.0 {
            return Err(Error::domain("loss", "non-negative and finite", self.loss));
        }
        if !self.grad_norm_sq.is_finite() || self.grad_norm_sq < 0.0 {
            return Err(Error::domain(
                "grad_norm_sq",
                "non-negative and finite",
                self.grad_norm_sq,
            ));
        }
        Ok(())
    }
}

/// ALI-G step size `min( loss / (grad_norm_sq + delta), eta )`.
///
/// Zero loss gives a zero step. With `delta = 0`, a zero gradient norm and
/// positive loss the ratio is undefined and an error is returned.
pub fn alig_step_size(loss: f64, grad_norm_sq: f64, eta: f64, delta: f64) -> Result<f64> {
    StepInputs {
        loss,
        grad_norm_sq,
        iteration: 0,
    }
    .validate()?;
    StepRuleConfig::AliG { eta, delta }.validate()?;
    if loss == 0.0 {
        return Ok(0.0);
    }
    let denom = grad_norm_sq + delta;
    if denom == 0.0 {
        return Err(Error::DivisionUndefined { loss });
    }
    Ok((loss / denom).min(eta))
}

/// SPS step size `min( loss / (c * grad_norm_sq), bound(iteration) )`.
pub fn sps_step_size(
    loss: f64,
    grad_norm_sq: f64,
    c: f64,
    gamma_bound: f64,
    bound_schedule: BoundSchedule,
    iteration: u64,
) -> Result<f64> {
    StepInputs {
        loss,
        grad_norm_sq,
        iteration,
    }
    .validate()?;
    StepRuleConfig::Sps {
        c,
        gamma_bound,
        bound_schedule,
    }
    .validate()?;
    if loss == 0.0 {
        return Ok(0.0);
    }
    if grad_norm_sq == 0.0 {
        return Err(Error::DivisionUndefined { loss });
    }
    let bound = bound_schedule.bound_at(gamma_bound, iteration);
    Ok((loss / (c * grad_norm_sq)).min(bound))
}

/// Fixed step size, independent of loss and gradient.
pub fn constant_step_size(lr: f64) -> Result<f64> {
    StepRuleConfig::ConstantLr { lr }.validate()?;
    Ok(lr)
}

/// Classical Polyak step `(loss - f_star) / grad_norm_sq` for a known
/// optimal value `f_star`.
pub fn exact_polyak_step_size(loss: f64, f_star: f64, grad_norm_sq: f64) -> Result<f64> {
    StepInputs {
        loss,
        grad_norm_sq,
        iteration: 0,
    }
    .validate()?;
    StepRuleConfig::ExactPolyak { f_star }.validate()?;
    if grad_norm_sq == 0.0 {
        return Err(Error::domain("grad_norm_sq", "positive", grad_norm_sq));
    }
    if loss < f_star {
        return Err(Error::domain("loss", "at least f_star", loss));
    }
    Ok((loss - f_star) / grad_norm_sq)
}

/// Dispatch to the configured rule. Pure: identical arguments give
/// bit-identical results.
pub fn step_size(config: &StepRuleConfig, inputs: &StepInputs) -> Result<f64> {
    inputs.validate()?;
    match *config {
        StepRuleConfig::AliG { eta, delta } => {
            alig_step_size(inputs.loss, inputs.grad_norm_sq, eta, delta)
        }
        StepRuleConfig::Sps {
            c,
            gamma_bound,
            bound_schedule,
        } => sps_step_size(
            inputs.loss,
            inputs.grad_norm_sq,
            c,
            gamma_bound,
            bound_schedule,
            inputs.iteration,
        ),
        StepRuleConfig::ConstantLr { lr } => constant_step_size(lr),
        StepRuleConfig::ExactPolyak { f_star } => {
            exact_polyak_step_size(inputs.loss, f_star, inputs.grad_norm_sq)
        }
    }
}
