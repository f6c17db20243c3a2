//! Synthetic objectives with exact analytic gradients.
//!
//! Each objective is a family of per-sample losses `l_z(w) >= 0` whose mean
//! is the full training loss. Generators either plant a known zero-loss
//! solution (the interpolating problems) or deliberately rule one out.

mod gradcheck;
mod least_squares;
mod logistic;
mod two_moons;

pub use gradcheck::{check_gradients, GradCheckFailure, GradCheckReport};
pub use least_squares::{InterpLeastSquares, NonInterpLeastSquares};
pub use logistic::SeparableLogistic;
pub use two_moons::TwoMoonsMlp;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ParamVector;

/// A sampled loss family: per-sample (loss, gradient) oracle plus
/// full-objective evaluation.
pub trait StochasticObjective: Send + Sync {
    /// Number of samples.
    fn num_samples(&self) -> usize;

    /// Parameter dimension.
    fn dim(&self) -> usize;

    /// Loss and gradient of sample `z` at `w`. Losses are non-negative.
    fn eval(&self, w: &ParamVector, z: usize) -> (f64, ParamVector);

    /// Mean per-sample loss over the whole training set.
    fn full_loss(&self, w: &ParamVector) -> f64 {
        let n = self.num_samples();
        let sum: f64 = (0..n).map(|z| self.eval(w, z).0).sum();
        sum / n as f64
    }

    /// A parameter vector with zero loss on every sample, when the problem
    /// interpolates by construction.
    fn planted_solution(&self) -> Option<&ParamVector> {
        None
    }

    /// Classification accuracy at `w`, for objectives where it is defined.
    fn accuracy(&self, _w: &ParamVector) -> Option<f64> {
        None
    }

    /// Starting point for a run with the given seed. Zero unless the
    /// objective needs symmetry breaking.
    fn initial_point(&self, _seed: u64) -> ParamVector {
        ParamVector::zeros(self.dim())
    }

    /// The generated dataset, one row per sample, for CSV export.
    fn dataset(&self) -> (Vec<String>, Vec<Vec<f64>>);
}

/// Largest per-sample loss at `w`; zero exactly when `w` interpolates.
pub fn interpolation_residual(objective: &dyn StochasticObjective, w: &ParamVector) -> f64 {
    (0..objective.num_samples())
        .map(|z| objective.eval(w, z).0)
        .fold(0.0, f64::max)
}

/// Seed-deterministic recipe for building an objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    InterpLeastSquares { n: usize, p: usize, seed: u64 },
    SeparableLogistic { n: usize, p: usize, margin: f64, seed: u64 },
    TwoMoonsMlp { n: usize, width: usize, noise: f64, seed: u64 },
    NonInterpLeastSquares { n: usize, p: usize, noise: f64, seed: u64 },
}

impl ProblemSpec {
    pub fn build(&self) -> Result<Box<dyn StochasticObjective>> {
        match *self {
            ProblemSpec::InterpLeastSquares { n, p, seed } => {
                Ok(Box::new(InterpLeastSquares::generate(n, p, seed)?))
            }
            ProblemSpec::SeparableLogistic { n, p, margin, seed } => {
                Ok(Box::new(SeparableLogistic::generate(n, p, margin, seed)?))
            }
            ProblemSpec::TwoMoonsMlp { n, width, noise, seed } => {
                Ok(Box::new(TwoMoonsMlp::generate(n, width, noise, seed)?))
            }
            ProblemSpec::NonInterpLeastSquares { n, p, noise, seed } => {
                Ok(Box::new(NonInterpLeastSquares::generate(n, p, noise, seed)?))
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ProblemSpec::InterpLeastSquares { .. } => "interp_least_squares",
            ProblemSpec::SeparableLogistic { .. } => "separable_logistic",
            ProblemSpec::TwoMoonsMlp { .. } => "two_moons_mlp",
            ProblemSpec::NonInterpLeastSquares { .. } => "noninterp_least_squares",
        }
    }

    /// Shape and parameter checks, without generating any data.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ProblemSpec::InterpLeastSquares { n, p, .. } => {
                check_positive("problem.n", n)?;
                check_positive("problem.p", p)?;
                if p < n {
                    return Err(Error::InvalidArgument(format!(
                        "interp_least_squares requires p >= n for interpolation, got n={n}, p={p}"
                    )));
                }
            }
            ProblemSpec::SeparableLogistic { n, p, margin, .. } => {
                check_positive("problem.n", n)?;
                check_positive("problem.p", p)?;
                if !margin.is_finite() || margin <= 0.0 {
                    return Err(Error::domain("problem.margin", "positive and finite", margin));
                }
            }
            ProblemSpec::TwoMoonsMlp { n, width, noise, .. } => {
                check_positive("problem.n", n)?;
                if width < 2 {
                    return Err(Error::domain("problem.width", "at least 2", width as f64));
                }
                if !noise.is_finite() || noise < 0.0 {
                    return Err(Error::domain("problem.noise", "non-negative and finite", noise));
                }
            }
            ProblemSpec::NonInterpLeastSquares { n, p, noise, .. } => {
                check_positive("problem.n", n)?;
                check_positive("problem.p", p)?;
                if n <= p {
                    return Err(Error::InvalidArgument(format!(
                        "noninterp_least_squares requires n > p, got n={n}, p={p}"
                    )));
                }
                if !noise.is_finite() || noise <= 0.0 {
                    return Err(Error::domain("problem.noise", "positive and finite", noise));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn check_positive(name: &'static str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(Error::domain(name, "a positive integer", 0.0));
    }
    Ok(())
}
