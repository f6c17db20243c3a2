//! Least-squares objectives: `l_z(w) = 0.5 * (x_z . w - y_z)^2`.
//!
//! The interpolating variant plants a solution `w*` and sets `y = X w*`, so
//! zero loss is attainable by construction (requires `p >= n`). The
//! non-interpolating variant is underparameterized with noisy targets, so
//! even the exact least-squares minimizer keeps a positive residual.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{check_positive, StochasticObjective};
use crate::error::{Error, Result};
use crate::geometry::ParamVector;

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller on open-interval uniforms
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub(crate) fn gaussian_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| standard_normal(rng)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn eval_least_squares(features: &[Vec<f64>], targets: &[f64], w: &ParamVector, z: usize) -> (f64, ParamVector) {
    let x = &features[z];
    let residual = dot(x, w.as_slice()) - targets[z];
    let loss = 0.5 * residual * residual;
    let grad = x.iter().map(|xi| residual * xi).collect::<Vec<_>>();
    (loss, ParamVector::from_vec(grad))
}

fn dataset_rows(features: &[Vec<f64>], targets: &[f64]) -> (Vec<String>, Vec<Vec<f64>>) {
    let p = features[0].len();
    let mut header: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
    header.push("y".to_string());
    let rows = features
        .iter()
        .zip(targets)
        .map(|(x, y)| {
            let mut row = x.clone();
            row.push(*y);
            row
        })
        .collect();
    (header, rows)
}

/// Overparameterized least squares with a planted zero-loss solution.
#[derive(Debug, Clone)]
pub struct InterpLeastSquares {
    features: Vec<Vec<f64>>,
    targets: Vec<f64>,
    planted: ParamVector,
}

impl InterpLeastSquares {
    pub fn generate(n: usize, p: usize, seed: u64) -> Result<Self> {
        check_positive("problem.n", n)?;
        check_positive("problem.p", p)?;
        if p < n {
            return Err(Error::InvalidArgument(format!(
                "interp_least_squares requires p >= n for interpolation, got n={n}, p={p}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let planted = gaussian_vec(&mut rng, p);
        let features: Vec<Vec<f64>> = (0..n).map(|_| gaussian_vec(&mut rng, p)).collect();
        let targets: Vec<f64> = features.iter().map(|x| dot(x, &planted)).collect();
        Ok(InterpLeastSquares {
            features,
            targets,
            planted: ParamVector::from_vec(planted),
        })
    }
}

impl StochasticObjective for InterpLeastSquares {
    fn num_samples(&self) -> usize {
        self.targets.len()
    }

    fn dim(&self) -> usize {
        self.features[0].len()
    }

    fn eval(&self, w: &ParamVector, z: usize) -> (f64, ParamVector) {
        eval_least_squares(&self.features, &self.targets, w, z)
    }

    fn planted_solution(&self) -> Option<&ParamVector> {
        Some(&self.planted)
    }

    fn dataset(&self) -> (Vec<String>, Vec<Vec<f64>>) {
        dataset_rows(&self.features, &self.targets)
    }
}

/// Underparameterized least squares with noisy targets; no zero-loss
/// solution exists.
#[derive(Debug, Clone)]
pub struct NonInterpLeastSquares {
    features: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl NonInterpLeastSquares {
    pub fn generate(n: usize, p: usize, noise: f64, seed: u64) -> Result<Self> {
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
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = gaussian_vec(&mut rng, p);
        let features: Vec<Vec<f64>> = (0..n).map(|_| gaussian_vec(&mut rng, p)).collect();
        let targets: Vec<f64> = features
            .iter()
            .map(|x| dot(x, &base) + noise * standard_normal(&mut rng))
            .collect();
        Ok(NonInterpLeastSquares { features, targets })
    }
}

impl StochasticObjective for NonInterpLeastSquares {
    fn num_samples(&self) -> usize {
        self.targets.len()
    }

    fn dim(&self) -> usize {
        self.features[0].len()
    }

    fn eval(&self, w: &ParamVector, z: usize) -> (f64, ParamVector) {
        eval_least_squares(&self.features, &self.targets, w, z)
    }

    fn dataset(&self) -> (Vec<String>, Vec<Vec<f64>>) {
        dataset_rows(&self.features, &self.targets)
    }
}
