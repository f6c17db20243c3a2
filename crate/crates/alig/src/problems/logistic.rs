//! Linearly separable logistic regression.
//!
//! Labels come from a planted unit-norm hyperplane and every sample is
//! pushed to score at least `margin` from it, so the data is separable by
//! construction. The logistic loss `log(1 + exp(-y * x.w))` approaches but
//! never attains zero at finite `w`, so no planted solution is reported.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{check_positive, least_squares::gaussian_vec, StochasticObjective};
use crate::error::{Error, Result};
use crate::geometry::ParamVector;

/// `log(1 + exp(-t))` without overflow for large |t|.
pub(crate) fn logistic_loss(t: f64) -> f64 {
    if t >= 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

/// Logistic sigmoid `1 / (1 + exp(-t))`.
pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone)]
pub struct SeparableLogistic {
    features: Vec<Vec<f64>>,
    labels: Vec<f64>, // +1 / -1
    hyperplane: ParamVector,
}

impl SeparableLogistic {
    pub fn generate(n: usize, p: usize, margin: f64, seed: u64) -> Result<Self> {
        check_positive("problem.n", n)?;
        check_positive("problem.p", p)?;
        if !margin.is_finite() || margin <= 0.0 {
            return Err(Error::domain("problem.margin", "positive and finite", margin));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut normal = gaussian_vec(&mut rng, p);
        let norm = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut normal {
            *x /= norm;
        }

        let mut features = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let mut x = gaussian_vec(&mut rng, p);
            let score: f64 = x.iter().zip(&normal).map(|(a, b)| a * b).sum();
            let side = if score >= 0.0 { 1.0 } else { -1.0 };
            if score.abs() < margin {
                // push the point along the normal until it clears the margin
                let shift = side * margin - score;
                for (xi, ui) in x.iter_mut().zip(&normal) {
                    *xi += shift * ui;
                }
            }
            features.push(x);
            labels.push(side);
        }

        Ok(SeparableLogistic {
            features,
            labels,
            hyperplane: ParamVector::from_vec(normal),
        })
    }

    /// The unit-norm hyperplane the labels were generated from.
    pub fn hyperplane(&self) -> &ParamVector {
        &self.hyperplane
    }
}

impl StochasticObjective for SeparableLogistic {
    fn num_samples(&self) -> usize {
        self.labels.len()
    }

    fn dim(&self) -> usize {
        self.features[0].len()
    }

    fn eval(&self, w: &ParamVector, z: usize) -> (f64, ParamVector) {
        let x = &self.features[z];
        let y = self.labels[z];
        let t = y * x.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>();
        let loss = logistic_loss(t);
        let coeff = -y * sigmoid(-t);
        let grad = x.iter().map(|xi| coeff * xi).collect::<Vec<_>>();
        (loss, ParamVector::from_vec(grad))
    }

    fn accuracy(&self, w: &ParamVector) -> Option<f64> {
        let correct = self
            .features
            .iter()
            .zip(&self.labels)
            .filter(|(x, y)| {
                let s: f64 = x.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
                s * **y > 0.0
            })
            .count();
        Some(correct as f64 / self.labels.len() as f64)
    }

    fn dataset(&self) -> (Vec<String>, Vec<Vec<f64>>) {
        let p = self.dim();
        let mut header: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
        header.push("y".to_string());
        let rows = self
            .features
            .iter()
            .zip(&self.labels)
            .map(|(x, y)| {
                let mut row = x.clone();
                row.push(*y);
                row
            })
            .collect();
        (header, rows)
    }
}
