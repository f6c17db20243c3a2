//! Two-layer perceptron on the two-moons dataset.
//!
//! The model is `2 -> width -> 1` with tanh hidden units and a logistic
//! loss on the scalar score; tanh keeps the loss smooth everywhere so
//! finite-difference gradient checks are clean. Gradients are hand-written
//! backpropagation.
//!
//! Parameter layout, `dim = 4 * width + 1`:
//!
//! ```text
//! [ W1 (width x 2, row-major) | b1 (width) | w2 (width) | b2 (scalar) ]
//! ```

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::logistic::{logistic_loss, sigmoid};
use super::{check_positive, least_squares::gaussian_vec, StochasticObjective};
use crate::error::{Error, Result};
use crate::geometry::ParamVector;

#[derive(Debug, Clone)]
pub struct TwoMoonsMlp {
    points: Vec<[f64; 2]>,
    labels: Vec<f64>, // +1 outer moon, -1 inner moon
    width: usize,
}

impl TwoMoonsMlp {
    pub fn generate(n: usize, width: usize, noise: f64, seed: u64) -> Result<Self> {
        check_positive("problem.n", n)?;
        if width < 2 {
            return Err(Error::domain("problem.width", "at least 2", width as f64));
        }
        if !noise.is_finite() || noise < 0.0 {
            return Err(Error::domain("problem.noise", "non-negative and finite", noise));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_outer = n - n / 2;
        let n_inner = n / 2;

        let mut points = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        let arc = |count: usize, k: usize| {
            if count <= 1 {
                0.0
            } else {
                std::f64::consts::PI * k as f64 / (count - 1) as f64
            }
        };
        for k in 0..n_outer {
            let theta = arc(n_outer, k);
            points.push([theta.cos(), theta.sin()]);
            labels.push(1.0);
        }
        for k in 0..n_inner {
            let theta = arc(n_inner, k);
            points.push([1.0 - theta.cos(), 0.5 - theta.sin()]);
            labels.push(-1.0);
        }
        for pt in &mut points {
            let jitter = gaussian_vec(&mut rng, 2);
            pt[0] += noise * jitter[0];
            pt[1] += noise * jitter[1];
        }

        Ok(TwoMoonsMlp { points, labels, width })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    fn score(&self, w: &ParamVector, x: &[f64; 2]) -> (f64, Vec<f64>) {
        let h = self.width;
        let (w1, rest) = w.as_slice().split_at(2 * h);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(h);
        let mut hidden = Vec::with_capacity(h);
        let mut s = b2[0];
        for i in 0..h {
            let z = w1[2 * i] * x[0] + w1[2 * i + 1] * x[1] + b1[i];
            let a = z.tanh();
            s += w2[i] * a;
            hidden.push(a);
        }
        (s, hidden)
    }
}

impl StochasticObjective for TwoMoonsMlp {
    fn num_samples(&self) -> usize {
        self.labels.len()
    }

    fn dim(&self) -> usize {
        4 * self.width + 1
    }

    fn eval(&self, w: &ParamVector, z: usize) -> (f64, ParamVector) {
        let h = self.width;
        let x = &self.points[z];
        let y = self.labels[z];
        let (s, hidden) = self.score(w, x);
        let loss = logistic_loss(y * s);
        let g = -y * sigmoid(-y * s);

        let w2 = &w.as_slice()[3 * h..4 * h];
        let mut grad = vec![0.0; self.dim()];
        for i in 0..h {
            let dz = g * w2[i] * (1.0 - hidden[i] * hidden[i]);
            grad[2 * i] = dz * x[0];
            grad[2 * i + 1] = dz * x[1];
            grad[2 * h + i] = dz;
            grad[3 * h + i] = g * hidden[i];
        }
        grad[4 * h] = g;
        (loss, ParamVector::from_vec(grad))
    }

    fn accuracy(&self, w: &ParamVector) -> Option<f64> {
        let correct = self
            .points
            .iter()
            .zip(&self.labels)
            .filter(|(x, y)| self.score(w, x).0 * **y > 0.0)
            .count();
        Some(correct as f64 / self.labels.len() as f64)
    }

    /// Seeded Gaussian init scaled by fan-in; zero init would trap the
    /// hidden layer at a saddle.
    fn initial_point(&self, seed: u64) -> ParamVector {
        let h = self.width;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = vec![0.0; self.dim()];
        let s1 = (1.0 / 2.0f64).sqrt();
        let s2 = (1.0 / h as f64).sqrt();
        for v in values.iter_mut().take(2 * h) {
            *v = s1 * gaussian_vec(&mut rng, 1)[0];
        }
        for v in values.iter_mut().skip(3 * h).take(h) {
            *v = s2 * gaussian_vec(&mut rng, 1)[0];
        }
        ParamVector::from_vec(values)
    }

    fn dataset(&self) -> (Vec<String>, Vec<Vec<f64>>) {
        let header = vec!["x0".to_string(), "x1".to_string(), "y".to_string()];
        let rows = self
            .points
            .iter()
            .zip(&self.labels)
            .map(|(x, y)| vec![x[0], x[1], *y])
            .collect();
        (header, rows)
    }
}
