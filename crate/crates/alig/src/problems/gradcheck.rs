//! Central finite-difference verification of analytic gradients.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::StochasticObjective;
use crate::error::{Error, Result};
use crate::geometry::ParamVector;

/// One coordinate whose analytic and numerical gradients disagree.
#[derive(Debug, Clone)]
pub struct GradCheckFailure {
    pub trial: usize,
    pub sample: usize,
    pub coordinate: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub trials: usize,
    pub tol: f64,
    pub max_rel_error: f64,
    pub failures: Vec<GradCheckFailure>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Relative error with an absolute floor so near-zero coordinates are
/// judged on absolute disagreement.
fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

/// Compare analytic gradients against central finite differences at
/// `trials` random (w, z) pairs. Every coordinate is perturbed by `h`.
pub fn check_gradients(
    objective: &dyn StochasticObjective,
    trials: usize,
    h: f64,
    tol: f64,
    seed: u64,
) -> Result<GradCheckReport> {
    if trials == 0 {
        return Err(Error::domain("trials", "a positive integer", 0.0));
    }
    if !(h > 0.0 && h <= 1e-3) {
        return Err(Error::domain("h", "in (0, 1e-3]", h));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::domain("tol", "positive and finite", tol));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = objective.dim();
    let n = objective.num_samples();
    let mut max_rel_error = 0.0_f64;
    let mut failures = Vec::new();

    for trial in 0..trials {
        let mut w = ParamVector::from_vec((0..p).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let z = rng.gen_range(0..n);
        let (_, analytic) = objective.eval(&w, z);
        for i in 0..p {
            let orig = w[i];
            w[i] = orig + h;
            let plus = objective.eval(&w, z).0;
            w[i] = orig - h;
            let minus = objective.eval(&w, z).0;
            w[i] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            let err = rel_error(analytic[i], numeric);
            max_rel_error = max_rel_error.max(err);
            if err > tol {
                failures.push(GradCheckFailure {
                    trial,
                    sample: z,
                    coordinate: i,
                    analytic: analytic[i],
                    numeric,
                    rel_error: err,
                });
            }
        }
    }

    Ok(GradCheckReport {
        trials,
        tol,
        max_rel_error,
        failures,
    })
}
