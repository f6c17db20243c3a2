//! Parameter vectors, feasible regions and Euclidean projections.
//!
//! The only constrained region is the L2 ball `{ w : ||w||^2 <= r }`, whose
//! projection is a radial rescaling. Note that `r` bounds the *squared*
//! norm throughout this crate.

use serde::Serialize;

use crate::error::{Error, Result};

/// Dense vector of 64-bit model parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn from_vec(values: Vec<f64>) -> Self {
        ParamVector(values)
    }

    pub fn zeros(len: usize) -> Self {
        ParamVector(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn dot(&self, other: &ParamVector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Euclidean norm via a two-pass scheme: scale by the max-abs entry,
    /// then accumulate. Avoids overflow for large entries.
    pub fn norm(&self) -> f64 {
        let m = self.0.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        if m == 0.0 {
            return 0.0;
        }
        let sum: f64 = self.0.iter().map(|x| (x / m) * (x / m)).sum();
        sum.sqrt() * m
    }

    pub fn norm_sq(&self) -> f64 {
        let n = self.norm();
        n * n
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for ParamVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(values: Vec<f64>) -> Self {
        ParamVector(values)
    }
}

/// Constraint set for the iterates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum FeasibleRegion {
    /// No constraint: every finite vector is feasible.
    Unconstrained,
    /// `{ w : ||w||^2 <= r }` — `r` bounds the squared norm.
    L2Ball { r: f64 },
}

impl FeasibleRegion {
    pub fn l2_ball(r: f64) -> Result<Self> {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::domain("region.r", "positive and finite", r));
        }
        Ok(FeasibleRegion::L2Ball { r })
    }

    /// Whether `w` lies in the region, up to an additive slack `tol` on the
    /// squared norm.
    pub fn contains(&self, w: &ParamVector, tol: f64) -> Result<bool> {
        if !w.is_finite() {
            return Err(Error::domain("w", "finite", f64::NAN));
        }
        match self {
            FeasibleRegion::Unconstrained => Ok(true),
            FeasibleRegion::L2Ball { r } => Ok(w.norm_sq() <= r + tol),
        }
    }

    /// Euclidean projection onto the region. Feasible vectors are returned
    /// unchanged; infeasible ones are rescaled radially onto the boundary.
    pub fn project(&self, w: &ParamVector) -> Result<ParamVector> {
        if !w.is_finite() {
            return Err(Error::domain("w", "finite", f64::NAN));
        }
        match self {
            FeasibleRegion::Unconstrained => Ok(w.clone()),
            FeasibleRegion::L2Ball { r } => {
                let norm = w.norm();
                if norm * norm <= *r {
                    return Ok(w.clone());
                }
                let scale = r.sqrt() / norm;
                Ok(ParamVector(w.0.iter().map(|x| x * scale).collect()))
            }
        }
    }
}
