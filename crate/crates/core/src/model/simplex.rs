use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `Σα_i = 1`.
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

/// A point `α` of the unit simplex `{α : α_i ∈ [0,1], Σα_i = 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::BadSimplexPoint("no coordinates".into()));
        }
        if let Some(a) = coords.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::BadSimplexPoint(format!("coordinate {a} outside [0, 1]")));
        }
        let total: f64 = coords.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(Error::BadSimplexPoint(format!("coordinates sum to {total}")));
        }
        Ok(Self(coords))
    }

    /// Clamps to `[0, 1]` and rescales to unit sum.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        for a in coords.iter_mut() {
            *a = a.clamp(0.0, 1.0);
        }
        let total: f64 = coords.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::BadSimplexPoint("all coordinates are zero".into()));
        }
        Ok(Self::from_normalized(coords.into_iter().map(|a| a / total).collect()))
    }

    /// Wraps coordinates that already satisfy the invariants up to rounding.
    pub(crate) fn from_normalized(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    /// `(1 - t, t)`: the point at parameter `t` along a two-component ridgeline.
    pub fn pair(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::BadSimplexPoint(format!("pair parameter {t} outside [0, 1]")));
        }
        Ok(Self(vec![1.0 - t, t]))
    }

    pub fn vertex(k: usize, i: usize) -> Self {
        let mut v = vec![0.0; k];
        v[i] = 1.0;
        Self(v)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every coordinate strictly positive.
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&a| a > 0.0)
    }

    pub fn max_abs_diff(&self, other: &SimplexPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
