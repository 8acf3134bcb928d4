//! Lipschitz functions vanishing at the base point.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{PointedMetricSpace, BASE, METRIC_TOLERANCE};

/// Real values on the points of a space, zero at the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct LipFunction {
    space: PointedMetricSpace,
    values: Vec<f64>,
}

impl LipFunction {
    /// Requires one finite value per point and `values[0] == 0` exactly.
    pub fn new(space: &PointedMetricSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Structure(format!(
                "{} values for {} points",
                values.len(),
                space.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Structure("function values must be finite".into()));
        }
        if values[BASE] != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "function must vanish at the base point, got {}",
                values[BASE]
            )));
        }
        Ok(Self {
            space: space.clone(),
            values,
        })
    }

    /// Subtracts `values[0]` so the result vanishes at the base point.
    pub fn recentered(space: &PointedMetricSpace, mut values: Vec<f64>) -> Result<Self> {
        if let Some(&b) = values.first() {
            values.iter_mut().for_each(|v| *v -= b);
        }
        Self::new(space, values)
    }

    pub fn zero(space: &PointedMetricSpace) -> Self {
        Self {
            space: space.clone(),
            values: vec![0.0; space.len()],
        }
    }

    pub fn space(&self) -> &PointedMetricSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            space: self.space.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &LipFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &LipFunction, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(Self {
            space: self.space.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    /// Signed difference quotient `(f(i) - f(j)) / d(i,j)`.
    pub fn quotient(&self, i: usize, j: usize) -> f64 {
        (self.values[i] - self.values[j]) / self.space.d(i, j)
    }
}

/// The Lipschitz constant together with a pair realizing it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipConstant {
    pub value: f64,
    pub witness: Option<(usize, usize)>,
}

/// Largest `|quotient|` over pairs accepted by `keep`. Ties go to the
/// lexicographically first pair. Pairs closer than the metric tolerance are
/// skipped.
fn max_quotient(f: &LipFunction, mut keep: impl FnMut(usize, usize, f64) -> bool) -> LipConstant {
    let space = f.space();
    let mut best = LipConstant {
        value: 0.0,
        witness: None,
    };
    for (i, j) in space.pairs() {
        let d = space.d(i, j);
        if d < METRIC_TOLERANCE || !keep(i, j, d) {
            continue;
        }
        let q = (f.values[i] - f.values[j]).abs() / d;
        if best.witness.is_none() || q > best.value {
            best = LipConstant {
                value: q,
                witness: Some((i, j)),
            };
        }
    }
    best
}

pub fn lip_constant(f: &LipFunction) -> LipConstant {
    max_quotient(f, |_, _, _| true)
}

/// Sup of `|quotient|` over pairs with `0 < d(i,j) < delta`.
pub fn flatness_at_scale(f: &LipFunction, delta: f64) -> f64 {
    max_quotient(f, |_, _, d| d < delta).value
}

/// Sup of `|quotient|` over pairs with at least one point outside the
/// closed ball `B̄(0, r)`.
pub fn tail_flatness(f: &LipFunction, r: f64) -> f64 {
    let space = f.space().clone();
    max_quotient(f, |i, j, _| space.d(BASE, i) > r || space.d(BASE, j) > r).value
}

pub fn pointwise_min(f: &LipFunction, g: &LipFunction) -> Result<LipFunction> {
    f.zip_with(g, f64::min)
}

pub fn pointwise_max(f: &LipFunction, g: &LipFunction) -> Result<LipFunction> {
    f.zip_with(g, f64::max)
}

/// Small-scale and tail flatness sampled at every realized distance.
///
/// `lip0[i]` is `flatness_at_scale(f, scale_points[i])` and `tail[i]` is
/// `tail_flatness(f, scale_points[i])`. Both sups are piecewise constant
/// between realized distances, so the samples determine them everywhere;
/// past the diameter the small-scale profile equals the Lipschitz constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessProfile {
    pub scale_points: Vec<f64>,
    pub lip0: Vec<f64>,
    pub tail: Vec<f64>,
}

pub fn flatness_profile(f: &LipFunction) -> FlatnessProfile {
    let scale_points = f.space().distinct_distances();
    let lip0 = scale_points
        .iter()
        .map(|&s| flatness_at_scale(f, s))
        .collect();
    let tail = scale_points.iter().map(|&s| tail_flatness(f, s)).collect();
    FlatnessProfile {
        scale_points,
        lip0,
        tail,
    }
}
