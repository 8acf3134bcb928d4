//! Continuous piecewise-linear profiles built from plateaus, in exact
//! rational arithmetic.

use num::{BigRational, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Exact = BigRational;

/// Exact value of a finite double.
pub fn exact(x: f64) -> Exact {
    BigRational::from_float(x).expect("finite value")
}

pub fn to_f64(x: &Exact) -> f64 {
    x.to_f64().expect("representable")
}

/// Largest double not above `x`.
pub fn to_f64_down(x: &Exact) -> f64 {
    let f = to_f64(x);
    if &exact(f) > x {
        f.next_down()
    } else {
        f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntervalKind {
    U,
    W,
}

/// Open interval `(lo, hi)` on which a profile is constant. `hi = None`
/// stands for `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plateau {
    pub kind: IntervalKind,
    /// Construction step that created the interval.
    pub step: usize,
    pub index: usize,
    pub lo: Exact,
    pub hi: Option<Exact>,
    pub value: Exact,
}

impl Plateau {
    pub fn contains(&self, t: &Exact) -> bool {
        &self.lo < t && self.hi.as_ref().is_none_or(|h| t < h)
    }

    pub fn closure_contains(&self, t: &Exact) -> bool {
        &self.lo <= t && self.hi.as_ref().is_none_or(|h| t <= h)
    }

    /// Whether `t` is one of the finite endpoints.
    pub fn is_endpoint(&self, t: &Exact) -> bool {
        &self.lo == t || self.hi.as_ref() == Some(t)
    }
}

/// Serializable view of an interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalView {
    pub kind: IntervalKind,
    pub step: usize,
    pub index: usize,
    pub lo: f64,
    pub hi: Option<f64>,
    pub value: f64,
}

impl From<&Plateau> for IntervalView {
    fn from(p: &Plateau) -> Self {
        Self {
            kind: p.kind,
            step: p.step,
            index: p.index,
            lo: to_f64(&p.lo),
            hi: p.hi.as_ref().map(to_f64),
            value: to_f64(&p.value),
        }
    }
}

/// A continuous function on `[0, ∞)`: constant on each plateau, affine in
/// between, constant after the last breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    /// Disjoint plateaus in increasing order (after merging).
    plateaus: Vec<Plateau>,
    /// Every interval that went into the plateaus, before merging.
    intervals: Vec<Plateau>,
    breakpoints: Vec<Exact>,
    values: Vec<Exact>,
}

impl PiecewiseLinear {
    /// Coalesces overlapping intervals and interpolates between them.
    /// Overlapping or touching intervals must carry the same value.
    pub fn from_intervals(mut intervals: Vec<Plateau>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Construction("no plateaus".into()));
        }
        let all = intervals.clone();
        intervals.sort_by(|a, b| a.lo.cmp(&b.lo));
        let mut merged: Vec<Plateau> = Vec::with_capacity(intervals.len());
        for p in intervals {
            if let Some(last) = merged.last_mut() {
                let meets = match &last.hi {
                    None => true,
                    Some(h) => p.lo <= *h,
                };
                if meets {
                    if p.value != last.value {
                        return Err(Error::Construction(format!(
                            "intervals {:?}{}@{} and {:?}{}@{} overlap with values {} and {}",
                            last.kind,
                            last.index,
                            last.step,
                            p.kind,
                            p.index,
                            p.step,
                            to_f64(&last.value),
                            to_f64(&p.value)
                        )));
                    }
                    last.hi = match (last.hi.take(), p.hi) {
                        (Some(a), Some(b)) => Some(a.max(b)),
                        _ => None,
                    };
                    continue;
                }
            }
            merged.push(p);
        }

        let zero = Exact::zero();
        let mut breakpoints = Vec::new();
        let mut values = Vec::new();
        for p in &merged {
            let lo = if p.lo < zero {
                zero.clone()
            } else {
                p.lo.clone()
            };
            if breakpoints.last() != Some(&lo) {
                breakpoints.push(lo);
                values.push(p.value.clone());
            }
            if let Some(h) = &p.hi {
                breakpoints.push(h.clone());
                values.push(p.value.clone());
            }
        }
        if merged[0].lo > zero {
            return Err(Error::Construction("profile is undefined near 0".into()));
        }
        Ok(Self {
            plateaus: merged,
            intervals: all,
            breakpoints,
            values,
        })
    }

    pub fn plateaus(&self) -> &[Plateau] {
        &self.plateaus
    }

    pub fn intervals(&self) -> &[Plateau] {
        &self.intervals
    }

    pub fn breakpoints(&self) -> &[Exact] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Exact] {
        &self.values
    }

    pub fn eval(&self, t: &Exact) -> Exact {
        let bp = &self.breakpoints;
        let k = bp.partition_point(|b| b <= t);
        if k == 0 {
            return self.values[0].clone();
        }
        if k == bp.len() {
            return self.values[k - 1].clone();
        }
        let (t0, t1) = (&bp[k - 1], &bp[k]);
        let (v0, v1) = (&self.values[k - 1], &self.values[k]);
        if v0 == v1 {
            return v0.clone();
        }
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        to_f64(&self.eval(&exact(t)))
    }

    /// Largest `|slope|` over the affine pieces.
    pub fn max_slope(&self) -> Exact {
        self.breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| ((&v[1] - &v[0]) / (&t[1] - &t[0])).abs())
            .max()
            .unwrap_or_else(Exact::zero)
    }

    pub fn in_plateau(&self, t: &Exact) -> bool {
        self.plateaus.iter().any(|p| p.contains(t))
    }

    pub fn in_plateau_closure(&self, t: &Exact) -> bool {
        self.plateaus.iter().any(|p| p.closure_contains(t))
    }

    /// Finite plateau endpoints.
    pub fn edges(&self) -> impl Iterator<Item = &Exact> {
        self.plateaus
            .iter()
            .flat_map(|p| std::iter::once(&p.lo).chain(p.hi.as_ref()))
    }

    pub fn breakpoints_f64(&self) -> Vec<f64> {
        self.breakpoints.iter().map(to_f64).collect()
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(to_f64).collect()
    }
}
