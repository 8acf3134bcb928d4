//! Distance levels around the pair being separated and the plateau widths
//! derived from them.

use num::{One, Zero};
use serde::Serialize;

use super::phi::{exact, to_f64, Exact, IntervalKind, IntervalView, PiecewiseLinear, Plateau};
use crate::error::{Error, Result};
use crate::metric::{PointSet, PointedMetricSpace};

/// Levels of one construction step.
///
/// At step 1 the candidate distances are split into `u <= a/2 < v < a <= w
/// <= 3a/2`; distances beyond `3a/2` are ignored. At later steps the
/// candidates all sit on ramps of the previous profile, below `a/2` (u) or
/// above `a` (w), and `v` stays empty.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDecomposition {
    pub step: usize,
    pub a: Exact,
    pub u_levels: Vec<Exact>,
    pub v_levels: Vec<Exact>,
    pub w_levels: Vec<Exact>,
    /// Plateau width parameter (the minimal admissible gap).
    pub u_gap: Exact,
    /// Intervals introduced at this step, unmerged.
    pub intervals: Vec<Plateau>,
}

/// Serializable summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub step: usize,
    pub a: f64,
    pub u_levels: Vec<f64>,
    pub v_levels: Vec<f64>,
    pub w_levels: Vec<f64>,
    pub u_gap: f64,
    pub intervals: Vec<IntervalView>,
}

impl LevelDecomposition {
    /// Step-1 classification of the distances `levels` from `x`, with
    /// `a = d(x, y)`.
    pub fn first_step(a: f64, distances: impl IntoIterator<Item = f64>) -> Result<Self> {
        if a.is_nan() || a <= 0.0 {
            return Err(Error::Degenerate(format!("separation distance {a}")));
        }
        let mut all: Vec<f64> = distances.into_iter().collect();
        if all.is_empty() {
            return Err(Error::Degenerate("no candidate points".into()));
        }
        if all.iter().all(|&t| t == 0.0) {
            return Err(Error::Degenerate("all candidate distances are zero".into()));
        }
        all.sort_by(f64::total_cmp);
        all.dedup();

        let a_q = exact(a);
        let half = &a_q / Exact::from_integer(2.into());
        let three_half = &a_q * Exact::new(3.into(), 2.into());
        let (mut u, mut v, mut w) = (Vec::new(), Vec::new(), Vec::new());
        for t in all.into_iter().map(exact) {
            if t <= half {
                u.push(t);
            } else if t < a_q {
                v.push(t);
            } else if t <= three_half {
                w.push(t);
            }
        }

        let zero = Exact::zero();
        let mut terms = vec![half.clone()];
        if let (Some(first), Some(last)) = (u.first(), u.last()) {
            terms.push(first.clone());
            terms.push(&half - last);
        }
        if let (Some(first), Some(last)) = (w.first(), w.last()) {
            terms.push(first - &a_q);
            terms.push(&three_half - last);
        }
        terms.extend(u.windows(2).map(|p| &p[1] - &p[0]));
        terms.extend(w.windows(2).map(|p| &p[1] - &p[0]));
        let u_gap = terms
            .into_iter()
            .filter(|t| *t != zero)
            .min()
            .expect("a/2 is always a term");

        let quarter = &u_gap / Exact::from_integer(4.into());
        let interval = |kind, index, center: &Exact, value: Exact| Plateau {
            kind,
            step: 1,
            index,
            lo: center - &quarter,
            hi: Some(center + &quarter),
            value,
        };
        let mut intervals = vec![interval(IntervalKind::U, 0, &zero, zero.clone())];
        for (i, c) in u.iter().enumerate() {
            intervals.push(interval(IntervalKind::U, i + 1, c, c.clone()));
        }
        intervals.push(Plateau {
            kind: IntervalKind::W,
            step: 1,
            index: 0,
            lo: &half - &quarter,
            hi: Some(&a_q + &quarter),
            value: half.clone(),
        });
        for (i, c) in w.iter().enumerate() {
            intervals.push(interval(IntervalKind::W, i + 1, c, &three_half - c));
        }
        intervals.push(Plateau {
            kind: IntervalKind::W,
            step: 1,
            index: w.len() + 1,
            lo: &three_half - &quarter,
            hi: None,
            value: zero,
        });

        Ok(Self {
            step: 1,
            a: a_q,
            u_levels: u,
            v_levels: v,
            w_levels: w,
            u_gap,
            intervals,
        })
    }

    /// Levels for step `step >= 2`: candidate distances that lie on ramps of
    /// `previous`. The gap is the smallest nonzero distance among the
    /// previous gap, consecutive levels, and level-to-edge distances for
    /// every plateau edge of `previous`.
    pub fn refinement(
        step: usize,
        a: f64,
        previous_gap: &Exact,
        previous: &PiecewiseLinear,
        distances: impl IntoIterator<Item = f64>,
    ) -> Result<Self> {
        if step < 2 {
            return Err(Error::InvalidParameter(format!(
                "refinement steps start at 2, got {step}"
            )));
        }
        let mut all: Vec<f64> = distances.into_iter().collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        if all.is_empty() {
            return Err(Error::Degenerate("no candidate points".into()));
        }
        let levels: Vec<Exact> = all.into_iter().map(exact).collect();
        if let Some(t) = levels.iter().find(|t| previous.in_plateau(t)) {
            return Err(Error::Construction(format!(
                "level {} already lies on a plateau",
                to_f64(t)
            )));
        }
        let a_q = exact(a);
        let half = &a_q / Exact::from_integer(2.into());

        let zero = Exact::zero();
        let mut terms = vec![previous_gap.clone()];
        terms.extend(levels.windows(2).map(|p| &p[1] - &p[0]));
        for t in &levels {
            for e in previous.edges() {
                let gap = if t > e { t - e } else { e - t };
                terms.push(gap);
            }
        }
        let u_gap = terms
            .into_iter()
            .filter(|t| *t != zero)
            .min()
            .expect("previous gap is a term");

        let half_width = &u_gap / Exact::from_integer(num::BigInt::one() << (step + 1));
        let (mut u, mut w) = (Vec::new(), Vec::new());
        let mut intervals = Vec::new();
        for t in levels {
            let kind = if t < half {
                u.push(t.clone());
                IntervalKind::U
            } else {
                w.push(t.clone());
                IntervalKind::W
            };
            let index = match kind {
                IntervalKind::U => u.len(),
                IntervalKind::W => w.len(),
            };
            intervals.push(Plateau {
                kind,
                step,
                index,
                lo: &t - &half_width,
                hi: Some(&t + &half_width),
                value: previous.eval(&t),
            });
        }
        Ok(Self {
            step,
            a: a_q,
            u_levels: u,
            v_levels: Vec::new(),
            w_levels: w,
            u_gap,
            intervals,
        })
    }

    pub fn u_gap_f64(&self) -> f64 {
        to_f64(&self.u_gap)
    }

    pub fn summary(&self) -> LevelSummary {
        let conv = |v: &[Exact]| v.iter().map(to_f64).collect();
        LevelSummary {
            step: self.step,
            a: to_f64(&self.a),
            u_levels: conv(&self.u_levels),
            v_levels: conv(&self.v_levels),
            w_levels: conv(&self.w_levels),
            u_gap: to_f64(&self.u_gap),
            intervals: self.intervals.iter().map(IntervalView::from).collect(),
        }
    }
}

/// Step-1 levels of the distances from `x` to `candidates`, with
/// `a = d(x, y)`.
pub fn level_decomposition(
    space: &PointedMetricSpace,
    x: usize,
    y: usize,
    candidates: &PointSet,
) -> Result<LevelDecomposition> {
    space.check_index(x)?;
    space.check_index(y)?;
    if x == y {
        return Err(Error::Degenerate(format!("x = y = {x}")));
    }
    for c in candidates.iter() {
        space.check_index(c)?;
    }
    LevelDecomposition::first_step(space.d(x, y), candidates.iter().map(|c| space.d(x, c)))
}

/// The profile for one step: the step's intervals together with all
/// plateaus of `previous`.
pub fn build_phi(
    levels: &LevelDecomposition,
    previous: Option<&PiecewiseLinear>,
) -> Result<PiecewiseLinear> {
    if levels.u_gap <= Exact::zero() {
        return Err(Error::Construction("plateau width must be positive".into()));
    }
    let mut intervals = levels.intervals.clone();
    match (levels.step, previous) {
        (1, None) => {}
        (1, Some(_)) => {
            return Err(Error::InvalidParameter(
                "step 1 does not take a previous profile".into(),
            ))
        }
        (_, None) => {
            return Err(Error::InvalidParameter(format!(
                "step {} needs the previous profile",
                levels.step
            )))
        }
        (_, Some(prev)) => intervals.extend(prev.intervals().iter().cloned()),
    }
    PiecewiseLinear::from_intervals(intervals)
}
