//! Functions separating a pair of points exactly with controlled Lipschitz
//! constant and flat at small scales.
//!
//! Two constructions are provided:
//!
//! * [`ultrametric_separator`]: a scaled indicator of the open ball
//!   `B(x, a/2)`, 2-Lipschitz on any ultrametric space.
//! * [`proper_separator`]: `h = 2(φ(d(·,x)) − φ(d(0,x)))` where `φ` is a
//!   piecewise-linear profile refined step by step. Each step freezes the
//!   distances of a candidate set onto plateaus; the profile's slope grows
//!   by at most `1 + 1/(2^j − 1)` at step `j`.
//!
//! The profile is built in exact rational arithmetic so that the slope
//! bounds and the flatness claims are checked without rounding slack.

mod levels;
mod phi;

use num::One;
use serde::Serialize;

pub use levels::{build_phi, level_decomposition, LevelDecomposition, LevelSummary};
pub use phi::{exact, to_f64, Exact, IntervalKind, IntervalView, PiecewiseLinear, Plateau};

use crate::error::{Error, Result};
use crate::lipschitz::{lip_constant, LipFunction};
use crate::metric::{
    accumulation_kernel, closed_ball, open_ball, require_ultrametric, PointSet, PointedMetricSpace,
    BASE,
};

/// `2 ∏_{j>=1} (1 + 1/(2^j − 1))`, the limit of [`c_bound`].
pub const SEPARATION_CONSTANT: f64 = 6.925493238910127;

/// Absolute error bound on [`SEPARATION_CONSTANT`].
pub const SEPARATION_CONSTANT_ERROR: f64 = 1e-15;

/// `∏_{j=1}^{steps} (1 + 1/(2^j − 1))`, the slope bound of the step-`steps`
/// profile.
pub fn slope_bound_exact(steps: usize) -> Exact {
    (1..=steps).fold(Exact::one(), |acc, j| {
        let p = num::BigInt::one() << j;
        acc * Exact::new(p.clone(), p - 1)
    })
}

/// `2 ∏_{j=1}^{steps} (1 + 1/(2^j − 1))`.
pub fn c_bound(steps: usize) -> f64 {
    to_f64(&(slope_bound_exact(steps) * Exact::from_integer(2.into())))
}

/// Lower and upper bounds on the infinite product `2 ∏ (1 + 1/(2^j − 1))`
/// from the first `terms` factors. The tail `∏_{j>terms}(1 + 2^{1−j})` is
/// bounded by `exp(2^{1−terms})`.
pub fn separation_constant_bounds(terms: usize) -> (f64, f64) {
    let partial = c_bound(terms);
    let tail = (2f64.powi(1 - terms as i32)).exp();
    (partial, partial * tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparatorKind {
    Ultrametric,
    Proper,
}

/// Diagnostics of the step-wise construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub levels: Vec<LevelDecomposition>,
    /// Profile after each step.
    pub profiles: Vec<PiecewiseLinear>,
    /// `|C_k|` after each step.
    pub remaining: Vec<usize>,
    /// Points of the final pool whose distance to `x` equals a plateau
    /// endpoint exactly.
    pub endpoint_hits: Vec<usize>,
}

impl Construction {
    pub fn final_profile(&self) -> &PiecewiseLinear {
        self.profiles.last().expect("at least one step")
    }

    /// Exact largest slope of the profile after each step.
    pub fn step_slopes(&self) -> Vec<Exact> {
        self.profiles
            .iter()
            .map(PiecewiseLinear::max_slope)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorResult {
    pub kind: SeparatorKind,
    pub x: usize,
    pub y: usize,
    pub h: LipFunction,
    /// Certified upper bound on the Lipschitz constant of `h`.
    pub lip_bound: f64,
    /// `h(z) = h(t)` whenever `d(z,t) <= flat_radius` (or `<` when
    /// `flat_exclusive`).
    pub flat_radius: f64,
    pub flat_exclusive: bool,
    pub iterations: usize,
    pub c_bound: f64,
    pub construction: Option<Construction>,
}

/// Outcome of checking a [`SeparatorResult`] against its claims.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparatorCheck {
    pub base_value: f64,
    /// `||h(x) − h(y)| − d(x,y)|`.
    pub equality_residual: f64,
    pub lip: f64,
    pub lip_ok: bool,
    /// First pair within the flat radius where `h` differs, if any.
    pub flatness_violation: Option<(usize, usize)>,
}

impl SeparatorCheck {
    pub fn holds(&self, residual_tol: f64) -> bool {
        self.base_value == 0.0
            && self.equality_residual <= residual_tol
            && self.lip_ok
            && self.flatness_violation.is_none()
    }
}

impl SeparatorResult {
    /// Exhaustively verifies `h(0) = 0`, the separation identity, the
    /// Lipschitz bound and the flatness radius.
    pub fn check(&self) -> SeparatorCheck {
        let space = self.h.space();
        let h = self.h.values();
        let lip = lip_constant(&self.h).value;
        let flatness_violation = space.pairs().find(|&(z, t)| {
            let d = space.d(z, t);
            let within = if self.flat_exclusive {
                d < self.flat_radius
            } else {
                d <= self.flat_radius
            };
            within && h[z] != h[t]
        });
        SeparatorCheck {
            base_value: h[BASE],
            equality_residual: ((h[self.x] - h[self.y]).abs() - space.d(self.x, self.y)).abs(),
            lip,
            lip_ok: lip <= self.lip_bound + 1e-12 && self.lip_bound <= self.c_bound,
            flatness_violation,
        }
    }
}

fn check_pair(space: &PointedMetricSpace, x: usize, y: usize) -> Result<()> {
    space.check_index(x)?;
    space.check_index(y)?;
    if x == y {
        return Err(Error::Degenerate(format!(
            "cannot separate point {x} from itself"
        )));
    }
    Ok(())
}

/// `h(z) = a (1_{B(x,a/2)}(z) − 1_{B(x,a/2)}(0))` with `a = d(x,y)` and the
/// open ball.
pub fn ultrametric_separator(
    space: &PointedMetricSpace,
    x: usize,
    y: usize,
) -> Result<SeparatorResult> {
    check_pair(space, x, y)?;
    require_ultrametric(space)?;
    let a = space.d(x, y);
    let ball = open_ball(space, x, a / 2.0)?;
    let indicator = |z: usize| if ball.contains(z) { 1.0 } else { 0.0 };
    let values = space
        .points()
        .map(|z| a * (indicator(z) - indicator(BASE)))
        .collect();
    Ok(SeparatorResult {
        kind: SeparatorKind::Ultrametric,
        x,
        y,
        h: LipFunction::new(space, values)?,
        lip_bound: 2.0,
        flat_radius: a / 2.0,
        flat_exclusive: true,
        iterations: 0,
        c_bound: c_bound(0),
        construction: None,
    })
}

/// Scale at which candidate points are extracted at step `step`.
fn candidate_scale(a: f64, step: usize) -> f64 {
    a / 2f64.powi(step as i32 + 1)
}

/// Points of `pool` that accumulate at the step's scale, or the whole pool
/// when none do.
fn candidates(
    space: &PointedMetricSpace,
    pool: &PointSet,
    a: f64,
    step: usize,
) -> Result<PointSet> {
    let kernel = accumulation_kernel(space, pool, candidate_scale(a, step))?;
    Ok(if kernel.is_empty() {
        pool.clone()
    } else {
        kernel
    })
}

/// Iterative piecewise-linear separator for general finite spaces.
///
/// Runs until at most `stop_size` points remain off the plateaus. Each
/// step takes the candidate set from the current pool (the closed ball
/// `B̄(x, 3a/2)` first, then the points left on ramps) and freezes their
/// distances, so the pool shrinks strictly and the loop terminates.
pub fn proper_separator(
    space: &PointedMetricSpace,
    x: usize,
    y: usize,
    stop_size: usize,
) -> Result<SeparatorResult> {
    check_pair(space, x, y)?;
    let a = space.d(x, y);
    let dist_x: Vec<Exact> = space.row(x).iter().map(|&d| exact(d)).collect();

    let ball = closed_ball(space, x, 1.5 * a)?;
    let first = candidates(space, &ball, a, 1)?;
    let lv = LevelDecomposition::first_step(a, first.iter().map(|c| space.d(x, c)))?;
    let phi = build_phi(&lv, None)?;
    let mut pool: PointSet = space
        .points()
        .filter(|&z| !phi.in_plateau(&dist_x[z]))
        .collect();
    let mut closed_pool: PointSet = space
        .points()
        .filter(|&z| !phi.in_plateau_closure(&dist_x[z]))
        .collect();
    let mut construction = Construction {
        levels: vec![lv],
        profiles: vec![phi],
        remaining: vec![pool.len()],
        endpoint_hits: Vec::new(),
    };

    while pool.len() > stop_size {
        let step = construction.levels.len() + 1;
        let previous = construction.final_profile();
        let prev_gap = &construction.levels.last().expect("step 1 ran").u_gap;
        let cand = candidates(space, &pool, a, step)?;
        let lv = LevelDecomposition::refinement(
            step,
            a,
            prev_gap,
            previous,
            cand.iter().map(|c| space.d(x, c)),
        )?;
        let phi = build_phi(&lv, Some(previous))?;
        let in_new = |z: usize, closed: bool| {
            lv.intervals.iter().any(|p| {
                if closed {
                    p.closure_contains(&dist_x[z])
                } else {
                    p.contains(&dist_x[z])
                }
            })
        };
        let next: PointSet = pool.iter().filter(|&z| !in_new(z, false)).collect();
        closed_pool = pool.iter().filter(|&z| !in_new(z, true)).collect();
        if next.len() >= pool.len() {
            return Err(Error::Construction(format!(
                "step {step} did not shrink the pool of {} points",
                pool.len()
            )));
        }
        pool = next;
        construction.levels.push(lv);
        construction.profiles.push(phi);
        construction.remaining.push(pool.len());
    }

    let iterations = construction.levels.len();
    let phi = construction.final_profile().clone();
    let slope = phi.max_slope();
    if slope > slope_bound_exact(iterations) {
        return Err(Error::Construction(format!(
            "profile slope {} exceeds the step-{iterations} bound",
            to_f64(&slope)
        )));
    }
    construction.endpoint_hits = pool
        .iter()
        .filter(|&z| phi.plateaus().iter().any(|p| p.is_endpoint(&dist_x[z])))
        .collect();

    let two = Exact::from_integer(2.into());
    let at_base = phi.eval(&dist_x[BASE]);
    let values = space
        .points()
        .map(|z| to_f64(&(&two * (phi.eval(&dist_x[z]) - &at_base))))
        .collect();
    let h = LipFunction::new(space, values)?;

    let u_n = &construction.levels.last().expect("step 1 ran").u_gap;
    let mut radius = to_f64_down_half(u_n);
    if !pool.is_empty() {
        let sep = pool
            .iter()
            .flat_map(|z| pool.iter().filter(move |&t| t != z).map(move |t| (z, t)))
            .map(|(z, t)| space.d(z, t))
            .fold(f64::INFINITY, f64::min);
        let escape = closed_pool
            .iter()
            .flat_map(|z| {
                space
                    .points()
                    .filter(|&t| !pool.contains(t))
                    .map(move |t| space.d(z, t))
            })
            .fold(f64::INFINITY, f64::min);
        radius = radius.min(sep / 2.0).min(escape / 2.0);
    }

    Ok(SeparatorResult {
        kind: SeparatorKind::Proper,
        x,
        y,
        h,
        lip_bound: to_f64(&(two * slope)),
        flat_radius: radius,
        flat_exclusive: false,
        iterations,
        c_bound: c_bound(iterations),
        construction: Some(construction),
    })
}

fn to_f64_down_half(u: &Exact) -> f64 {
    phi::to_f64_down(&(u / Exact::from_integer(2.into())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSeparation {
    pub x: usize,
    pub y: usize,
    pub kind: SeparatorKind,
    pub lip_bound: f64,
    pub lip: f64,
    pub equality_residual: f64,
    pub flat_radius: f64,
    pub iterations: usize,
    pub c_bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    pub pairs: Vec<PairSeparation>,
    /// Largest `lip_bound` over the pairs.
    pub c: f64,
    /// Certified upper bound on the infinite-product constant.
    pub limit: f64,
    pub within_limit: bool,
    pub all_hold: bool,
}

/// Tolerance on `||h(x) − h(y)| − d(x,y)|`.
pub const EQUALITY_TOLERANCE: f64 = 1e-12;

/// Separates each pair with the ultrametric construction when the space is
/// ultrametric and the proper construction otherwise, and checks every
/// claim exhaustively.
pub fn separation_certificate(
    space: &PointedMetricSpace,
    pairs: &[(usize, usize)],
    stop_size: usize,
) -> Result<SeparationReport> {
    let ultra = require_ultrametric(space).is_ok();
    let mut out = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        let res = if ultra {
            ultrametric_separator(space, x, y)?
        } else {
            proper_separator(space, x, y, stop_size)?
        };
        let check = res.check();
        out.push(PairSeparation {
            x,
            y,
            kind: res.kind,
            lip_bound: res.lip_bound,
            lip: check.lip,
            equality_residual: check.equality_residual,
            flat_radius: res.flat_radius,
            iterations: res.iterations,
            c_bound: res.c_bound,
            holds: check.holds(EQUALITY_TOLERANCE),
        });
    }
    let c = out.iter().map(|p| p.lip_bound).fold(0.0, f64::max);
    let (_, limit) = separation_constant_bounds(64);
    Ok(SeparationReport {
        within_limit: c <= limit,
        all_hold: out.iter().all(|p| p.holds),
        pairs: out,
        c,
        limit,
    })
}

/// Every ordered pair of distinct points.
pub fn all_pairs(space: &PointedMetricSpace) -> Vec<(usize, usize)> {
    space
        .points()
        .flat_map(|x| space.points().filter(move |&y| y != x).map(move |y| (x, y)))
        .collect()
}
