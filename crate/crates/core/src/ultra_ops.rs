//! Ball partitions of ultrametric spaces and the finite-rank operators they
//! induce: `L` on functions (constant on blocks, zero off the horizon) and
//! its adjoint `R` on free vectors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::free_norm::{free_norm, FreeVector};
use crate::lipschitz::{lip_constant, LipFunction};
use crate::metric::{require_ultrametric, PointSet, PointedMetricSpace, BASE};

/// Partition of `B̄(0, horizon)` into closed balls of radius `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPartition {
    space: PointedMetricSpace,
    pub radius: f64,
    pub horizon: f64,
    /// Lowest index of each block, in increasing order. The first one is
    /// always the base point.
    pub representatives: Vec<usize>,
    /// Representative of each point; `None` for points outside the horizon.
    pub assignment: Vec<Option<usize>>,
}

pub fn ball_partition(space: &PointedMetricSpace, r: f64, n: f64) -> Result<BallPartition> {
    require_ultrametric(space)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "partition radius must be positive, got {r}"
        )));
    }
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be positive, got {n}"
        )));
    }
    let mut assignment = vec![None; space.len()];
    let mut representatives = Vec::new();
    let inside: Vec<usize> = space.points().filter(|&z| space.d(BASE, z) <= n).collect();
    for &z in &inside {
        if assignment[z].is_some() {
            continue;
        }
        representatives.push(z);
        for &w in &inside {
            if space.d(z, w) <= r {
                if let Some(other) = assignment[w] {
                    return Err(Error::Construction(format!(
                        "balls around {other} and {z} overlap at {w}"
                    )));
                }
                assignment[w] = Some(z);
            }
        }
    }
    Ok(BallPartition {
        space: space.clone(),
        radius: r,
        horizon: n,
        representatives,
        assignment,
    })
}

impl BallPartition {
    pub fn space(&self) -> &PointedMetricSpace {
        &self.space
    }

    pub fn representative(&self, z: usize) -> Option<usize> {
        self.assignment[z]
    }

    /// Blocks in representative order.
    pub fn blocks(&self) -> Vec<PointSet> {
        self.representatives
            .iter()
            .map(|&rep| {
                self.space
                    .points()
                    .filter(|&z| self.assignment[z] == Some(rep))
                    .collect()
            })
            .collect()
    }

    /// Points outside the horizon.
    pub fn outside(&self) -> PointSet {
        self.space
            .points()
            .filter(|&z| self.assignment[z].is_none())
            .collect()
    }

    pub fn classify(&self, z: usize, t: usize) -> PairCase {
        match (self.assignment[z], self.assignment[t]) {
            (Some(a), Some(b)) if a == b => PairCase::SameBlock,
            (Some(_), Some(_)) => PairCase::CrossBlock,
            (None, None) => PairCase::Outside,
            _ => PairCase::InsideOutside,
        }
    }
}

/// `L f`: the value at the block representative, zero off the horizon.
pub fn project_function(f: &LipFunction, p: &BallPartition) -> Result<LipFunction> {
    if f.space() != p.space() {
        return Err(Error::SpaceMismatch);
    }
    let values = p
        .assignment
        .iter()
        .map(|a| a.map_or(0.0, |rep| f.get(rep)))
        .collect();
    LipFunction::new(p.space(), values)
}

/// `R μ`: each mass moves to its representative; masses off the horizon
/// are dropped.
pub fn project_measure(mu: &FreeVector, p: &BallPartition) -> Result<FreeVector> {
    if mu.space() != p.space() {
        return Err(Error::SpaceMismatch);
    }
    FreeVector::from_masses(
        p.space(),
        mu.masses()
            .filter_map(|(z, a)| p.assignment[z].map(|rep| (rep, a))),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairCase {
    SameBlock,
    CrossBlock,
    InsideOutside,
    Outside,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionReport {
    pub functions: usize,
    /// Index in the input of the function with the largest ratio.
    pub extremal: Option<usize>,
    pub lip_in: f64,
    pub lip_out: f64,
    pub ratio: f64,
    /// Pair attaining `lip_out` and its case.
    pub witness: Option<(usize, usize)>,
    pub case: Option<PairCase>,
    pub pair_distance: Option<f64>,
}

pub const CONTRACTION_TOLERANCE: f64 = 1e-12;

impl ProjectionReport {
    pub fn contracts(&self) -> bool {
        self.ratio <= 1.0 + CONTRACTION_TOLERANCE
    }
}

pub fn contraction_certificate(p: &BallPartition, fs: &[LipFunction]) -> Result<ProjectionReport> {
    let mut report = ProjectionReport {
        functions: fs.len(),
        extremal: None,
        lip_in: 0.0,
        lip_out: 0.0,
        ratio: 0.0,
        witness: None,
        case: None,
        pair_distance: None,
    };
    for (i, f) in fs.iter().enumerate() {
        let out = project_function(f, p)?;
        let lin = lip_constant(f).value;
        let lout = lip_constant(&out);
        let ratio = if lout.value == 0.0 {
            0.0
        } else {
            lout.value / lin
        };
        if report.extremal.is_none() || ratio > report.ratio {
            report.extremal = Some(i);
            report.lip_in = lin;
            report.lip_out = lout.value;
            report.ratio = ratio;
            report.witness = lout.witness;
            report.case = lout.witness.map(|(z, t)| p.classify(z, t));
            report.pair_distance = lout.witness.map(|(z, t)| p.space().d(z, t));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub r: f64,
    pub n: f64,
    pub err: f64,
    /// `r` times the total variation of `μ`.
    pub bound: f64,
    /// Whether `μ` is supported in `B̄(0, n)`, the case the bound covers.
    pub supported: bool,
}

impl ConvergenceRow {
    pub fn within_bound(&self) -> bool {
        !self.supported || self.err <= self.bound * (1.0 + CONTRACTION_TOLERANCE) + 1e-12
    }
}

/// Whether `err` never increases along the rows. Holds on the coupled
/// schedule when all masses share a sign; signed vectors can break it.
pub fn nonincreasing(rows: &[ConvergenceRow]) -> bool {
    rows.windows(2)
        .all(|w| w[1].err <= w[0].err * (1.0 + CONTRACTION_TOLERANCE) + 1e-12)
}

/// `(1/n, n)` for `n = 1..=steps`.
pub fn coupled_schedule(steps: usize) -> Vec<(f64, f64)> {
    (1..=steps).map(|n| (1.0 / n as f64, n as f64)).collect()
}

/// `‖R μ - μ‖` for each `(r, n)` in the schedule.
pub fn convergence_experiment(
    space: &PointedMetricSpace,
    mu: &FreeVector,
    schedule: &[(f64, f64)],
) -> Result<Vec<ConvergenceRow>> {
    if mu.space() != space {
        return Err(Error::SpaceMismatch);
    }
    require_ultrametric(space)?;
    let variation = mu.variation();
    schedule
        .iter()
        .map(|&(r, n)| {
            let p = ball_partition(space, r, n)?;
            let moved = project_measure(mu, &p)?;
            let err = free_norm(&moved.sub(mu)?)?.value;
            Ok(ConvergenceRow {
                r,
                n,
                err,
                bound: r * variation,
                supported: mu.masses().all(|(z, _)| space.d(BASE, z) <= n),
            })
        })
        .collect()
}
