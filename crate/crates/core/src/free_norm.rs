//! Finitely supported elements of the Lipschitz-free space and their norm.
//!
//! The norm of a vector is the optimal transport cost of its balanced
//! version (excess mass parked at the base point). The transport dual is a
//! 1-Lipschitz potential attaining the norm, so every evaluation comes with
//! a primal plan, a dual function and their gap.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::solve_transport;
use crate::lipschitz::{lip_constant, LipFunction};
use crate::metric::{PointedMetricSpace, BASE};

/// Tolerance on the duality gap and on the Lipschitz constant of the
/// returned potential.
pub const DUAL_TOLERANCE: f64 = 1e-8;

/// A finite signed combination of point masses.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeVector {
    space: PointedMetricSpace,
    masses: BTreeMap<usize, f64>,
}

impl FreeVector {
    pub fn zero(space: &PointedMetricSpace) -> Self {
        Self {
            space: space.clone(),
            masses: BTreeMap::new(),
        }
    }

    /// The evaluation functional at `x`.
    pub fn delta(space: &PointedMetricSpace, x: usize) -> Result<Self> {
        Self::from_masses(space, [(x, 1.0)])
    }

    /// Sums repeated indices; exact zeros are dropped.
    pub fn from_masses(
        space: &PointedMetricSpace,
        masses: impl IntoIterator<Item = (usize, f64)>,
    ) -> Result<Self> {
        let mut v = Self::zero(space);
        for (i, a) in masses {
            space.check_index(i)?;
            if !a.is_finite() {
                return Err(Error::Structure(format!("mass at {i} is not finite")));
            }
            v.add_mass(i, a);
        }
        Ok(v)
    }

    fn add_mass(&mut self, i: usize, a: f64) {
        let m = self.masses.entry(i).or_insert(0.0);
        *m += a;
        if *m == 0.0 {
            self.masses.remove(&i);
        }
    }

    pub fn space(&self) -> &PointedMetricSpace {
        &self.space
    }

    /// Nonzero masses in index order.
    pub fn masses(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.masses.iter().map(|(&i, &a)| (i, a))
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses.get(&i).copied().unwrap_or(0.0)
    }

    pub fn support_len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_zero(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.values().sum()
    }

    /// Sum of absolute masses.
    pub fn variation(&self) -> f64 {
        self.masses.values().map(|a| a.abs()).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut v = Self::zero(&self.space);
        for (i, a) in self.masses() {
            v.add_mass(i, a * c);
        }
        v
    }

    pub fn add(&self, other: &FreeVector) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let mut v = self.clone();
        for (i, a) in other.masses() {
            v.add_mass(i, a);
        }
        Ok(v)
    }

    pub fn sub(&self, other: &FreeVector) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }
}

/// Places mass `-sum(a_i)` at the base point so the total mass is zero.
pub fn mass_balance(mu: &FreeVector) -> FreeVector {
    let total = mu.total_mass();
    let mut v = mu.clone();
    if total != 0.0 {
        v.add_mass(BASE, -total);
    }
    v
}

/// `sum(a_i * f(x_i))`.
pub fn evaluate(f: &LipFunction, mu: &FreeVector) -> Result<f64> {
    if f.space() != mu.space() {
        return Err(Error::SpaceMismatch);
    }
    Ok(mu.masses().map(|(i, a)| a * f.get(i)).sum())
}

/// `(δ_x - δ_y) / d(x, y)`, a vector of norm one.
pub fn pair_molecule(space: &PointedMetricSpace, x: usize, y: usize) -> Result<FreeVector> {
    space.check_index(x)?;
    space.check_index(y)?;
    if x == y {
        return Err(Error::Degenerate(format!(
            "molecule needs distinct points, got {x} twice"
        )));
    }
    let d = space.d(x, y);
    FreeVector::from_masses(space, [(x, 1.0 / d), (y, -1.0 / d)])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanEntry {
    pub source: usize,
    pub target: usize,
    pub flow: f64,
}

/// Primal plan and dual potential for one norm evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct NormCertificate {
    pub value: f64,
    pub plan: Vec<PlanEntry>,
    pub potential: LipFunction,
    /// `|plan cost - <balanced vector, potential>|`.
    pub gap: f64,
    /// Lipschitz constant of the potential.
    pub potential_lip: f64,
}

impl NormCertificate {
    /// Net outflow of the plan at every point.
    pub fn net_outflow(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.potential.space().len()];
        for e in &self.plan {
            out[e.source] += e.flow;
            out[e.target] -= e.flow;
        }
        out
    }
}

/// Exact free norm via min-cost flow, with dual certificate.
///
/// Fails with [`Error::Certificate`] if the gap or the potential's
/// Lipschitz constant exceeds [`DUAL_TOLERANCE`].
pub fn free_norm(mu: &FreeVector) -> Result<NormCertificate> {
    let space = mu.space();
    let balanced = mass_balance(mu);
    if balanced.is_zero() {
        return Ok(NormCertificate {
            value: 0.0,
            plan: Vec::new(),
            potential: LipFunction::zero(space),
            gap: 0.0,
            potential_lip: 0.0,
        });
    }
    let support: Vec<usize> = balanced.masses().map(|(i, _)| i).collect();
    let supply: Vec<f64> = balanced.masses().map(|(_, a)| a).collect();
    let cost = |i: usize, j: usize| space.d(support[i], support[j]);
    let solution = solve_transport(&supply, &cost);

    let plan = solution
        .flows
        .iter()
        .map(|&(i, j, flow)| PlanEntry {
            source: support[i],
            target: support[j],
            flow,
        })
        .collect();

    // McShane extension of the support potential to the whole space.
    let extended: Vec<f64> = space
        .points()
        .map(|z| {
            support
                .iter()
                .zip(&solution.dual)
                .map(|(&s, &f)| f + space.d(z, s))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let potential = LipFunction::recentered(space, extended)?;
    let dual_value = evaluate(&potential, &balanced)?;
    let gap = (solution.cost - dual_value).abs();
    let potential_lip = lip_constant(&potential).value;
    if gap > DUAL_TOLERANCE || potential_lip > 1.0 + DUAL_TOLERANCE {
        return Err(Error::Certificate(format!(
            "transport gap {gap:e}, potential Lipschitz constant {potential_lip}"
        )));
    }
    Ok(NormCertificate {
        value: solution.cost,
        plan,
        potential,
        gap,
        potential_lip,
    })
}
