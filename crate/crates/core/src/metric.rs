//! Finite pointed metric spaces.
//!
//! A [`PointedMetricSpace`] is a dense symmetric distance matrix whose row 0
//! is the base point. Construction only checks the matrix shape; the metric
//! axioms are checked separately by [`validate_metric`] so that malformed
//! inputs can still be reported on.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance applied to identity, symmetry and triangle slacks.
pub const METRIC_TOLERANCE: f64 = 1e-9;

/// Index of the distinguished base point.
pub const BASE: usize = 0;

#[derive(Debug, PartialEq)]
struct SpaceData {
    n: usize,
    dist: Vec<f64>,
    labels: Option<Vec<String>>,
}

/// A finite metric space with base point at index 0.
///
/// Cloning is cheap; the matrix is shared.
#[derive(Clone)]
pub struct PointedMetricSpace {
    data: Arc<SpaceData>,
}

impl PartialEq for PointedMetricSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data)
            || (self.data.n == other.data.n && self.data.dist == other.data.dist)
    }
}

impl fmt::Debug for PointedMetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointedMetricSpace")
            .field("n", &self.data.n)
            .field("labels", &self.data.labels)
            .finish_non_exhaustive()
    }
}

impl PointedMetricSpace {
    /// Builds a space from square rows. Only the shape and finiteness are
    /// checked here.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Structure("a space needs at least one point".into()));
        }
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Structure(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            dist.extend_from_slice(row);
        }
        Self::from_flat(n, dist)
    }

    /// Builds a space from a row-major `n * n` matrix.
    pub fn from_flat(n: usize, dist: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structure("a space needs at least one point".into()));
        }
        if dist.len() != n * n {
            return Err(Error::Structure(format!(
                "expected {} entries for {n} points, got {}",
                n * n,
                dist.len()
            )));
        }
        if let Some(pos) = dist.iter().position(|d| !d.is_finite()) {
            return Err(Error::Structure(format!(
                "entry ({}, {}) is not finite",
                pos / n,
                pos % n
            )));
        }
        Ok(Self {
            data: Arc::new(SpaceData {
                n,
                dist,
                labels: None,
            }),
        })
    }

    /// Points on the real line with absolute-difference distance. The first
    /// coordinate becomes the base point.
    pub fn from_line(coords: &[f64]) -> Result<Self> {
        let n = coords.len();
        let dist = coords
            .iter()
            .flat_map(|a| coords.iter().map(move |b| (a - b).abs()))
            .collect();
        Self::from_flat(n, dist)
    }

    /// Points in the plane with Euclidean distance.
    pub fn from_plane(points: &[(f64, f64)]) -> Result<Self> {
        let n = points.len();
        let dist = points
            .iter()
            .flat_map(|a| points.iter().map(move |b| (a.0 - b.0).hypot(a.1 - b.1)))
            .collect();
        Self::from_flat(n, dist)
    }

    /// Attaches point names. The label count must match the point count.
    pub fn with_labels(self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.data.n {
            return Err(Error::Structure(format!(
                "{} labels for {} points",
                labels.len(),
                self.data.n
            )));
        }
        Ok(Self {
            data: Arc::new(SpaceData {
                n: self.data.n,
                dist: self.data.dist.clone(),
                labels: Some(labels),
            }),
        })
    }

    pub fn len(&self) -> usize {
        self.data.n
    }

    /// Always false; a space has at least the base point.
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.data.dist[i * self.data.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.data.n;
        &self.data.dist[i * n..(i + 1) * n]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.data.labels.as_deref()
    }

    /// Label of point `i`, falling back to its index.
    pub fn label(&self, i: usize) -> String {
        match &self.data.labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        }
    }

    /// Looks a point up by label (or by decimal index when unlabeled).
    pub fn index_of(&self, label: &str) -> Option<usize> {
        match &self.data.labels {
            Some(l) => l.iter().position(|s| s == label),
            None => label.parse().ok().filter(|&i| i < self.data.n),
        }
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.data.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                n: self.data.n,
            })
        }
    }

    pub fn points(&self) -> std::ops::Range<usize> {
        0..self.data.n
    }

    /// Unordered pairs `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.data.n;
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }

    pub fn diameter(&self) -> f64 {
        self.data.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Largest distance from the base point.
    pub fn radius(&self) -> f64 {
        self.row(BASE).iter().copied().fold(0.0, f64::max)
    }

    /// Smallest distance between distinct points, if any.
    pub fn min_positive_distance(&self) -> Option<f64> {
        self.pairs()
            .map(|(i, j)| self.d(i, j))
            .filter(|&d| d > 0.0)
            .min_by(f64::total_cmp)
    }

    /// Sorted, deduplicated distances between distinct points.
    pub fn distinct_distances(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .pairs()
            .map(|(i, j)| self.d(i, j))
            .filter(|&d| d > 0.0)
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// The full distance matrix as rows.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.points().map(|i| self.row(i).to_vec()).collect()
    }
}

/// A sorted, duplicate-free set of point indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct PointSet {
    indices: Vec<usize>,
}

impl PointSet {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn all(space: &PointedMetricSpace) -> Self {
        Self {
            indices: space.points().collect(),
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        PointSet::new(self.iter().chain(other.iter()).collect())
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        PointSet {
            indices: self.iter().filter(|&i| !other.contains(i)).collect(),
        }
    }

    fn check(&self, space: &PointedMetricSpace) -> Result<()> {
        self.iter().try_for_each(|i| space.check_index(i))
    }
}

impl FromIterator<usize> for PointSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        PointSet::new(iter.into_iter().collect())
    }
}

/// One failed metric axiom.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `d(i,i) != 0`.
    Identity { i: usize, value: f64 },
    /// `d(i,j) != d(j,i)`.
    Symmetry { i: usize, j: usize, slack: f64 },
    /// `d(i,j) <= 0` for distinct points.
    Separation { i: usize, j: usize, value: f64 },
    /// `d(i,k) > d(i,j) + d(j,k)`; `slack` is the excess.
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        slack: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationReport {
    pub valid: bool,
    pub witnesses: Vec<Violation>,
}

/// Checks identity, symmetry, separation and every triangle inequality.
pub fn validate_metric(space: &PointedMetricSpace) -> ViolationReport {
    let n = space.len();
    let tol = METRIC_TOLERANCE;
    let mut witnesses = Vec::new();
    for i in 0..n {
        let v = space.d(i, i);
        if v.abs() > tol {
            witnesses.push(Violation::Identity { i, value: v });
        }
    }
    for (i, j) in space.pairs() {
        let slack = (space.d(i, j) - space.d(j, i)).abs();
        if slack > tol {
            witnesses.push(Violation::Symmetry { i, j, slack });
        }
        let v = space.d(i, j).min(space.d(j, i));
        if v <= 0.0 {
            witnesses.push(Violation::Separation { i, j, value: v });
        }
    }
    for i in 0..n {
        for k in i + 1..n {
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let slack = space.d(i, k) - (space.d(i, j) + space.d(j, k));
                if slack > tol {
                    witnesses.push(Violation::Triangle { i, j, k, slack });
                }
            }
        }
    }
    ViolationReport {
        valid: witnesses.is_empty(),
        witnesses,
    }
}

/// A triple `(x, y, z)` with `d(x,z) > max(d(x,y), d(y,z))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripleWitness {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UltrametricCheck {
    pub holds: bool,
    pub witness: Option<TripleWitness>,
}

/// Strong triangle inequality on every triple; returns the first violation
/// in lexicographic `(x, z, y)` order.
pub fn is_ultrametric(space: &PointedMetricSpace) -> UltrametricCheck {
    let n = space.len();
    for x in 0..n {
        for z in x + 1..n {
            for y in 0..n {
                if y == x || y == z {
                    continue;
                }
                let slack = space.d(x, z) - space.d(x, y).max(space.d(y, z));
                if slack > METRIC_TOLERANCE {
                    return UltrametricCheck {
                        holds: false,
                        witness: Some(TripleWitness { x, y, z, slack }),
                    };
                }
            }
        }
    }
    UltrametricCheck {
        holds: true,
        witness: None,
    }
}

/// Errors with [`Error::NotUltrametric`] unless the strong triangle
/// inequality holds.
pub fn require_ultrametric(space: &PointedMetricSpace) -> Result<()> {
    match is_ultrametric(space).witness {
        None => Ok(()),
        Some(w) => Err(Error::NotUltrametric {
            x: w.x,
            y: w.y,
            z: w.z,
            dxz: space.d(w.x, w.z),
            slack: w.slack,
        }),
    }
}

/// A quadruple violating `d(x,y)+d(z,t) <= max(d(x,z)+d(y,t), d(x,t)+d(y,z))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadrupleWitness {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub t: usize,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourPointCheck {
    pub holds: bool,
    pub witness: Option<QuadrupleWitness>,
}

/// Buneman's four-point condition over all ordered quadruples of distinct
/// points. Quadruples with a repeated point satisfy it by the triangle
/// inequality.
pub fn four_point_property(space: &PointedMetricSpace) -> FourPointCheck {
    let n = space.len();
    let d = |a, b| space.d(a, b);
    for x in 0..n {
        for y in 0..n {
            if y == x {
                continue;
            }
            for z in 0..n {
                if z == x || z == y {
                    continue;
                }
                for t in 0..n {
                    if t == x || t == y || t == z {
                        continue;
                    }
                    let lhs = d(x, y) + d(z, t);
                    let rhs = (d(x, z) + d(y, t)).max(d(x, t) + d(y, z));
                    if lhs - rhs > METRIC_TOLERANCE {
                        return FourPointCheck {
                            holds: false,
                            witness: Some(QuadrupleWitness {
                                x,
                                y,
                                z,
                                t,
                                slack: lhs - rhs,
                            }),
                        };
                    }
                }
            }
        }
    }
    FourPointCheck {
        holds: true,
        witness: None,
    }
}

/// `{y : d(center, y) <= r}`.
pub fn closed_ball(space: &PointedMetricSpace, center: usize, r: f64) -> Result<PointSet> {
    space.check_index(center)?;
    if r.is_nan() || r < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "closed ball radius must be >= 0, got {r}"
        )));
    }
    Ok(space
        .points()
        .filter(|&y| space.d(center, y) <= r)
        .collect())
}

/// `{y : d(center, y) < r}`.
pub fn open_ball(space: &PointedMetricSpace, center: usize, r: f64) -> Result<PointSet> {
    space.check_index(center)?;
    if r.is_nan() || r <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "open ball radius must be > 0, got {r}"
        )));
    }
    Ok(space.points().filter(|&y| space.d(center, y) < r).collect())
}

/// `(B̄(0, 2^(N+1)) \ B(0, 2^(-N-1))) ∪ {0}`.
pub fn annulus(space: &PointedMetricSpace, level: u32) -> PointSet {
    let outer = 2f64.powi(level as i32 + 1);
    let inner = 2f64.powi(-(level as i32) - 1);
    space
        .points()
        .filter(|&y| {
            let r = space.d(BASE, y);
            y == BASE || (inner <= r && r <= outer)
        })
        .collect()
}

/// Points of `subset` that have another point of `subset` strictly closer
/// than `delta`.
///
/// This is the scale-`delta` stand-in for taking accumulation points: on a
/// finite set the true derived set is empty.
pub fn accumulation_derivative(
    space: &PointedMetricSpace,
    subset: &PointSet,
    delta: f64,
) -> Result<PointSet> {
    subset.check(space)?;
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "accumulation scale must be > 0, got {delta}"
        )));
    }
    Ok(subset
        .iter()
        .filter(|&x| subset.iter().any(|y| y != x && space.d(x, y) < delta))
        .collect())
}

/// Iterates [`accumulation_derivative`] at a fixed scale until nothing
/// changes.
pub fn accumulation_kernel(
    space: &PointedMetricSpace,
    subset: &PointSet,
    delta: f64,
) -> Result<PointSet> {
    let mut current = subset.clone();
    loop {
        let next = accumulation_derivative(space, &current, delta)?;
        if next == current {
            return Ok(current);
        }
        current = next;
    }
}

/// The induced subspace on `subset`, which must contain the base point.
/// Index order follows `subset`, so the base point stays at index 0.
pub fn restrict(space: &PointedMetricSpace, subset: &PointSet) -> Result<PointedMetricSpace> {
    subset.check(space)?;
    if !subset.contains(BASE) {
        return Err(Error::BaseMissing);
    }
    let idx = subset.as_slice();
    let m = idx.len();
    let dist = idx
        .iter()
        .flat_map(|&i| idx.iter().map(move |&j| space.d(i, j)))
        .collect();
    let sub = PointedMetricSpace::from_flat(m, dist)?;
    match space.labels() {
        Some(labels) => sub.with_labels(idx.iter().map(|&i| labels[i].clone()).collect()),
        None => Ok(sub),
    }
}
