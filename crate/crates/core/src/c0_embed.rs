//! Difference-quotient coordinates on dyadic nets of pairs.
//!
//! Ordered pairs are grouped into cells `C(j, k)`: `d(0, x1) <= 2^j` and
//! `2^k <= d(x1, x2) <= 2^(k+1)`. Each cell gets a greedy net of radius
//! `2^(k-3) ε` in the max metric on pairs, and `T f` lists the quotients of
//! `f` at the net entries. Then `‖T f‖∞ <= ‖f‖ <= (1 + ε) ‖T f‖∞`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lipschitz::{lip_constant, LipFunction};
use crate::metric::{PointedMetricSpace, BASE};

/// Slack allowed on both sandwich inequalities.
pub const SANDWICH_TOLERANCE: f64 = 1e-12;

pub type Pair = (usize, usize);
pub type CellKey = (u32, i32);

/// `max(d(x1, y1), d(x2, y2))`.
pub fn pair_distance(space: &PointedMetricSpace, x: Pair, y: Pair) -> f64 {
    space.d(x.0, y.0).max(space.d(x.1, y.1))
}

fn pow2(k: i32) -> f64 {
    2f64.powi(k)
}

/// Smallest `j >= 0` with `t <= 2^j`.
fn horizon_exponent(t: f64) -> u32 {
    let mut j = t.log2().ceil().max(0.0) as i32;
    while j > 0 && t <= pow2(j - 1) {
        j -= 1;
    }
    while t > pow2(j) {
        j += 1;
    }
    j as u32
}

/// Every `k` with `2^k <= d <= 2^(k+1)`, in increasing order. Two values
/// when `d` is a power of two.
fn scale_exponents(d: f64) -> Vec<i32> {
    let mut k = d.log2().floor() as i32;
    while pow2(k) > d {
        k -= 1;
    }
    while pow2(k + 1) <= d {
        k += 1;
    }
    if pow2(k) == d {
        vec![k - 1, k]
    } else {
        vec![k]
    }
}

/// Nonempty cells with their ordered pairs in lexicographic order.
pub fn build_pair_sets(space: &PointedMetricSpace) -> BTreeMap<CellKey, Vec<Pair>> {
    let j_max = space
        .points()
        .map(|z| horizon_exponent(space.d(BASE, z)))
        .max()
        .unwrap_or(0);
    let mut cells: BTreeMap<CellKey, Vec<Pair>> = BTreeMap::new();
    for x1 in space.points() {
        let j_min = horizon_exponent(space.d(BASE, x1));
        for x2 in space.points() {
            if x1 == x2 {
                continue;
            }
            for k in scale_exponents(space.d(x1, x2)) {
                for j in j_min..=j_max {
                    cells.entry((j, k)).or_default().push((x1, x2));
                }
            }
        }
    }
    cells
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )))
    }
}

pub fn net_radius(k: i32, epsilon: f64) -> f64 {
    pow2(k - 3) * epsilon
}

/// Greedy first-fit `2^(k-3) ε`-net of `pairs`, scanned in the given order.
pub fn build_net(
    space: &PointedMetricSpace,
    pairs: &[Pair],
    k: i32,
    epsilon: f64,
) -> Result<Vec<Pair>> {
    check_epsilon(epsilon)?;
    let radius = net_radius(k, epsilon);
    let mut kept: Vec<Pair> = Vec::new();
    for &p in pairs {
        if kept.iter().all(|&q| pair_distance(space, p, q) > radius) {
            kept.push(p);
        }
    }
    Ok(kept)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NetEntry {
    pub j: u32,
    pub k: i32,
    pub pair: Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CellSummary {
    pub j: u32,
    pub k: i32,
    pub pairs: usize,
    pub net_size: usize,
}

/// All nets, entries sorted by `(j, k, pair)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetIndex {
    space: PointedMetricSpace,
    pub epsilon: f64,
    pub entries: Vec<NetEntry>,
    cells: BTreeMap<CellKey, Vec<Pair>>,
    /// Range of `entries` for each cell.
    spans: BTreeMap<CellKey, std::ops::Range<usize>>,
}

pub fn build_net_index(space: &PointedMetricSpace, epsilon: f64) -> Result<NetIndex> {
    check_epsilon(epsilon)?;
    let cells = build_pair_sets(space);
    let mut entries = Vec::new();
    let mut spans = BTreeMap::new();
    for (&(j, k), pairs) in &cells {
        let start = entries.len();
        for pair in build_net(space, pairs, k, epsilon)? {
            entries.push(NetEntry { j, k, pair });
        }
        spans.insert((j, k), start..entries.len());
    }
    Ok(NetIndex {
        space: space.clone(),
        epsilon,
        entries,
        cells,
        spans,
    })
}

impl NetIndex {
    pub fn space(&self) -> &PointedMetricSpace {
        &self.space
    }

    pub fn cells(&self) -> &BTreeMap<CellKey, Vec<Pair>> {
        &self.cells
    }

    pub fn cell_entries(&self, key: CellKey) -> &[NetEntry] {
        self.spans
            .get(&key)
            .map_or(&[], |r| &self.entries[r.clone()])
    }

    pub fn summary(&self) -> Vec<CellSummary> {
        self.cells
            .iter()
            .map(|(&(j, k), pairs)| CellSummary {
                j,
                k,
                pairs: pairs.len(),
                net_size: self.cell_entries((j, k)).len(),
            })
            .collect()
    }

    /// First cell containing `pair`.
    pub fn cell_of(&self, pair: Pair) -> Option<CellKey> {
        let (x1, x2) = pair;
        if x1 == x2 {
            return None;
        }
        let j = horizon_exponent(self.space.d(BASE, x1));
        let k = scale_exponents(self.space.d(x1, x2))[0];
        self.cells.contains_key(&(j, k)).then_some((j, k))
    }

    /// Closest entry of the cell to `pair`; ties go to the earlier entry.
    pub fn nearest_entry(&self, key: CellKey, pair: Pair) -> Option<(NetEntry, f64)> {
        self.cell_entries(key)
            .iter()
            .map(|&e| (e, pair_distance(&self.space, e.pair, pair)))
            .fold(None, |best, cur| match best {
                Some((_, d)) if d <= cur.1 => best,
                _ => Some(cur),
            })
    }
}

/// `T f`: one quotient per entry.
pub fn embed(f: &LipFunction, net: &NetIndex) -> Result<Vec<f64>> {
    if f.space() != net.space() {
        return Err(Error::SpaceMismatch);
    }
    Ok(net
        .entries
        .iter()
        .map(|e| f.quotient(e.pair.0, e.pair.1))
        .collect())
}

/// The estimate behind the upper inequality, replayed for the pair that
/// attains the Lipschitz constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichChain {
    /// Attaining pair, oriented so `f(y1) >= f(y2)`.
    pub witness: Pair,
    pub j: u32,
    pub k: i32,
    pub entry: Pair,
    /// Max-metric distance from the witness to the entry.
    pub offset: f64,
    pub radius: f64,
    pub witness_distance: f64,
    pub entry_distance: f64,
    /// `|f(x1) - f(x2)|` and its lower bound `‖f‖ (d(y) - 2 offset)`.
    pub numerator: f64,
    pub numerator_bound: f64,
    /// `|T f|` at the entry and its lower bound `‖f‖ (1 - ε/4) / (1 + ε/4)`.
    pub coordinate: f64,
    pub coordinate_bound: f64,
    /// `d(y) >= d(x) (1 - ε/4)`.
    pub geometric_ok: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellMax {
    pub j: u32,
    pub k: i32,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub epsilon: f64,
    pub sup_norm: f64,
    pub lip: f64,
    /// `lip - sup_norm`.
    pub lower_slack: f64,
    /// `(1 + ε) sup_norm - lip`.
    pub upper_slack: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub chain: Option<SandwichChain>,
    pub cell_max: Vec<CellMax>,
}

impl EmbeddingReport {
    pub fn holds(&self) -> bool {
        self.lower_ok && self.upper_ok && self.chain.as_ref().is_none_or(|c| c.holds)
    }
}

pub fn verify_sandwich(f: &LipFunction, net: &NetIndex) -> Result<EmbeddingReport> {
    let coords = embed(f, net)?;
    let eps = net.epsilon;
    let sup_norm = coords.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let lip = lip_constant(f);
    let lower_slack = lip.value - sup_norm;
    let upper_slack = (1.0 + eps) * sup_norm - lip.value;

    let mut cell_max: Vec<CellMax> = Vec::new();
    for (e, c) in net.entries.iter().zip(&coords) {
        match cell_max.last_mut() {
            Some(m) if (m.j, m.k) == (e.j, e.k) => m.max_abs = m.max_abs.max(c.abs()),
            _ => cell_max.push(CellMax {
                j: e.j,
                k: e.k,
                max_abs: c.abs(),
            }),
        }
    }

    let chain = match lip.witness {
        Some((a, b)) if lip.value > 0.0 => Some(replay_chain(f, net, lip.value, (a, b))?),
        _ => None,
    };

    Ok(EmbeddingReport {
        epsilon: eps,
        sup_norm,
        lip: lip.value,
        lower_slack,
        upper_slack,
        lower_ok: lower_slack >= -SANDWICH_TOLERANCE,
        upper_ok: upper_slack >= -SANDWICH_TOLERANCE,
        chain,
        cell_max,
    })
}

fn replay_chain(f: &LipFunction, net: &NetIndex, lip: f64, (a, b): Pair) -> Result<SandwichChain> {
    let space = net.space();
    let eps = net.epsilon;
    let witness = if f.get(a) >= f.get(b) { (a, b) } else { (b, a) };
    let (j, k) = net
        .cell_of(witness)
        .ok_or_else(|| Error::Construction(format!("pair {witness:?} is in no cell")))?;
    let (entry, offset) = net
        .nearest_entry((j, k), witness)
        .ok_or_else(|| Error::Construction(format!("cell ({j}, {k}) has an empty net")))?;
    let (x1, x2) = entry.pair;
    let witness_distance = space.d(witness.0, witness.1);
    let entry_distance = space.d(x1, x2);
    let numerator = (f.get(x1) - f.get(x2)).abs();
    let numerator_bound = lip * (witness_distance - 2.0 * offset);
    let coordinate = numerator / entry_distance;
    let coordinate_bound = lip * (1.0 - eps / 4.0) / (1.0 + eps / 4.0);
    let geometric_ok = geometric_holds(witness_distance, entry_distance, eps);
    let tol = SANDWICH_TOLERANCE * lip.max(1.0);
    let radius = net_radius(k, eps);
    let holds = offset <= radius
        && geometric_ok
        && numerator >= numerator_bound - tol * witness_distance
        && coordinate >= coordinate_bound - tol
        && (1.0 + eps) * coordinate >= lip - tol;
    Ok(SandwichChain {
        witness,
        j,
        k,
        entry: entry.pair,
        offset,
        radius,
        witness_distance,
        entry_distance,
        numerator,
        numerator_bound,
        coordinate,
        coordinate_bound,
        geometric_ok,
        holds,
    })
}

fn geometric_holds(member: f64, entry: f64, eps: f64) -> bool {
    member >= entry * (1.0 - eps / 4.0) - SANDWICH_TOLERANCE * entry
}

/// Net soundness and the geometric inequality over every member of every
/// cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetCheck {
    pub members: usize,
    /// Members farther than the radius from every entry of their cell.
    pub uncovered: usize,
    /// Members violating `d(y) >= d(x) (1 - ε/4)` against their nearest entry.
    pub geometric_failures: usize,
    /// Smallest `d(y) - d(x) (1 - ε/4)`.
    pub worst_geometric_slack: f64,
}

impl NetCheck {
    pub fn holds(&self) -> bool {
        self.uncovered == 0 && self.geometric_failures == 0
    }
}

pub fn check_net(net: &NetIndex) -> NetCheck {
    let space = net.space();
    let eps = net.epsilon;
    let mut check = NetCheck {
        members: 0,
        uncovered: 0,
        geometric_failures: 0,
        worst_geometric_slack: f64::INFINITY,
    };
    for (&(j, k), pairs) in net.cells() {
        let radius = net_radius(k, eps);
        for &y in pairs {
            check.members += 1;
            let Some((entry, offset)) = net.nearest_entry((j, k), y) else {
                check.uncovered += 1;
                continue;
            };
            if offset > radius {
                check.uncovered += 1;
            }
            let dy = space.d(y.0, y.1);
            let dx = space.d(entry.pair.0, entry.pair.1);
            let slack = dy - dx * (1.0 - eps / 4.0);
            check.worst_geometric_slack = check.worst_geometric_slack.min(slack);
            if !geometric_holds(dy, dx, eps) {
                check.geometric_failures += 1;
            }
        }
    }
    check
}
