//! Brute-force dual of the free norm.
//!
//! `‖μ‖ = max <μ, f>` over the polytope `{f(0) = 0, |f(x) - f(y)| <= d(x,y)}`.
//! Every vertex is pinned down by a spanning tree of tight constraints with
//! a sign per edge, so enumerating Prüfer sequences and sign vectors lists a
//! superset of the vertices; infeasible candidates are discarded.

use lipfree::metric::PointedMetricSpace;

pub struct DualOracle {
    pub vertices: Vec<Vec<f64>>,
}

fn prufer_edges(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&i| degree[i] == 1).unwrap();
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

fn spanning_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n == 2 {
        return vec![vec![(0, 1)]];
    }
    let len = n - 2;
    let total = n.pow(len as u32);
    (0..total)
        .map(|mut code| {
            let seq: Vec<usize> = (0..len)
                .map(|_| {
                    let s = code % n;
                    code /= n;
                    s
                })
                .collect();
            prufer_edges(&seq, n)
        })
        .collect()
}

impl DualOracle {
    pub fn new(space: &PointedMetricSpace) -> Self {
        let n = space.len();
        if n == 1 {
            return Self {
                vertices: vec![vec![0.0]],
            };
        }
        let mut vertices: Vec<Vec<f64>> = Vec::new();
        for edges in spanning_trees(n) {
            let mut adj = vec![Vec::new(); n];
            for &(a, b) in &edges {
                adj[a].push(b);
                adj[b].push(a);
            }
            for signs in 0u32..(1 << (n - 1)) {
                // orient edges away from the base point, one sign bit each
                let mut f = vec![f64::NAN; n];
                f[0] = 0.0;
                let mut stack = vec![0];
                let mut bit = 0;
                while let Some(v) = stack.pop() {
                    for &w in &adj[v] {
                        if f[w].is_nan() {
                            let s = if signs >> bit & 1 == 1 { 1.0 } else { -1.0 };
                            bit += 1;
                            f[w] = f[v] + s * space.d(v, w);
                            stack.push(w);
                        }
                    }
                }
                let feasible = space
                    .pairs()
                    .all(|(i, j)| (f[i] - f[j]).abs() <= space.d(i, j) + 1e-12);
                if feasible && !vertices.contains(&f) {
                    vertices.push(f);
                }
            }
        }
        Self { vertices }
    }

    /// `max <masses, f>` over the vertices.
    pub fn norm(&self, masses: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|f| f.iter().zip(masses).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Every integer mass vector in `[-3, 3]` on the non-base points, with zero
/// mass at the base.
pub fn integer_masses(n: usize) -> Vec<Vec<f64>> {
    let free = n.saturating_sub(1) as u32;
    (0..7usize.pow(free))
        .map(|mut code| {
            let mut m = vec![0.0; n];
            for slot in m.iter_mut().skip(1) {
                *slot = (code % 7) as f64 - 3.0;
                code /= 7;
            }
            m
        })
        .collect()
}

/// Spaces with at most five points: the hand fixtures plus seeded random
/// ones of each kind.
pub fn fixture_family() -> Vec<(String, PointedMetricSpace)> {
    use lipfree::generate::{random_line, random_plane, random_ultrametric};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let rows = |r: &[&[f64]]| {
        PointedMetricSpace::from_rows(&r.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    };
    let mut family = vec![
        ("single".to_string(), rows(&[&[0.0]])),
        (
            "pair".to_string(),
            PointedMetricSpace::from_line(&[0.0, 2.5]).unwrap(),
        ),
        (
            "l3".to_string(),
            PointedMetricSpace::from_line(&[0.0, 1.0, 3.0]).unwrap(),
        ),
        (
            "u4".to_string(),
            rows(&[
                &[0.0, 4.0, 4.0, 4.0],
                &[4.0, 0.0, 1.0, 2.0],
                &[4.0, 1.0, 0.0, 2.0],
                &[4.0, 2.0, 2.0, 0.0],
            ]),
        ),
        (
            "c4".to_string(),
            rows(&[
                &[0.0, 1.0, 2.0, 1.0],
                &[1.0, 0.0, 1.0, 2.0],
                &[2.0, 1.0, 0.0, 1.0],
                &[1.0, 2.0, 1.0, 0.0],
            ]),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..3 {
        family.push((format!("plane{i}"), random_plane(&mut rng, 5, 4.0)));
        family.push((format!("line{i}"), random_line(&mut rng, 5, 4.0)));
        family.push((format!("ultra{i}"), random_ultrametric(&mut rng, 5)));
    }
    family
}
