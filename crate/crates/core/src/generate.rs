//! Random instances for tests and experiments. Every generator takes the
//! RNG explicitly so runs are reproducible from a seed.

use rand::seq::index::sample;
use rand::Rng;

use crate::dendrogram::{Dendrogram, Merge};
use crate::free_norm::FreeVector;
use crate::lipschitz::LipFunction;
use crate::metric::PointedMetricSpace;

/// Random binary dendrogram over `leaves` points. Height increments are
/// multiples of 1/16 in `[1/16, 1]`, so all distances are exact doubles.
pub fn random_dendrogram<R: Rng + ?Sized>(rng: &mut R, leaves: usize) -> Dendrogram {
    assert!(leaves > 0, "dendrogram needs a leaf");
    let mut active: Vec<usize> = (0..leaves).collect();
    let mut merges = Vec::with_capacity(leaves - 1);
    let mut height = 0.0;
    for step in 0..leaves - 1 {
        height += rng.random_range(1..=16) as f64 / 16.0;
        let picked = sample(rng, active.len(), 2);
        let (i, j) = (picked.index(0), picked.index(1));
        let (left, right) = (active[i], active[j]);
        active.swap_remove(i.max(j));
        active.swap_remove(i.min(j));
        active.push(leaves + step);
        merges.push(Merge {
            left,
            right,
            height,
        });
    }
    Dendrogram::new(leaves, merges).expect("generated merges are valid")
}

pub fn random_ultrametric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PointedMetricSpace {
    random_dendrogram(rng, n).to_space()
}

/// `n` uniform points in `[0, scale)²`; the first one is the base point.
pub fn random_plane<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> PointedMetricSpace {
    loop {
        let points: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random::<f64>() * scale, rng.random::<f64>() * scale))
            .collect();
        if let Ok(space) = PointedMetricSpace::from_plane(&points) {
            return space;
        }
    }
}

/// `n` uniform points in `[0, scale)`; the first one is the base point.
pub fn random_line<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> PointedMetricSpace {
    loop {
        let coords: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * scale).collect();
        if let Ok(space) = PointedMetricSpace::from_line(&coords) {
            return space;
        }
    }
}

/// Values uniform in `[-diam, diam]`, zero at the base point.
pub fn random_function<R: Rng + ?Sized>(rng: &mut R, space: &PointedMetricSpace) -> LipFunction {
    let diam = space.diameter().max(1.0);
    let mut values: Vec<f64> = space
        .points()
        .map(|_| rng.random_range(-diam..=diam))
        .collect();
    values[0] = 0.0;
    LipFunction::new(space, values).expect("finite values")
}

/// Up to `support` masses uniform in `[-1, 1]` at random points of `pool`.
pub fn random_vector<R: Rng + ?Sized>(
    rng: &mut R,
    space: &PointedMetricSpace,
    pool: &[usize],
    support: usize,
) -> FreeVector {
    let k = support.min(pool.len());
    let masses: Vec<(usize, f64)> = sample(rng, pool.len(), k)
        .into_iter()
        .map(|i| (pool[i], rng.random_range(-1.0..=1.0)))
        .collect();
    FreeVector::from_masses(space, masses).expect("indices come from the space")
}
