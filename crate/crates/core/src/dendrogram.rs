//! Binary merge trees and the ultrametrics they induce.
//!
//! Leaves are clusters `0..n`; merge step `i` creates cluster `n + i`. The
//! distance between two leaves is the height of the first merge that puts
//! them in the same cluster, which is automatically ultrametric.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::PointedMetricSpace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    leaves: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    /// Checks that the merges form a single binary tree over `leaves` with
    /// positive heights strictly increasing toward the root.
    pub fn new(leaves: usize, merges: Vec<Merge>) -> Result<Self> {
        if leaves == 0 {
            return Err(Error::Structure("dendrogram has no leaves".into()));
        }
        if merges.len() != leaves - 1 {
            return Err(Error::Structure(format!(
                "{leaves} leaves need {} merges, got {}",
                leaves - 1,
                merges.len()
            )));
        }
        let mut used = vec![false; 2 * leaves - 1];
        let mut height = vec![0.0; 2 * leaves - 1];
        for (step, m) in merges.iter().enumerate() {
            let id = leaves + step;
            for child in [m.left, m.right] {
                if child >= id {
                    return Err(Error::Structure(format!(
                        "merge {step} refers to cluster {child} before it exists"
                    )));
                }
                if used[child] {
                    return Err(Error::Structure(format!("cluster {child} is merged twice")));
                }
                used[child] = true;
            }
            if m.left == m.right {
                return Err(Error::Structure(format!(
                    "merge {step} joins a cluster with itself"
                )));
            }
            if !(m.height.is_finite() && m.height > 0.0) {
                return Err(Error::Structure(format!(
                    "merge {step} has non-positive height {}",
                    m.height
                )));
            }
            if m.height <= height[m.left] || m.height <= height[m.right] {
                return Err(Error::Structure(format!(
                    "merge {step} at height {} is not above its children",
                    m.height
                )));
            }
            height[id] = m.height;
        }
        Ok(Self { leaves, merges })
    }

    pub fn leaves(&self) -> usize {
        self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Lowest-common-ancestor heights as a row-major matrix.
    pub fn distances(&self) -> Vec<f64> {
        let n = self.leaves;
        let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let mut dist = vec![0.0; n * n];
        for m in &self.merges {
            let left = std::mem::take(&mut members[m.left]);
            let right = std::mem::take(&mut members[m.right]);
            for &i in &left {
                for &j in &right {
                    dist[i * n + j] = m.height;
                    dist[j * n + i] = m.height;
                }
            }
            members.push(left.into_iter().chain(right).collect());
        }
        dist
    }

    pub fn to_space(&self) -> PointedMetricSpace {
        PointedMetricSpace::from_flat(self.leaves, self.distances())
            .expect("dendrogram distances are finite and square")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{is_ultrametric, validate_metric};

    fn m(left: usize, right: usize, height: f64) -> Merge {
        Merge {
            left,
            right,
            height,
        }
    }

    #[test]
    fn u4_from_merges() {
        // leaves 0, a=1, b=2, c=3
        let d = Dendrogram::new(4, vec![m(1, 2, 1.0), m(4, 3, 2.0), m(0, 5, 4.0)]).unwrap();
        let space = d.to_space();
        assert_eq!(space.d(1, 2), 1.0);
        assert_eq!(space.d(1, 3), 2.0);
        assert_eq!(space.d(0, 3), 4.0);
        assert!(validate_metric(&space).valid);
        assert!(is_ultrametric(&space).holds);
    }

    #[test]
    fn rejects_bad_trees() {
        assert!(Dendrogram::new(3, vec![m(0, 1, 1.0)]).is_err());
        assert!(Dendrogram::new(3, vec![m(0, 1, 1.0), m(0, 2, 2.0)]).is_err());
        assert!(Dendrogram::new(3, vec![m(0, 1, 2.0), m(3, 2, 2.0)]).is_err());
        assert!(Dendrogram::new(3, vec![m(0, 1, 0.0), m(3, 2, 2.0)]).is_err());
        assert!(Dendrogram::new(3, vec![m(0, 4, 1.0), m(1, 2, 2.0)]).is_err());
        assert!(Dendrogram::new(1, vec![]).is_ok());
    }
}
