//! Concrete tree carriers with exact distances.
//!
//! Everything downstream talks to a [`TreeSpace`]: finite metric trees,
//! the rational line, and the lazily expanded free-group Cayley tree.

mod free;
mod lazy;
mod line;
mod metric;
mod simplicial;

use std::collections::BTreeSet;
use std::fmt::Debug;
use std::hash::Hash;

use thiserror::Error;

use crate::pretree_core::FinitePretree;
use crate::rational::Q;

pub use free::{F2Tree, Letter, Word};
pub use lazy::{materialize_ball, LazyTree, Spider};
pub use line::{line_order_compare, LineModel, LineSubset, RationalLine};
pub use metric::{MetricTree, TreePoint};
pub use simplicial::{on_edge as simplicial_on_edge, Pt, SimplicialTree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("duplicate vertex {0}")]
    DuplicateVertex(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("edge length must be positive: {0}")]
    NonPositiveLength(String),
    #[error("graph is not a tree: {0}")]
    NotATree(String),
    #[error("malformed tree point: {0}")]
    BadPoint(String),
    #[error("radius {radius} exceeds bound {bound}")]
    RadiusOverBound { radius: usize, bound: usize },
}

/// Exact tree geometry: distances and medians.
pub trait TreeSpace {
    type P: Clone + Ord + Hash + Debug;

    fn dist(&self, a: &Self::P, b: &Self::P) -> Q;

    /// The point at distance `s` from `x` on `[x, y]`; `s` is clamped to
    /// `[0, d(x, y)]`.
    fn towards(&self, x: &Self::P, y: &Self::P, s: &Q) -> Self::P;

    /// The centre of the tripod spanned by `x, y, z`.
    fn median(&self, x: &Self::P, y: &Self::P, z: &Self::P) -> Self::P {
        self.towards(x, y, &gromov_product(self, x, y, z))
    }

    fn label(&self, p: &Self::P) -> String;

    /// `w ∈ [x, y]`.
    fn in_segment(&self, w: &Self::P, x: &Self::P, y: &Self::P) -> bool {
        self.dist(x, w) + self.dist(w, y) == self.dist(x, y)
    }

    /// `y` strictly between `x` and `z`.
    fn between(&self, y: &Self::P, x: &Self::P, z: &Self::P) -> bool {
        y != x && y != z && self.in_segment(y, x, z)
    }
}

/// Betweenness induced on a finite sample; points keep their sample index.
pub fn as_pretree<S: TreeSpace>(space: &S, sample: &[S::P]) -> FinitePretree {
    let n = sample.len();
    let d: Vec<Vec<Q>> = sample
        .iter()
        .map(|a| sample.iter().map(|b| space.dist(a, b)).collect())
        .collect();
    FinitePretree::from_fn(n.max(1), |y, x, z| {
        n > 0 && y != x && y != z && sample[x] != sample[y] && sample[y] != sample[z]
            && &d[x][y] + &d[y][z] == d[x][z]
    })
    .expect("nonempty")
}

/// Least median-stable superset of `seed`, computed with exact medians.
pub fn median_closure_in<S: TreeSpace>(space: &S, seed: &[S::P]) -> Vec<S::P> {
    let mut seen: BTreeSet<S::P> = BTreeSet::new();
    let mut all: Vec<S::P> = Vec::new();
    for p in seed {
        if seen.insert(p.clone()) {
            all.push(p.clone());
        }
    }
    // Each round visits the triples i < j < k whose largest index is new.
    let mut old = 0;
    while old < all.len() {
        let len = all.len();
        let mut added = Vec::new();
        for k in old..len {
            for j in 0..k {
                for i in 0..j {
                    let m = space.median(&all[i], &all[j], &all[k]);
                    if !seen.contains(&m) {
                        seen.insert(m.clone());
                        added.push(m);
                    }
                }
            }
        }
        old = len;
        all.extend(added);
    }
    seen.into_iter().collect()
}

/// Gate of `from` in a convex sample `set`, by repeated medians.
pub fn project_onto<S: TreeSpace>(space: &S, from: &S::P, set: &[S::P]) -> Option<S::P> {
    let mut it = set.iter();
    let mut t = it.next()?.clone();
    for w in it {
        t = space.median(from, &t, w);
    }
    Some(t)
}

/// Bridge endpoints between two disjoint convex samples.
pub fn bridge_in<S: TreeSpace>(space: &S, a: &[S::P], b: &[S::P]) -> Option<(S::P, S::P)> {
    let t = project_onto(space, b.first()?, a)?;
    let q = project_onto(space, &t, b)?;
    Some((t, q))
}

/// `(y | z)_x`, the distance from `x` to the median of `x, y, z`.
pub fn gromov_product<S: TreeSpace + ?Sized>(space: &S, x: &S::P, y: &S::P, z: &S::P) -> Q {
    (space.dist(x, y) + space.dist(x, z) - space.dist(y, z)) / crate::rational::q(2)
}
