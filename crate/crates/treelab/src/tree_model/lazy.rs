//! Lazily expanded infinite trees and their finite balls.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Debug;
use std::hash::Hash;

use super::metric::MetricTree;
use super::simplicial::{simplicial_space, SimplicialTree};
use super::TreeError;
use crate::rational::Q;

pub trait LazyTree {
    type V: Clone + Ord + Hash + Debug;

    fn root(&self) -> Self::V;

    /// Neighbours in a fixed order; expansion must be deterministic.
    fn neighbors(&self, v: &Self::V) -> Vec<Self::V>;

    fn vlabel(&self, v: &Self::V) -> String;

    fn radius_bound(&self) -> usize;
}

/// The ball of hop radius `radius` around `center`, as a unit-length
/// [`MetricTree`], together with the vertex behind each tree index.
pub fn materialize_ball<L: LazyTree>(
    lazy: &L,
    center: &L::V,
    radius: usize,
) -> Result<(MetricTree, Vec<L::V>), TreeError> {
    if radius > lazy.radius_bound() {
        return Err(TreeError::RadiusOverBound { radius, bound: lazy.radius_bound() });
    }
    let mut index: BTreeMap<L::V, usize> = BTreeMap::new();
    let mut verts = vec![center.clone()];
    let mut depth = vec![0usize];
    index.insert(center.clone(), 0);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        if depth[i] == radius {
            continue;
        }
        let v = verts[i].clone();
        for w in lazy.neighbors(&v) {
            if index.contains_key(&w) {
                continue;
            }
            let j = verts.len();
            index.insert(w.clone(), j);
            verts.push(w);
            depth.push(depth[i] + 1);
            edges.push((i, j, Q::from_integer(1.into())));
            queue.push_back(j);
        }
    }
    let labels = verts.iter().map(|v| lazy.vlabel(v)).collect();
    Ok((MetricTree::new(labels, edges)?, verts))
}

/// A star with `legs` infinite rays; vertex `(leg, depth)`, centre `(0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Spider {
    pub legs: u32,
    pub radius_bound: usize,
}

impl Spider {
    pub fn new(legs: u32, radius_bound: usize) -> Self {
        Spider { legs, radius_bound }
    }

    pub fn center() -> (u32, u64) {
        (0, 0)
    }

    /// Canonical vertex: depth 0 is always the centre.
    pub fn vertex(leg: u32, depth: u64) -> (u32, u64) {
        if depth == 0 {
            (0, 0)
        } else {
            (leg, depth)
        }
    }
}

impl SimplicialTree for Spider {
    type V = (u32, u64);

    fn vertex_path(&self, a: &(u32, u64), b: &(u32, u64)) -> Vec<(u32, u64)> {
        if a.1 == 0 || b.1 == 0 || a.0 == b.0 {
            let leg = if a.1 == 0 { b.0 } else { a.0 };
            let (lo, hi) = (a.1.min(b.1), a.1.max(b.1));
            let mut v: Vec<_> = (lo..=hi).map(|d| Spider::vertex(leg, d)).collect();
            if a.1 > b.1 {
                v.reverse();
            }
            return v;
        }
        let mut v: Vec<_> = (0..=a.1).rev().map(|d| Spider::vertex(a.0, d)).collect();
        v.extend((1..=b.1).map(|d| (b.0, d)));
        v
    }

    fn edge_len(&self, _a: &(u32, u64), _b: &(u32, u64)) -> Q {
        Q::from_integer(1.into())
    }

    fn vdist(&self, a: &(u32, u64), b: &(u32, u64)) -> Q {
        let d = if a.1 == 0 || b.1 == 0 || a.0 == b.0 { a.1.abs_diff(b.1) } else { a.1 + b.1 };
        Q::from_integer(d.into())
    }

    fn vlabel(&self, v: &(u32, u64)) -> String {
        if v.1 == 0 {
            "c".into()
        } else {
            format!("l{}d{}", v.0, v.1)
        }
    }
}

simplicial_space!(Spider);

impl LazyTree for Spider {
    type V = (u32, u64);

    fn root(&self) -> (u32, u64) {
        Spider::center()
    }

    fn neighbors(&self, v: &(u32, u64)) -> Vec<(u32, u64)> {
        if v.1 == 0 {
            (0..self.legs).map(|l| (l, 1)).collect()
        } else {
            vec![Spider::vertex(v.0, v.1 - 1), (v.0, v.1 + 1)]
        }
    }

    fn vlabel(&self, v: &(u32, u64)) -> String {
        SimplicialTree::vlabel(self, v)
    }

    fn radius_bound(&self) -> usize {
        self.radius_bound
    }
}
