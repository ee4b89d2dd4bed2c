//! Points of a simplicial tree with rational edge lengths, and the exact
//! geometry shared by finite trees and lazily expanded ones.

use std::fmt::Debug;
use std::hash::Hash;

use num_traits::{Signed, Zero};

use crate::rational::{fmt_q, Q};

pub trait SimplicialTree {
    type V: Clone + Ord + Hash + Debug;

    /// Vertices from `a` to `b`, both included.
    fn vertex_path(&self, a: &Self::V, b: &Self::V) -> Vec<Self::V>;

    /// Length of the edge `{a, b}`; the vertices must be adjacent.
    fn edge_len(&self, a: &Self::V, b: &Self::V) -> Q;

    fn vdist(&self, a: &Self::V, b: &Self::V) -> Q {
        let p = self.vertex_path(a, b);
        p.windows(2).map(|w| self.edge_len(&w[0], &w[1])).sum()
    }

    fn vlabel(&self, v: &Self::V) -> String;

    /// Median of three vertices, when cheaper than walking geodesics.
    fn vmedian(&self, _a: &Self::V, _b: &Self::V, _c: &Self::V) -> Option<Self::V> {
        None
    }
}

/// A vertex, or an interior point of the edge `{lo, hi}` (`lo < hi`) at
/// distance `off` from `lo`, with `0 < off < len`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pt<V> {
    V(V),
    E { lo: V, hi: V, off: Q },
}

impl<V: Clone + Ord> Pt<V> {
    pub fn is_vertex(&self) -> bool {
        matches!(self, Pt::V(_))
    }

    pub fn vertex(&self) -> Option<&V> {
        match self {
            Pt::V(v) => Some(v),
            Pt::E { .. } => None,
        }
    }
}

/// Canonical point on the edge `{a, b}` at distance `s` from `a`.
pub fn on_edge<T: SimplicialTree>(t: &T, a: &T::V, b: &T::V, s: &Q) -> Pt<T::V> {
    let len = t.edge_len(a, b);
    if !s.is_positive() {
        return Pt::V(a.clone());
    }
    if *s >= len {
        return Pt::V(b.clone());
    }
    if a < b {
        Pt::E { lo: a.clone(), hi: b.clone(), off: s.clone() }
    } else {
        Pt::E { lo: b.clone(), hi: a.clone(), off: len - s }
    }
}

/// Endpoints of the carrier edge with the distance from the point to each.
fn anchors<T: SimplicialTree>(t: &T, p: &Pt<T::V>) -> Vec<(T::V, Q)> {
    match p {
        Pt::V(v) => vec![(v.clone(), Q::zero())],
        Pt::E { lo, hi, off } => {
            let len = t.edge_len(lo, hi);
            vec![(lo.clone(), off.clone()), (hi.clone(), len - off)]
        }
    }
}

fn same_edge<V: PartialEq>(p: &Pt<V>, q: &Pt<V>) -> Option<(Q, Q)> {
    match (p, q) {
        (Pt::E { lo, hi, off }, Pt::E { lo: l2, hi: h2, off: o2 }) if lo == l2 && hi == h2 => {
            Some((off.clone(), o2.clone()))
        }
        _ => None,
    }
}

pub fn dist<T: SimplicialTree>(t: &T, p: &Pt<T::V>, q: &Pt<T::V>) -> Q {
    if let Some((a, b)) = same_edge(p, q) {
        return (a - b).abs();
    }
    let mut best: Option<Q> = None;
    for (u, du) in anchors(t, p) {
        for (w, dw) in anchors(t, q) {
            let d = &du + &dw + t.vdist(&u, &w);
            if best.as_ref().is_none_or(|b| d < *b) {
                best = Some(d);
            }
        }
    }
    best.expect("anchors are nonempty")
}

/// The geodesic from `p` to `q` as a chain of points (every vertex crossed,
/// plus the two ends) and its length.
pub fn geodesic<T: SimplicialTree>(t: &T, p: &Pt<T::V>, q: &Pt<T::V>) -> (Vec<Pt<T::V>>, Q) {
    let total = dist(t, p, q);
    if p == q {
        return (vec![p.clone()], total);
    }
    if same_edge(p, q).is_some() {
        return (vec![p.clone(), q.clone()], total);
    }
    // Exit vertex of p and entry vertex of q are the anchors on the geodesic.
    let exit = anchors(t, p)
        .into_iter()
        .find(|(u, du)| du + &dist(t, &Pt::V(u.clone()), q) == total)
        .expect("one anchor lies on the geodesic")
        .0;
    let entry = anchors(t, q)
        .into_iter()
        .find(|(w, dw)| dw + &dist(t, p, &Pt::V(w.clone())) == total)
        .expect("one anchor lies on the geodesic")
        .0;
    let mut chain = Vec::new();
    if !p.is_vertex() {
        chain.push(p.clone());
    }
    chain.extend(t.vertex_path(&exit, &entry).into_iter().map(Pt::V));
    if !q.is_vertex() {
        chain.push(q.clone());
    }
    (chain, total)
}

fn carrier<V: Clone + Ord>(a: &Pt<V>, b: &Pt<V>) -> (V, V) {
    match (a, b) {
        (Pt::E { lo, hi, .. }, _) | (_, Pt::E { lo, hi, .. }) => (lo.clone(), hi.clone()),
        (Pt::V(x), Pt::V(y)) => {
            if x < y {
                (x.clone(), y.clone())
            } else {
                (y.clone(), x.clone())
            }
        }
    }
}

fn pos_on<V: Clone + Ord>(p: &Pt<V>, lo: &V, len: &Q) -> Q {
    match p {
        Pt::V(v) if v == lo => Q::zero(),
        Pt::V(_) => len.clone(),
        Pt::E { off, .. } => off.clone(),
    }
}

pub fn towards<T: SimplicialTree>(t: &T, p: &Pt<T::V>, q: &Pt<T::V>, s: &Q) -> Pt<T::V> {
    let (chain, total) = geodesic(t, p, q);
    if !s.is_positive() {
        return p.clone();
    }
    if *s >= total {
        return q.clone();
    }
    let mut walked = Q::zero();
    for w in chain.windows(2) {
        let step = dist(t, &w[0], &w[1]);
        if walked.clone() + &step >= *s {
            let (lo, hi) = carrier(&w[0], &w[1]);
            let len = t.edge_len(&lo, &hi);
            let a = pos_on(&w[0], &lo, &len);
            let b = pos_on(&w[1], &lo, &len);
            let rest = s - &walked;
            let pos = if b > a { a + rest } else { a - rest };
            return on_edge(t, &lo, &hi, &pos);
        }
        walked += step;
    }
    q.clone()
}

pub fn label<T: SimplicialTree>(t: &T, p: &Pt<T::V>) -> String {
    match p {
        Pt::V(v) => format!("@{}", t.vlabel(v)),
        Pt::E { lo, hi, off } => format!("@{}-{}:{}", t.vlabel(lo), t.vlabel(hi), fmt_q(off)),
    }
}

/// Implements [`super::TreeSpace`] for a [`SimplicialTree`] with `Pt` points.
macro_rules! simplicial_space {
    ($ty:ty) => {
        impl $crate::tree_model::TreeSpace for $ty {
            type P = $crate::tree_model::Pt<<$ty as $crate::tree_model::SimplicialTree>::V>;

            fn dist(&self, a: &Self::P, b: &Self::P) -> $crate::rational::Q {
                $crate::tree_model::simplicial::dist(self, a, b)
            }

            fn towards(&self, x: &Self::P, y: &Self::P, s: &$crate::rational::Q) -> Self::P {
                $crate::tree_model::simplicial::towards(self, x, y, s)
            }

            fn median(&self, x: &Self::P, y: &Self::P, z: &Self::P) -> Self::P {
                use $crate::tree_model::{Pt, SimplicialTree};
                if let (Pt::V(a), Pt::V(b), Pt::V(c)) = (x, y, z) {
                    if let Some(m) = self.vmedian(a, b, c) {
                        return Pt::V(m);
                    }
                }
                let s = $crate::tree_model::gromov_product(self, x, y, z);
                self.towards(x, y, &s)
            }

            fn label(&self, p: &Self::P) -> String {
                $crate::tree_model::simplicial::label(self, p)
            }
        }
    };
}

pub(crate) use simplicial_space;
