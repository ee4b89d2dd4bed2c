//! Tree automorphisms: classification, axes, non-nesting and products of pairs.
//!
//! Everything is exact. On infinite trees the caller passes a finite window;
//! a claim is only asserted for data that fits inside it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::pretree_core::{FinitePretree, PointId};
use crate::rational::{fmt_q, Q};
use crate::tree_model::{bridge_in, MetricTree, Pt, SimplicialTree, TreePoint, TreeSpace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("not an automorphism: {0}")]
    NotAutomorphism(String),
    #[error("inconclusive on this window: {0}")]
    Inconclusive(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
}

/// A bijective point map with an explicit inverse.
pub trait Automorphism: Clone + Debug {
    type P: Clone + Ord + Debug;

    fn apply(&self, p: &Self::P) -> Self::P;

    fn apply_inv(&self, p: &Self::P) -> Self::P;

    /// `self ∘ other`: first `other`, then `self`.
    fn compose(&self, other: &Self) -> Self;

    fn inverse(&self) -> Self;

    fn label(&self) -> String;

    fn conjugate_by(&self, h: &Self) -> Self {
        h.compose(self).compose(&h.inverse())
    }

    fn power(&self, k: i64) -> Self {
        if k == 0 {
            return self.compose(&self.inverse());
        }
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut g = base.clone();
        for _ in 1..k.unsigned_abs() {
            g = base.compose(&g);
        }
        g
    }
}

/// An affine map `x ↦ scale·x + shift` of the rational line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineMap {
    pub scale: Q,
    pub shift: Q,
}

impl LineMap {
    pub fn new(scale: Q, shift: Q) -> Result<Self, ActionError> {
        if scale.is_zero() {
            return Err(ActionError::NotAutomorphism("zero scale".into()));
        }
        Ok(LineMap { scale, shift })
    }

    pub fn translate(c: Q) -> Self {
        LineMap { scale: Q::from_integer(1.into()), shift: c }
    }

    /// Reflection fixing `c`.
    pub fn reflect(c: Q) -> Self {
        LineMap { scale: Q::from_integer((-1).into()), shift: &c + &c }
    }

    pub fn is_increasing(&self) -> bool {
        self.scale.is_positive()
    }
}

impl Automorphism for LineMap {
    type P = Q;

    fn apply(&self, p: &Q) -> Q {
        &self.scale * p + &self.shift
    }

    fn apply_inv(&self, p: &Q) -> Q {
        (p - &self.shift) / &self.scale
    }

    fn compose(&self, o: &Self) -> Self {
        LineMap { scale: &self.scale * &o.scale, shift: &self.scale * &o.shift + &self.shift }
    }

    fn inverse(&self) -> Self {
        let s = Q::from_integer(1.into()) / &self.scale;
        LineMap { shift: -(&s * &self.shift), scale: s }
    }

    fn label(&self) -> String {
        format!("x*{}+{}", fmt_q(&self.scale), fmt_q(&self.shift))
    }
}

/// An isometric vertex permutation of a finite [`MetricTree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexPerm {
    fwd: Vec<usize>,
    inv: Vec<usize>,
    lens: BTreeMap<(usize, usize), Q>,
    name: String,
}

impl VertexPerm {
    pub fn new(tree: &MetricTree, map: Vec<usize>, name: &str) -> Result<Self, ActionError> {
        let n = tree.len();
        if map.len() != n {
            return Err(ActionError::NotAutomorphism(format!("{} images for {} vertices", map.len(), n)));
        }
        let mut inv = vec![usize::MAX; n];
        for (i, &m) in map.iter().enumerate() {
            if m >= n || inv[m] != usize::MAX {
                return Err(ActionError::NotAutomorphism(format!("not a bijection at {i}")));
            }
            inv[m] = i;
        }
        let mut lens = BTreeMap::new();
        for (a, b, len) in tree.edges() {
            let (x, y) = (map[*a], map[*b]);
            if !tree.is_adjacent(x, y) {
                return Err(ActionError::NotAutomorphism(format!(
                    "edge {}-{} goes to a non-edge",
                    tree.labels()[*a],
                    tree.labels()[*b]
                )));
            }
            if tree.edge_len(&x, &y) != *len {
                return Err(ActionError::NotAutomorphism(format!(
                    "edge {}-{} changes length",
                    tree.labels()[*a],
                    tree.labels()[*b]
                )));
            }
            lens.insert((*a, *b), len.clone());
        }
        Ok(VertexPerm { fwd: map, inv, lens, name: name.to_string() })
    }

    pub fn identity(tree: &MetricTree) -> Self {
        VertexPerm::new(tree, (0..tree.len()).collect(), "id").expect("identity")
    }

    pub fn images(&self) -> &[usize] {
        &self.fwd
    }

    fn map_pt(&self, p: &TreePoint, m: &[usize]) -> TreePoint {
        match p {
            Pt::V(v) => Pt::V(m[*v]),
            Pt::E { lo, hi, off } => {
                let (x, y) = (m[*lo], m[*hi]);
                if x < y {
                    Pt::E { lo: x, hi: y, off: off.clone() }
                } else {
                    let len = &self.lens[&(*lo, *hi)];
                    Pt::E { lo: y, hi: x, off: len - off }
                }
            }
        }
    }
}

impl Automorphism for VertexPerm {
    type P = TreePoint;

    fn apply(&self, p: &TreePoint) -> TreePoint {
        self.map_pt(p, &self.fwd)
    }

    fn apply_inv(&self, p: &TreePoint) -> TreePoint {
        self.map_pt(p, &self.inv)
    }

    fn compose(&self, o: &Self) -> Self {
        let fwd: Vec<usize> = o.fwd.iter().map(|&i| self.fwd[i]).collect();
        let mut inv = vec![0; fwd.len()];
        for (i, &m) in fwd.iter().enumerate() {
            inv[m] = i;
        }
        VertexPerm { fwd, inv, lens: self.lens.clone(), name: format!("{}.{}", self.name, o.name) }
    }

    fn inverse(&self) -> Self {
        VertexPerm {
            fwd: self.inv.clone(),
            inv: self.fwd.clone(),
            lens: self.lens.clone(),
            name: format!("{}^-1", self.name),
        }
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}

/// A permutation of the points of a [`FinitePretree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PretreePerm {
    fwd: Vec<PointId>,
    inv: Vec<PointId>,
}

impl PretreePerm {
    pub fn new(t: &FinitePretree, map: Vec<PointId>) -> Result<Self, ActionError> {
        t.check_automorphism(&map).map_err(|e| ActionError::NotAutomorphism(e.to_string()))?;
        let mut inv = vec![0; map.len()];
        for (i, &m) in map.iter().enumerate() {
            inv[m] = i;
        }
        Ok(PretreePerm { fwd: map, inv })
    }

    pub fn images(&self) -> &[PointId] {
        &self.fwd
    }
}

impl Automorphism for PretreePerm {
    type P = PointId;

    fn apply(&self, p: &PointId) -> PointId {
        self.fwd[*p]
    }

    fn apply_inv(&self, p: &PointId) -> PointId {
        self.inv[*p]
    }

    fn compose(&self, o: &Self) -> Self {
        let fwd: Vec<_> = o.fwd.iter().map(|&i| self.fwd[i]).collect();
        let mut inv = vec![0; fwd.len()];
        for (i, &m) in fwd.iter().enumerate() {
            inv[m] = i;
        }
        PretreePerm { fwd, inv }
    }

    fn inverse(&self) -> Self {
        PretreePerm { fwd: self.inv.clone(), inv: self.fwd.clone() }
    }

    fn label(&self) -> String {
        format!("{:?}", self.fwd)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification<P> {
    Elliptic { fixed: Vec<P> },
    /// `axis` is ordered in the direction `g` moves it.
    Loxodromic { axis: Vec<P>, translation_length: Q },
}

impl<P> Classification<P> {
    pub fn is_elliptic(&self) -> bool {
        matches!(self, Classification::Elliptic { .. })
    }

    pub fn is_loxodromic(&self) -> bool {
        matches!(self, Classification::Loxodromic { .. })
    }

    /// Fixed set or axis.
    pub fn characteristic_set(&self) -> &[P] {
        match self {
            Classification::Elliptic { fixed } => fixed,
            Classification::Loxodromic { axis, .. } => axis,
        }
    }
}

const BETWEENNESS_PROBE: usize = 24;

/// Checks that `g` preserves betweenness on triples from an evenly strided
/// subsample of at most 24 window points.
pub fn check_preserves_betweenness<S, M>(space: &S, g: &M, window: &[S::P]) -> Result<(), ActionError>
where
    S: TreeSpace,
    M: Automorphism<P = S::P>,
{
    let stride = window.len().div_ceil(BETWEENNESS_PROBE).max(1);
    let probe: Vec<&S::P> = window.iter().step_by(stride).collect();
    let img: Vec<S::P> = probe.iter().map(|p| g.apply(p)).collect();
    for (i, p) in probe.iter().enumerate() {
        if g.apply_inv(&img[i]) != **p {
            return Err(ActionError::NotAutomorphism(format!("inverse fails at {p:?}")));
        }
    }
    let k = probe.len();
    let d: Vec<Vec<Q>> = (0..k).map(|i| (0..k).map(|j| space.dist(probe[i], probe[j])).collect()).collect();
    let e: Vec<Vec<Q>> = (0..k).map(|i| (0..k).map(|j| space.dist(&img[i], &img[j])).collect()).collect();
    // Strict betweenness from the distance tables; points within a table are distinct.
    let btw = |m: &[Vec<Q>], y: usize, x: usize, z: usize| y != x && y != z && &m[x][y] + &m[y][z] == m[x][z];
    for x in 0..k {
        for y in 0..k {
            for z in 0..k {
                if btw(&d, y, x, z) != btw(&e, y, x, z) {
                    return Err(ActionError::NotAutomorphism(format!(
                        "betweenness of ({:?}; {:?}, {:?}) not preserved",
                        probe[y], probe[x], probe[z]
                    )));
                }
            }
        }
    }
    Ok(())
}

/// `x = m(x, g⁻¹x, gx)`.
pub fn median_criterion<S, M>(space: &S, g: &M, x: &S::P) -> bool
where
    S: TreeSpace,
    M: Automorphism<P = S::P>,
{
    space.median(x, &g.apply_inv(x), &g.apply(x)) == *x
}

/// Signed position of `x` relative to `x0` along the axis of an isometry `g`,
/// positive in the direction of translation.
pub fn axis_coordinate<S, M>(space: &S, g: &M, x0: &S::P, x: &S::P) -> Q
where
    S: TreeSpace,
    M: Automorphism<P = S::P>,
{
    let d = space.dist(x0, x);
    let ahead = space.dist(x, &g.apply(x0));
    let behind = space.dist(x, &g.apply_inv(x0));
    if behind > ahead {
        d
    } else {
        -d
    }
}

pub fn classify<S, M>(space: &S, g: &M, window: &[S::P]) -> Result<Classification<S::P>, ActionError>
where
    S: TreeSpace,
    M: Automorphism<P = S::P>,
{
    if window.is_empty() {
        return Err(ActionError::WindowTooSmall("empty window".into()));
    }
    check_preserves_betweenness(space, g, window)?;
    let disp: Vec<Q> = window.iter().map(|x| space.dist(x, &g.apply(x))).collect();
    let dmin = disp.iter().min().expect("nonempty").clone();
    let argmin: Vec<S::P> = window
        .iter()
        .zip(&disp)
        .filter(|(_, d)| **d == dmin)
        .map(|(x, _)| x.clone())
        .collect();
    if dmin.is_zero() {
        let mut fixed = argmin;
        fixed.sort();
        return Ok(Classification::Elliptic { fixed });
    }
    if let Some(bad) = argmin.iter().find(|x| !median_criterion(space, g, x)) {
        return Err(ActionError::Inconclusive(format!(
            "no fixed point in the window and {bad:?} is not translated along a line"
        )));
    }
    let x0 = argmin[0].clone();
    let mut axis: Vec<(Q, S::P)> =
        argmin.into_iter().map(|x| (axis_coordinate(space, g, &x0, &x), x)).collect();
    axis.sort();
    Ok(Classification::Loxodromic {
        axis: axis.into_iter().map(|(_, x)| x).collect(),
        translation_length: dmin,
    })
}

/// Window points passing the median criterion, sorted.
pub fn axis_by_median_criterion<S, M>(space: &S, g: &M, window: &[S::P]) -> Result<Vec<S::P>, ActionError>
where
    S: TreeSpace,
    M: Automorphism<P = S::P>,
{
    if !classify(space, g, window)?.is_loxodromic() {
        return Err(ActionError::Precondition("map is not loxodromic on this window".into()));
    }
    let mut v: Vec<S::P> = window.iter().filter(|x| median_criterion(space, g, x)).cloned().collect();
    v.sort();
    Ok(v)
}

/// `(q, g(q))` with `[p, g(p)] ∩ L_g = [q, g(q)]`; `q` is the projection of
/// `p` on the axis, recovered as `g⁻¹ m(p, gp, g²p)`.
pub fn segment_meets_axis<S, M>(space: &S, g: &M, p: &S::P, window: &[S::P]) -> Result<(S::P, S::P), ActionError>
where
    S: TreeSpace,
    M: Automorphism<P = S::P>,
{
    let gp = g.apply(p);
    for x in [p, &gp] {
        if !window.contains(x) {
            return Err(ActionError::WindowTooSmall(format!("{x:?} is outside the window")));
        }
    }
    let m = space.median(p, &gp, &g.apply(&gp));
    let q = g.apply_inv(&m);
    Ok((q, m))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NestingVerdict<P> {
    Pass,
    /// `g(I) ⊊ I` for `I = [x, y]`.
    Witness { segment: (P, P), image: (P, P) },
    Inconclusive { segment: (P, P) },
}

/// Looks for a listed segment mapped properly into itself. Images leaving
/// the window make the verdict inconclusive rather than passing.
pub fn check_non_nesting<S, M, W>(space: &S, g: &M, segments: &[(S::P, S::P)], in_window: W) -> NestingVerdict<S::P>
where
    S: TreeSpace,
    M: Automorphism<P = S::P>,
    W: Fn(&S::P) -> bool,
{
    let mut inconclusive = None;
    for (x, y) in segments {
        let (gx, gy) = (g.apply(x), g.apply(y));
        if !in_window(&gx) || !in_window(&gy) {
            inconclusive.get_or_insert_with(|| (x.clone(), y.clone()));
            continue;
        }
        let inside = space.in_segment(&gx, x, y) && space.in_segment(&gy, x, y);
        let same = (gx == *x && gy == *y) || (gx == *y && gy == *x);
        if inside && !same {
            return NestingVerdict::Witness { segment: (x.clone(), y.clone()), image: (gx, gy) };
        }
    }
    match inconclusive {
        Some(segment) => NestingVerdict::Inconclusive { segment },
        None => NestingVerdict::Pass,
    }
}

/// Verified facts about a product of two elliptic maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EllipticProduct<P> {
    Disjoint {
        bridge: (P, P),
        product: Classification<P>,
        /// Window points on the bridge that fail the axis criterion of `gh`.
        bridge_off_axis: Vec<P>,
        /// `T^g ∩ L_gh` and `T^h ∩ L_gh` inside the window.
        meet_g: Vec<P>,
        meet_h: Vec<P>,
    },
    Common {
        /// `T^g ∩ T^h ∩ T^gh` inside the window.
        triple: Vec<P>,
        product_elliptic: bool,
    },
}

impl<P> EllipticProduct<P> {
    /// Whether every clause of the elliptic-product conclusion holds.
    pub fn holds(&self) -> bool {
        match self {
            EllipticProduct::Disjoint { product, bridge_off_axis, meet_g, meet_h, .. } => {
                product.is_loxodromic() && bridge_off_axis.is_empty() && meet_g.len() == 1 && meet_h.len() == 1
            }
            EllipticProduct::Common { triple, product_elliptic } => !*product_elliptic || !triple.is_empty(),
        }
    }
}

pub fn elliptic_product<S, M>(space: &S, g: &M, h: &M, window: &[S::P]) -> Result<EllipticProduct<S::P>, ActionError>
where
    S: TreeSpace,
    M: Automorphism<P = S::P>,
{
    let fixed = |m: &M| -> Result<Vec<S::P>, ActionError> {
        match classify(space, m, window)? {
            Classification::Elliptic { fixed } => Ok(fixed),
            Classification::Loxodromic { .. } => {
                Err(ActionError::Precondition(format!("{} is not elliptic", m.label())))
            }
        }
    };
    let fg = fixed(g)?;
    let fh = fixed(h)?;
    let gh = g.compose(h);
    let fh_set: BTreeSet<&S::P> = fh.iter().collect();
    let common: Vec<S::P> = fg.iter().filter(|p| fh_set.contains(p)).cloned().collect();
    if !common.is_empty() {
        let prod = classify(space, &gh, window)?;
        let triple = common.into_iter().filter(|p| gh.apply(p) == *p).collect();
        return Ok(EllipticProduct::Common { triple, product_elliptic: prod.is_elliptic() });
    }
    let (t, q) = bridge_in(space, &fg, &fh).expect("nonempty fixed sets");
    let product = classify(space, &gh, window)?;
    let on_axis = |x: &S::P| median_criterion(space, &gh, x);
    let mut bridge_off_axis: Vec<S::P> =
        window.iter().filter(|x| space.in_segment(x, &t, &q) && !on_axis(x)).cloned().collect();
    for e in [&t, &q] {
        if !on_axis(e) && !bridge_off_axis.contains(e) {
            bridge_off_axis.push(e.clone());
        }
    }
    let meet_g = fg.iter().filter(|x| on_axis(x)).cloned().collect();
    let meet_h = fh.iter().filter(|x| on_axis(x)).cloned().collect();
    Ok(EllipticProduct::Disjoint { bridge: (t, q), product, bridge_off_axis, meet_g, meet_h })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FixOrInversion {
    FixedPoint(PointId),
    InvertedSegment(PointId, PointId),
    Loxodromic,
}

/// Fixed point, else a segment `[c, g(c)]` with `g²(c) = c`.
pub fn fixed_point_or_inversion(t: &FinitePretree, g: &PretreePerm) -> FixOrInversion {
    let n = t.len();
    if let Some(p) = (0..n).find(|&p| g.apply(&p) == p) {
        return FixOrInversion::FixedPoint(p);
    }
    match (0..n).find(|&c| g.apply(&g.apply(&c)) == c) {
        Some(c) => FixOrInversion::InvertedSegment(c, g.apply(&c)),
        None => FixOrInversion::Loxodromic,
    }
}

/// Classification of a finite-tree automorphism on the barycentric
/// subdivision, so edge inversions show up as a fixed midpoint.
pub fn classify_finite(tree: &MetricTree, g: &VertexPerm) -> Result<Classification<TreePoint>, ActionError> {
    classify(tree, g, &tree.subdivision_points())
}
