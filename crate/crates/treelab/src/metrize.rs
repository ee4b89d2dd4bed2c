//! Unit-length realization of a finite median pretree with acting maps, and
//! agreement of transported axis metrics.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_traits::Signed;
use thiserror::Error;

use crate::actions::{axis_coordinate, Automorphism};
use crate::pretree_core::{FinitePretree, PointId, PretreeError};
use crate::rational::Q;
use crate::tree_model::{as_pretree, MetricTree, Pt, TreeError, TreeSpace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetrizeError {
    #[error("triple ({0}, {1}, {2}) has no median")]
    NotMedian(PointId, PointId, PointId),
    #[error(transparent)]
    Pretree(#[from] PretreeError),
    #[error("covering pairs do not form a tree: {0}")]
    NotATree(#[from] TreeError),
    #[error("realization changes betweenness at ({0}; {1}, {2})")]
    BetweennessMismatch(PointId, PointId, PointId),
    #[error("map {0} has {1} images for {2} points")]
    BadMap(String, usize, usize),
}

/// A map defined on part of the point set, injective where defined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialPerm {
    pub name: String,
    pub images: Vec<Option<PointId>>,
}

impl PartialPerm {
    pub fn total(name: &str, images: Vec<PointId>) -> Self {
        PartialPerm { name: name.into(), images: images.into_iter().map(Some).collect() }
    }

    /// Restriction of `f` to `points`: defined where the image is again listed.
    pub fn restrict<P: Ord + Clone>(name: &str, points: &[P], f: impl Fn(&P) -> P) -> Self {
        let index: BTreeMap<&P, usize> = points.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let images = points.iter().map(|p| index.get(&f(p)).copied()).collect();
        PartialPerm { name: name.into(), images }
    }

    pub fn domain(&self) -> Vec<PointId> {
        (0..self.images.len()).filter(|&i| self.images[i].is_some()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteMedianClosure {
    pub pretree: FinitePretree,
    pub gens: Vec<PartialPerm>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsometryCertificate {
    pub name: String,
    pub pairs_checked: usize,
    pub edges_checked: usize,
    pub failures: Vec<(PointId, PointId)>,
}

impl IsometryCertificate {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivariantMetric {
    pub tree: MetricTree,
    pub certificates: Vec<IsometryCertificate>,
}

impl EquivariantMetric {
    pub fn all_isometric(&self) -> bool {
        self.certificates.iter().all(IsometryCertificate::ok)
    }
}

/// Pairs `x < y` with nothing strictly between them.
pub fn covering_pairs(t: &FinitePretree) -> Vec<(PointId, PointId)> {
    let n = t.len();
    let mut out = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            if (0..n).all(|z| !t.between(z, x, y)) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Vertices are the points, edges the covering pairs, all of unit length.
pub fn discrete_to_simplicial(d: &DiscreteMedianClosure) -> Result<EquivariantMetric, MetrizeError> {
    let t = &d.pretree;
    let n = t.len();
    for x in 0..n {
        for y in x..n {
            for z in y..n {
                if t.median(x, y, z)?.is_none() {
                    return Err(MetrizeError::NotMedian(x, y, z));
                }
            }
        }
    }
    let edges = covering_pairs(t);
    let tree = MetricTree::unit(n, &edges)?;
    let verts: Vec<Pt<usize>> = (0..n).map(Pt::V).collect();
    let realized = as_pretree(&tree, &verts);
    for (y, x, z) in t.triples().into_iter().chain(realized.triples()) {
        if t.between(y, x, z) != realized.between(y, x, z) {
            return Err(MetrizeError::BetweennessMismatch(y, x, z));
        }
    }
    let dist = |a: usize, b: usize| tree.dist(&Pt::V(a), &Pt::V(b));
    let mut certificates = Vec::new();
    for g in &d.gens {
        if g.images.len() != n {
            return Err(MetrizeError::BadMap(g.name.clone(), g.images.len(), n));
        }
        let dom = g.domain();
        let mut cert = IsometryCertificate { name: g.name.clone(), pairs_checked: 0, edges_checked: 0, failures: Vec::new() };
        for (i, &x) in dom.iter().enumerate() {
            for &y in &dom[i + 1..] {
                let (gx, gy) = (g.images[x].expect("domain"), g.images[y].expect("domain"));
                cert.pairs_checked += 1;
                if tree.is_adjacent(x, y) {
                    cert.edges_checked += 1;
                }
                if dist(x, y) != dist(gx, gy) {
                    cert.failures.push((x, y));
                }
            }
        }
        certificates.push(cert);
    }
    Ok(EquivariantMetric { tree, certificates })
}

/// Coordinates on a sampled axis window; the chart metric is `|c(x) − c(y)|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisChart<P: Ord> {
    pub name: String,
    pub coords: BTreeMap<P, Q>,
}

/// Samples the axis of `h` through `base` over `periods` translations each
/// way, `steps` points per period, coordinates divided by `unit`. With
/// `transport = Some(s)`, each point `x` is moved to `s(x)` and keeps its
/// coordinate.
pub fn axis_chart<S, G>(
    space: &S,
    h: &G,
    base: &S::P,
    periods: usize,
    steps: usize,
    unit: &Q,
    transport: Option<&G>,
    name: &str,
) -> AxisChart<S::P>
where
    S: TreeSpace,
    G: Automorphism<P = S::P>,
{
    let mut coords = BTreeMap::new();
    let mut lo = base.clone();
    for _ in 0..periods {
        lo = h.apply_inv(&lo);
    }
    let tau = space.dist(base, &h.apply(base));
    let steps = steps.max(1);
    let mut cur = lo;
    for _ in 0..2 * periods {
        let next = h.apply(&cur);
        for j in 0..steps {
            let p = space.towards(&cur, &next, &(&tau * Q::from_integer(j.into()) / Q::from_integer(steps.into())));
            let c = axis_coordinate(space, h, base, &p) / unit;
            let key = transport.map_or_else(|| p.clone(), |s| s.apply(&p));
            coords.insert(key, c);
        }
        cur = next;
    }
    let c = axis_coordinate(space, h, base, &cur) / unit;
    coords.insert(transport.map_or_else(|| cur.clone(), |s| s.apply(&cur)), c);
    AxisChart { name: name.into(), coords }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch<P> {
    pub charts: (String, String),
    pub points: (P, P),
    pub measures: (Q, Q),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementReport<P> {
    /// `(chart, chart, overlap size)` for each compared pair.
    pub compared: Vec<(String, String, usize)>,
    pub skipped: Vec<(String, String)>,
    pub mismatches: Vec<Mismatch<P>>,
}

impl<P> AgreementReport<P> {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Pairwise comparison of chart metrics on common points.
pub fn axis_metric_agreement<P: Ord + Clone + Debug>(charts: &[AxisChart<P>]) -> AgreementReport<P> {
    let mut rep = AgreementReport { compared: Vec::new(), skipped: Vec::new(), mismatches: Vec::new() };
    for (i, a) in charts.iter().enumerate() {
        for b in &charts[i + 1..] {
            let common: Vec<&P> = a.coords.keys().filter(|p| b.coords.contains_key(*p)).collect();
            let names = (a.name.clone(), b.name.clone());
            if common.len() < 2 {
                rep.skipped.push(names);
                continue;
            }
            for (k, p) in common.iter().enumerate() {
                for q in &common[k + 1..] {
                    let da = (&a.coords[*p] - &a.coords[*q]).abs();
                    let db = (&b.coords[*p] - &b.coords[*q]).abs();
                    if da != db {
                        rep.mismatches.push(Mismatch {
                            charts: names.clone(),
                            points: ((*p).clone(), (*q).clone()),
                            measures: (da, db),
                        });
                    }
                }
            }
            rep.compared.push((names.0, names.1, common.len()));
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::LineMap;
    use crate::pretree_core::tree_pretree;
    use crate::rational::q;
    use crate::tree_model::RationalLine;

    #[test]
    fn star_rotation() {
        let t = tree_pretree(4, &[(0, 1), (0, 2), (0, 3)]);
        let d = DiscreteMedianClosure { pretree: t, gens: vec![PartialPerm::total("rot", vec![0, 2, 3, 1])] };
        let m = discrete_to_simplicial(&d).unwrap();
        assert_eq!(m.tree.len(), 4);
        assert_eq!(m.tree.degree(0), 3);
        assert!(m.all_isometric());
        assert_eq!(m.certificates[0].pairs_checked, 6);
    }

    #[test]
    fn path_flip() {
        let t = tree_pretree(4, &[(0, 1), (1, 2), (2, 3)]);
        let d = DiscreteMedianClosure { pretree: t, gens: vec![PartialPerm::total("flip", vec![3, 2, 1, 0])] };
        assert!(discrete_to_simplicial(&d).unwrap().all_isometric());
    }

    #[test]
    fn non_median_rejected() {
        // Three points, nothing between anything: no median for the triple.
        let t = FinitePretree::new(3, []).unwrap();
        let d = DiscreteMedianClosure { pretree: t, gens: vec![] };
        assert_eq!(discrete_to_simplicial(&d), Err(MetrizeError::NotMedian(0, 1, 2)));
    }

    #[test]
    fn line_translates_agree_and_scaling_does_not() {
        let g = LineMap::translate(q(1));
        let base = q(0);
        let a = axis_chart(&RationalLine, &g, &base, 4, 1, &q(1), None, "id");
        let b = axis_chart(&RationalLine, &g, &base, 4, 1, &q(1), Some(&LineMap::translate(q(2))), "+2");
        let rep = axis_metric_agreement(&[a.clone(), b]);
        assert!(rep.passed());
        assert_eq!(rep.compared, vec![("id".to_string(), "+2".to_string(), 7)]);
        let s = LineMap::new(q(2), q(0)).unwrap();
        let c = axis_chart(&RationalLine, &g, &base, 4, 1, &q(1), Some(&s), "x2");
        assert!(!axis_metric_agreement(&[a, c]).passed());
    }
}
