//! Flow relations on finite pretrees, flows induced by directed arcs, and
//! the cut a flow determines on a line.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::pretree_core::{FinitePretree, PointId};
use crate::tree_model::{as_pretree, TreeSpace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("pair references unknown point {0}")]
    UnknownPoint(PointId),
    #[error("arc sample is not strictly increasing at position {0}")]
    NotIncreasing(usize),
    #[error("line sample is not ordered along a line at position {0}")]
    NotALine(usize),
    #[error("{0} probe pairs not decided by the arc promise")]
    Inconclusive(usize),
    #[error("empty {0}")]
    Empty(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FlowAxiom {
    F1,
    F2,
    F3,
}

impl fmt::Display for FlowAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FlowAxiom::F1 => "F1",
            FlowAxiom::F2 => "F2",
            FlowAxiom::F3 => "F3",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowViolation {
    pub axiom: FlowAxiom,
    pub witness: Vec<PointId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowReport {
    pub violations: Vec<FlowViolation>,
}

impl FlowReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&FlowViolation> {
        self.violations.first()
    }
}

/// A binary relation `r` on the points of a finite pretree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowRelation {
    pub base: FinitePretree,
    pub r: BTreeSet<(PointId, PointId)>,
}

impl FlowRelation {
    pub fn new(base: FinitePretree, r: impl IntoIterator<Item = (PointId, PointId)>) -> Result<Self, FlowError> {
        let r: BTreeSet<_> = r.into_iter().collect();
        if let Some(&(x, y)) = r.iter().find(|(x, y)| *x >= base.len() || *y >= base.len()) {
            return Err(FlowError::UnknownPoint(if x >= base.len() { x } else { y }));
        }
        Ok(FlowRelation { base, r })
    }

    pub fn holds(&self, x: PointId, y: PointId) -> bool {
        self.r.contains(&(x, y))
    }

    /// `E(x, y)`: related either way, or equal.
    pub fn comparable(&self, x: PointId, y: PointId) -> bool {
        x == y || self.holds(x, y) || self.holds(y, x)
    }
}

/// Exhaustive check of the three flow axioms.
pub fn check_flow_axioms(fr: &FlowRelation) -> FlowReport {
    let t = &fr.base;
    let n = t.len();
    let mut violations = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if fr.holds(x, y) && fr.holds(y, x) && x < y {
                violations.push(FlowViolation { axiom: FlowAxiom::F1, witness: vec![x, y] });
            }
        }
    }
    for z in 0..n {
        for x in 0..n {
            for y in x + 1..n {
                if t.between(z, x, y) && !fr.holds(x, z) && !fr.holds(y, z) {
                    violations.push(FlowViolation { axiom: FlowAxiom::F2, witness: vec![z, x, y] });
                }
            }
        }
    }
    for &(x, y) in &fr.r {
        for z in 0..n {
            if z != y && !t.between(y, x, z) && !fr.holds(z, y) {
                violations.push(FlowViolation { axiom: FlowAxiom::F3, witness: vec![x, y, z] });
            }
        }
    }
    FlowReport { violations }
}

/// What is known about the arc past its last sampled point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArcPromise<P> {
    /// Continues as the geodesic ray from the first through the last point.
    GeodesicRay,
    /// Accumulates at the given point without reaching it.
    ConvergesTo(P),
    /// Nothing is known.
    Unknown,
}

/// A strictly increasing finite sample of a directed arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedArcSample<P> {
    points: Vec<P>,
    promise: ArcPromise<P>,
}

impl<P: Clone + Ord + fmt::Debug> DirectedArcSample<P> {
    pub fn new<S: TreeSpace<P = P>>(space: &S, points: Vec<P>, promise: ArcPromise<P>) -> Result<Self, FlowError> {
        check_chain(space, &points).map_err(FlowError::NotIncreasing)?;
        if points.is_empty() {
            return Err(FlowError::Empty("arc sample"));
        }
        if promise == ArcPromise::GeodesicRay && points.len() < 2 {
            return Err(FlowError::Empty("ray direction"));
        }
        if let ArcPromise::ConvergesTo(l) = &promise {
            let mut with_limit = points.clone();
            with_limit.push(l.clone());
            check_chain(space, &with_limit).map_err(FlowError::NotIncreasing)?;
        }
        Ok(DirectedArcSample { points, promise })
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn promise(&self) -> &ArcPromise<P> {
        &self.promise
    }

    pub fn last(&self) -> &P {
        self.points.last().expect("nonempty")
    }
}

/// Distinct points with each one strictly between its neighbours.
fn check_chain<S: TreeSpace>(space: &S, pts: &[S::P]) -> Result<(), usize> {
    for (i, w) in pts.windows(2).enumerate() {
        if w[0] == w[1] {
            return Err(i + 1);
        }
    }
    for (i, w) in pts.windows(3).enumerate() {
        if !space.between(&w[1], &w[0], &w[2]) {
            return Err(i + 1);
        }
    }
    Ok(())
}

/// A flow on a probe set, with the pairs the promise could not decide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcFlow<P> {
    pub probes: Vec<P>,
    pub relation: FlowRelation,
    pub inconclusive: Vec<(PointId, PointId)>,
}

/// `r(x, y)` iff eventually every later arc point `w` has `y` strictly
/// between `x` and `w`. The tail of the arc is replaced by one
/// representative point, valid for all probes the promise covers.
pub fn flow_from_arc<S: TreeSpace>(space: &S, arc: &DirectedArcSample<S::P>, probes: &[S::P]) -> ArcFlow<S::P> {
    let pts = arc.points();
    let (first, last) = (&pts[0], arc.last());
    let tail: Option<S::P> = match arc.promise() {
        ArcPromise::GeodesicRay => Some(last.clone()),
        ArcPromise::ConvergesTo(l) => {
            let d = space.dist(last, l);
            Some(space.towards(last, l, &(d / crate::rational::q(2))))
        }
        ArcPromise::Unknown => None,
    };
    let covered = |x: &S::P| match arc.promise() {
        // The probe leaves the ray before its last sampled point.
        ArcPromise::GeodesicRay => space.median(x, first, last) != *last,
        // No probe inside the unsampled tail [last, limit).
        ArcPromise::ConvergesTo(l) => !(space.in_segment(x, last, l) && x != l),
        ArcPromise::Unknown => false,
    };
    let base = as_pretree(space, probes);
    let mut r = Vec::new();
    let mut inconclusive = Vec::new();
    for (i, x) in probes.iter().enumerate() {
        for (j, y) in probes.iter().enumerate() {
            if i == j {
                continue;
            }
            match &tail {
                Some(w) if covered(x) && covered(y) => {
                    if space.between(y, x, w) {
                        r.push((i, j));
                    }
                }
                _ => inconclusive.push((i, j)),
            }
        }
    }
    let relation = FlowRelation::new(base, r).expect("indices from probes");
    ArcFlow { probes: probes.to_vec(), relation, inconclusive }
}

/// Where a flow meets a line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cut<P> {
    AtPoint(P),
    /// Two classes; the largest sampled point below and smallest above.
    Gap { lower_max: P, upper_min: P },
    PlusInfinity,
    MinusInfinity,
}

impl<P> Cut<P> {
    pub fn is_proper(&self) -> bool {
        matches!(self, Cut::AtPoint(_) | Cut::Gap { .. })
    }
}

/// Partition of the line sample `j` into classes of `E(x, y)`, in line order.
pub fn e_classes(flow: &FlowRelation) -> Vec<Vec<PointId>> {
    let n = flow.base.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for x in 0..n {
        for y in x + 1..n {
            if flow.comparable(x, y) {
                let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut classes: Vec<Vec<PointId>> = Vec::new();
    let mut root_idx = std::collections::BTreeMap::new();
    for x in 0..n {
        let r = find(&mut parent, x);
        let k = *root_idx.entry(r).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[k].push(x);
    }
    classes
}

/// The flow induced by `arc` restricted to the ordered line sample `line`,
/// and the cut it determines there.
pub fn flow_cut<S: TreeSpace>(
    space: &S,
    arc: &DirectedArcSample<S::P>,
    line: &[S::P],
) -> Result<(Cut<S::P>, ArcFlow<S::P>), FlowError> {
    if line.is_empty() {
        return Err(FlowError::Empty("line sample"));
    }
    check_chain(space, line).map_err(FlowError::NotALine)?;
    let flow = flow_from_arc(space, arc, line);
    if !flow.inconclusive.is_empty() {
        return Err(FlowError::Inconclusive(flow.inconclusive.len()));
    }
    let n = line.len();
    let rel = &flow.relation;
    // A limit point that lies on the line is maximal in the whole tree.
    if let ArcPromise::ConvergesTo(l) = arc.promise() {
        if let Some(k) = line.iter().position(|p| p == l) {
            return Ok((Cut::AtPoint(line[k].clone()), flow));
        }
    }
    let greatest = (0..n).find(|&g| (0..n).all(|x| x == g || rel.holds(x, g)));
    if let Some(g) = greatest {
        let cut = if n == 1 {
            Cut::AtPoint(line[0].clone())
        } else if g == n - 1 {
            Cut::PlusInfinity
        } else if g == 0 {
            Cut::MinusInfinity
        } else {
            Cut::AtPoint(line[g].clone())
        };
        return Ok((cut, flow));
    }
    Ok((cut_from_classes(&flow), flow))
}

fn cut_from_classes<P: Clone>(flow: &ArcFlow<P>) -> Cut<P> {
    let classes = e_classes(&flow.relation);
    let n = flow.probes.len();
    if classes.len() == 2 {
        let (lo, hi) = (&classes[0], &classes[1]);
        let lower_max = *lo.iter().max().expect("nonempty");
        let upper_min = *hi.iter().min().expect("nonempty");
        if lower_max + 1 == upper_min {
            return Cut::Gap { lower_max: flow.probes[lower_max].clone(), upper_min: flow.probes[upper_min].clone() };
        }
    }
    if flow.relation.holds(0, n.saturating_sub(1)) || n == 1 {
        Cut::PlusInfinity
    } else {
        Cut::MinusInfinity
    }
}

/// `true` iff the cut is a point or a two-class split.
pub fn lies_on<S: TreeSpace>(space: &S, arc: &DirectedArcSample<S::P>, line: &[S::P]) -> Result<bool, FlowError> {
    Ok(flow_cut(space, arc, line)?.0.is_proper())
}
