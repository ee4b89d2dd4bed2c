//! Finite pretrees stored as an explicit betweenness relation.
//!
//! `between(y, x, z)` reads "y lies strictly between x and z". All checks are
//! exhaustive; sizes are expected to stay in the low hundreds.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub type PointId = usize;
pub type PointSet = BTreeSet<PointId>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PretreeError {
    #[error("point set is empty")]
    NoPoints,
    #[error("unknown point {0}")]
    UnknownPoint(PointId),
    #[error("no median for triple ({0}, {1}, {2})")]
    NotMedian(PointId, PointId, PointId),
    #[error("triple ({0}, {1}, {2}) has more than one median candidate")]
    MedianNotUnique(PointId, PointId, PointId),
    #[error("input set is empty")]
    EmptySet,
    #[error("set is not full: {0} lies between two of its points but is missing")]
    NotFull(PointId),
    #[error("sets share {0} points; a bridge needs at most one")]
    Overlap(usize),
    #[error("map is not a betweenness automorphism: {0}")]
    NotAutomorphism(String),
    #[error("line {0}: {1}")]
    Parse(usize, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    A1,
    A2,
    A3,
    A4,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self {
            Axiom::A1 => 1,
            Axiom::A2 => 2,
            Axiom::A3 => 3,
            Axiom::A4 => 4,
        };
        write!(f, "A{k}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub witness: Vec<PointId>,
}

/// Outcome of the exhaustive axiom check. At most `AxiomReport::KEEP`
/// violations are stored; `total` counts all of them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub violations: Vec<AxiomViolation>,
    pub total: usize,
}

impl AxiomReport {
    pub const KEEP: usize = 256;

    pub fn passed(&self) -> bool {
        self.total == 0
    }

    pub fn fails(&self, axiom: Axiom) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }

    fn push(&mut self, axiom: Axiom, witness: Vec<PointId>) {
        self.total += 1;
        if self.violations.len() < Self::KEEP {
            self.violations.push(AxiomViolation { axiom, witness });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalKind {
    Closed,
    Open,
    /// `[x, y)`: keeps `x`, drops `y`.
    HalfOpen,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bridge {
    pub t: PointId,
    pub q: PointId,
    pub interior: PointSet,
}

#[derive(Clone, PartialEq, Eq)]
pub struct FinitePretree {
    n: usize,
    rel: Vec<bool>,
}

impl fmt::Debug for FinitePretree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FinitePretree")
            .field("n", &self.n)
            .field("triples", &self.triples().len())
            .finish()
    }
}

impl FinitePretree {
    /// Builds a candidate from explicit triples `(y, x, z)`. No axiom is
    /// checked here; see [`FinitePretree::check_axioms`].
    pub fn new<I>(n: usize, triples: I) -> Result<Self, PretreeError>
    where
        I: IntoIterator<Item = (PointId, PointId, PointId)>,
    {
        if n == 0 {
            return Err(PretreeError::NoPoints);
        }
        let mut t = FinitePretree { n, rel: vec![false; n * n * n] };
        for (y, x, z) in triples {
            for p in [y, x, z] {
                if p >= n {
                    return Err(PretreeError::UnknownPoint(p));
                }
            }
            let i = t.idx(y, x, z);
            t.rel[i] = true;
        }
        Ok(t)
    }

    pub fn from_fn<F>(n: usize, mut f: F) -> Result<Self, PretreeError>
    where
        F: FnMut(PointId, PointId, PointId) -> bool,
    {
        if n == 0 {
            return Err(PretreeError::NoPoints);
        }
        let mut rel = vec![false; n * n * n];
        for y in 0..n {
            for x in 0..n {
                for z in 0..n {
                    rel[(y * n + x) * n + z] = f(y, x, z);
                }
            }
        }
        Ok(FinitePretree { n, rel })
    }

    #[inline]
    fn idx(&self, y: PointId, x: PointId, z: PointId) -> usize {
        (y * self.n + x) * self.n + z
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn points(&self) -> PointSet {
        (0..self.n).collect()
    }

    #[inline]
    pub fn between(&self, y: PointId, x: PointId, z: PointId) -> bool {
        self.rel[self.idx(y, x, z)]
    }

    /// Flips one triple; used to build mutants in tests.
    pub fn toggled(&self, y: PointId, x: PointId, z: PointId) -> Self {
        let mut t = self.clone();
        let i = t.idx(y, x, z);
        t.rel[i] = !t.rel[i];
        t
    }

    pub fn triples(&self) -> Vec<(PointId, PointId, PointId)> {
        let n = self.n;
        let mut out = Vec::new();
        for y in 0..n {
            for x in 0..n {
                for z in 0..n {
                    if self.between(y, x, z) {
                        out.push((y, x, z));
                    }
                }
            }
        }
        out
    }

    /// Reads `pretree <n>` followed by `b <y> <x> <z>` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, PretreeError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, head) = lines.next().ok_or(PretreeError::Parse(0, "empty input".into()))?;
        let n = match head.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["pretree", n] => n.parse::<usize>().map_err(|e| PretreeError::Parse(ln, e.to_string()))?,
            _ => return Err(PretreeError::Parse(ln, format!("expected `pretree <n>`, got `{head}`"))),
        };
        let mut triples = Vec::new();
        for (ln, l) in lines {
            let tok: Vec<&str> = l.split_whitespace().collect();
            let ["b", y, x, z] = tok.as_slice() else {
                return Err(PretreeError::Parse(ln, format!("expected `b <y> <x> <z>`, got `{l}`")));
            };
            let num = |t: &str| t.parse::<usize>().map_err(|e| PretreeError::Parse(ln, format!("{t}: {e}")));
            triples.push((num(y)?, num(x)?, num(z)?));
        }
        FinitePretree::new(n, triples)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("pretree {}\n", self.n);
        for (y, x, z) in self.triples() {
            out.push_str(&format!("b {y} {x} {z}\n"));
        }
        out
    }

    fn check_point(&self, p: PointId) -> Result<(), PretreeError> {
        if p < self.n {
            Ok(())
        } else {
            Err(PretreeError::UnknownPoint(p))
        }
    }

    fn check_set(&self, s: &PointSet) -> Result<(), PretreeError> {
        for &p in s {
            self.check_point(p)?;
        }
        Ok(())
    }

    pub fn check_axioms(&self) -> AxiomReport {
        let n = self.n;
        let mut rep = AxiomReport::default();
        for y in 0..n {
            for x in 0..n {
                if self.between(y, x, x) {
                    rep.push(Axiom::A1, vec![y, x, x]);
                }
            }
        }
        for y in 0..n {
            for x in 0..n {
                for z in 0..n {
                    if !self.between(y, x, z) {
                        continue;
                    }
                    if self.between(z, x, y) {
                        rep.push(Axiom::A2, vec![y, x, z]);
                    }
                    if !self.between(y, z, x) {
                        rep.push(Axiom::A3, vec![y, x, z]);
                    }
                }
            }
        }
        // A4 with the roles B(z; x, y), w != z.
        for z in 0..n {
            for x in 0..n {
                for y in 0..n {
                    if !self.between(z, x, y) {
                        continue;
                    }
                    for w in 0..n {
                        if w != z && !self.between(z, x, w) && !self.between(z, y, w) {
                            rep.push(Axiom::A4, vec![z, x, y, w]);
                        }
                    }
                }
            }
        }
        rep
    }

    pub fn interval(
        &self,
        x: PointId,
        y: PointId,
        kind: IntervalKind,
    ) -> Result<PointSet, PretreeError> {
        self.check_point(x)?;
        self.check_point(y)?;
        let mut s: PointSet = (0..self.n).filter(|&w| self.between(w, x, y)).collect();
        match kind {
            IntervalKind::Closed => {
                s.insert(x);
                s.insert(y);
            }
            IntervalKind::Open => {
                s.remove(&x);
                s.remove(&y);
            }
            IntervalKind::HalfOpen => {
                s.insert(x);
                s.remove(&y);
            }
        }
        Ok(s)
    }

    /// `[x, y]` without the error path, for internal loops.
    #[inline]
    pub fn in_closed(&self, w: PointId, x: PointId, y: PointId) -> bool {
        w == x || w == y || self.between(w, x, y)
    }

    /// All points of `[x,y] ∩ [y,z] ∩ [z,x]`.
    pub fn median_candidates(
        &self,
        x: PointId,
        y: PointId,
        z: PointId,
    ) -> Result<PointSet, PretreeError> {
        for p in [x, y, z] {
            self.check_point(p)?;
        }
        Ok((0..self.n)
            .filter(|&w| self.in_closed(w, x, y) && self.in_closed(w, y, z) && self.in_closed(w, z, x))
            .collect())
    }

    pub fn median(
        &self,
        x: PointId,
        y: PointId,
        z: PointId,
    ) -> Result<Option<PointId>, PretreeError> {
        let c = self.median_candidates(x, y, z)?;
        match c.len() {
            0 => Ok(None),
            1 => Ok(c.into_iter().next()),
            _ => Err(PretreeError::MedianNotUnique(x, y, z)),
        }
    }

    fn median_req(&self, x: PointId, y: PointId, z: PointId) -> Result<PointId, PretreeError> {
        self.median(x, y, z)?.ok_or(PretreeError::NotMedian(x, y, z))
    }

    pub fn is_median(&self) -> bool {
        let n = self.n;
        for x in 0..n {
            for y in x..n {
                for z in y..n {
                    if !matches!(self.median(x, y, z), Ok(Some(_))) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// First point of the closure of `s` under intervals that is missing from `s`.
    pub fn fullness_gap(&self, s: &PointSet) -> Option<PointId> {
        for &x in s {
            for &y in s {
                for w in 0..self.n {
                    if !s.contains(&w) && self.between(w, x, y) {
                        return Some(w);
                    }
                }
            }
        }
        None
    }

    pub fn is_full(&self, s: &PointSet) -> Result<bool, PretreeError> {
        self.check_set(s)?;
        Ok(self.fullness_gap(s).is_none())
    }

    pub fn is_linear(&self, s: &PointSet) -> Result<bool, PretreeError> {
        self.check_set(s)?;
        let v: Vec<_> = s.iter().copied().collect();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                for k in j + 1..v.len() {
                    let (a, b, c) = (v[i], v[j], v[k]);
                    if !(self.between(a, b, c) || self.between(b, a, c) || self.between(c, a, b)) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    pub fn is_arc(&self, s: &PointSet) -> Result<bool, PretreeError> {
        Ok(!s.is_empty() && self.is_full(s)? && self.is_linear(s)?)
    }

    /// `(T0, P)`: non-terminal points and terminal points.
    pub fn terminal_decomposition(&self) -> (PointSet, PointSet) {
        let n = self.n;
        let mut t0 = PointSet::new();
        let mut p = PointSet::new();
        for y in 0..n {
            let inner = (0..n).any(|x| (0..n).any(|z| self.between(y, x, z)));
            if inner {
                t0.insert(y);
            } else {
                p.insert(y);
            }
        }
        (t0, p)
    }

    /// Gate of `from` in the full set `a`, reached by repeated medians.
    pub fn project(&self, from: PointId, a: &PointSet) -> Result<PointId, PretreeError> {
        let mut it = a.iter().copied();
        let mut t = it.next().ok_or(PretreeError::EmptySet)?;
        for w in it {
            t = self.median_req(from, t, w)?;
        }
        Ok(t)
    }

    pub fn bridge(&self, a: &PointSet, b: &PointSet) -> Result<Bridge, PretreeError> {
        if a.is_empty() || b.is_empty() {
            return Err(PretreeError::EmptySet);
        }
        self.check_set(a)?;
        self.check_set(b)?;
        for s in [a, b] {
            if let Some(w) = self.fullness_gap(s) {
                return Err(PretreeError::NotFull(w));
            }
        }
        let common: Vec<_> = a.intersection(b).copied().collect();
        match common.len() {
            0 => {}
            1 => {
                return Ok(Bridge { t: common[0], q: common[0], interior: PointSet::new() });
            }
            k => return Err(PretreeError::Overlap(k)),
        }
        let b0 = *b.iter().next().expect("nonempty");
        let t = self.project(b0, a)?;
        let q = self.project(t, b)?;
        let seg = self.interval(t, q, IntervalKind::Closed)?;
        debug_assert!(seg.intersection(a).eq([t].iter()));
        debug_assert!(seg.intersection(b).eq([q].iter()));
        let interior = seg.into_iter().filter(|w| !a.contains(w) && !b.contains(w)).collect();
        Ok(Bridge { t, q, interior })
    }

    pub fn median_closure(&self, a: &PointSet) -> Result<PointSet, PretreeError> {
        self.check_set(a)?;
        let mut cur = a.clone();
        loop {
            let v: Vec<_> = cur.iter().copied().collect();
            let mut added = Vec::new();
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    for k in j + 1..v.len() {
                        let m = self.median_req(v[i], v[j], v[k])?;
                        if !cur.contains(&m) {
                            added.push(m);
                        }
                    }
                }
            }
            if added.is_empty() {
                return Ok(cur);
            }
            cur.extend(added);
        }
    }

    /// Checks that a bijection of the points preserves and reflects betweenness.
    pub fn check_automorphism(&self, map: &[PointId]) -> Result<(), PretreeError> {
        let n = self.n;
        if map.len() != n {
            return Err(PretreeError::NotAutomorphism(format!(
                "map has {} entries for {} points",
                map.len(),
                n
            )));
        }
        let mut seen = vec![false; n];
        for &m in map {
            self.check_point(m)?;
            if seen[m] {
                return Err(PretreeError::NotAutomorphism(format!("{m} is hit twice")));
            }
            seen[m] = true;
        }
        for y in 0..n {
            for x in 0..n {
                for z in 0..n {
                    if self.between(y, x, z) != self.between(map[y], map[x], map[z]) {
                        return Err(PretreeError::NotAutomorphism(format!(
                            "triple ({y}, {x}, {z})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Restriction to a subset, renumbered in increasing order.
    pub fn restrict(&self, s: &PointSet) -> Result<(FinitePretree, Vec<PointId>), PretreeError> {
        self.check_set(s)?;
        let ids: Vec<_> = s.iter().copied().collect();
        let t = FinitePretree::from_fn(ids.len(), |y, x, z| self.between(ids[y], ids[x], ids[z]))?;
        Ok((t, ids))
    }
}

/// Betweenness of a finite graph-theoretic tree given by an edge list.
/// Intended for tests and fixtures; see `tree_model` for metric trees.
pub fn tree_pretree(n: usize, edges: &[(PointId, PointId)]) -> FinitePretree {
    let dist = all_pairs_hops(n, edges);
    FinitePretree::from_fn(n, |y, x, z| {
        y != x && y != z && dist[x][y] + dist[y][z] == dist[x][z]
    })
    .expect("n > 0")
}

fn all_pairs_hops(n: usize, edges: &[(PointId, PointId)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut d = vec![vec![usize::MAX; n]; n];
    for (s, row) in d.iter_mut().enumerate() {
        row[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if row[w] == usize::MAX {
                    row[w] = row[u] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    d
}
