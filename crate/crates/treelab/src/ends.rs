//! The end `e` at `−∞` of the axis of a loxodromic `g`, its stabilizer on
//! windows, the `*_g` action and the map `ν` onto the axis.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::actions::{axis_coordinate, median_criterion, Automorphism};
use crate::rational::Q;
use crate::tree_model::TreeSpace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndError {
    #[error("window {0} exhausted before {1}")]
    WindowExhausted(usize, &'static str),
    #[error("{0} is not certified to fix the end")]
    NotInStabilizer(String),
    #[error("point is off the axis")]
    OffAxis,
    #[error("base map does not translate its base point")]
    NotLoxodromic,
    #[error("comparison changes sign along the half-line")]
    Inconsistent,
    #[error("sample has {0} distinct points; need at least 3")]
    SampleTooSmall(usize),
}

/// The end of the axis of `g` opposite to its translation direction, with a
/// base point `a0` on that axis.
#[derive(Debug, Clone)]
pub struct End<'a, S: TreeSpace, G: Automorphism<P = S::P>> {
    pub space: &'a S,
    pub g: G,
    pub a0: S::P,
    pub window: usize,
}

impl<'a, S: TreeSpace, G: Automorphism<P = S::P>> End<'a, S, G> {
    pub fn new(space: &'a S, g: G, a0: S::P, window: usize) -> Result<Self, EndError> {
        if g.apply(&a0) == a0 || !median_criterion(space, &g, &a0) {
            return Err(EndError::NotLoxodromic);
        }
        Ok(End { space, g, a0, window })
    }

    pub fn on_axis(&self, p: &S::P) -> bool {
        median_criterion(self.space, &self.g, p)
    }

    /// Signed position along the axis, increasing in the direction of `g`.
    pub fn coord(&self, p: &S::P) -> Q {
        axis_coordinate(self.space, &self.g, &self.a0, p)
    }

    /// `g^k(a0)`.
    pub fn axis_point(&self, k: i64) -> S::P {
        let mut p = self.a0.clone();
        for _ in 0..k.unsigned_abs() {
            p = if k > 0 { self.g.apply(&p) } else { self.g.apply_inv(&p) };
        }
        p
    }

    /// Gate of `p` on the sampled axis segment `[g^{-2W}(a0), g^{2W}(a0)]`.
    pub fn project(&self, p: &S::P) -> S::P {
        let w = 2 * self.window as i64;
        self.space.median(p, &self.axis_point(-w), &self.axis_point(w))
    }

    /// `x <_e y`: `x` lies strictly inside the ray from `y` toward the end.
    pub fn less(&self, x: &S::P, y: &S::P) -> bool {
        self.on_axis(x) && self.coord(x) < self.coord(&self.project(y))
    }

    /// Deep half-line sample `g^{-k}(a0)` for `k` in `lo..=hi`.
    fn deep(&self, lo: usize, hi: usize) -> Vec<S::P> {
        let mut p = self.axis_point(-(lo as i64));
        let mut out = Vec::with_capacity(hi + 1 - lo);
        for _ in lo..=hi {
            let next = self.g.apply_inv(&p);
            out.push(std::mem::replace(&mut p, next));
        }
        out
    }

    /// `h` maps the deep sample `g^{-k}(a0)`, `W ≤ k ≤ 3W`, into the axis,
    /// strictly decreasing with `k`.
    pub fn stabilizes(&self, h: &G) -> bool {
        let pts = self.deep(self.window, 3 * self.window);
        let imgs: Vec<S::P> = pts.iter().map(|p| h.apply(p)).collect();
        if !imgs.iter().all(|p| self.on_axis(p)) {
            return false;
        }
        let c: Vec<Q> = imgs.iter().map(|p| self.coord(p)).collect();
        c.windows(2).all(|w| w[1] < w[0])
    }

    /// `h` fixes the deep sample pointwise.
    pub fn fixes_pointwise(&self, h: &G) -> bool {
        self.deep(self.window, 3 * self.window).iter().all(|p| h.apply(p) == *p)
    }

    fn require(&self, h: &G) -> Result<(), EndError> {
        if self.stabilizes(h) {
            Ok(())
        } else {
            Err(EndError::NotInStabilizer(h.label()))
        }
    }

    /// Smallest `n0` with `g^{-n0}(c) <_e a0, h(a0), h⁻¹(a0)`.
    pub fn n0(&self, h: &G, c: &S::P) -> Result<usize, EndError> {
        let refs = [self.a0.clone(), h.apply(&self.a0), h.apply_inv(&self.a0)];
        let mut p = c.clone();
        for n in 0..=self.window {
            if refs.iter().all(|r| self.less(&p, r)) {
                return Ok(n);
            }
            p = self.g.apply_inv(&p);
        }
        Err(EndError::WindowExhausted(self.window, "n0"))
    }

    /// `g^n h g^{-n}(c)`.
    pub fn star_at(&self, h: &G, c: &S::P, n: usize) -> S::P {
        let gn = self.g.power(n as i64);
        gn.apply(&h.apply(&gn.apply_inv(c)))
    }

    /// `h *_g c`.
    pub fn star_action(&self, h: &G, c: &S::P) -> Result<S::P, EndError> {
        self.require(h)?;
        if !self.on_axis(c) {
            return Err(EndError::OffAxis);
        }
        let n = self.n0(h, c)?;
        let out = self.star_at(h, c, n);
        if !self.on_axis(&out) {
            return Err(EndError::OffAxis);
        }
        Ok(out)
    }

    /// `ν(h) = h *_g a0`.
    pub fn nu(&self, h: &G) -> Result<S::P, EndError> {
        self.star_action(h, &self.a0)
    }

    /// Compares `h1, h2` on the deep sample `2W ≤ k ≤ 3W`.
    pub fn coset_compare(&self, h1: &G, h2: &G) -> Result<CosetOrderDatum<S::P>, EndError> {
        self.require(h1)?;
        self.require(h2)?;
        self.compare_stabilizers(h1, h2)
    }

    /// [`End::coset_compare`] for elements already known to pass [`End::stabilizes`].
    pub fn compare_stabilizers(&self, h1: &G, h2: &G) -> Result<CosetOrderDatum<S::P>, EndError> {
        let pts = self.deep(2 * self.window, 3 * self.window);
        let mut verdict = None;
        for t in &pts {
            let (x, y) = (self.coord(&h1.apply(t)), self.coord(&h2.apply(t)));
            let o = x.cmp(&y);
            match verdict {
                None => verdict = Some(o),
                Some(v) if v != o => return Err(EndError::Inconsistent),
                _ => {}
            }
        }
        Ok(CosetOrderDatum { verdict: verdict.expect("nonempty sample"), witness: pts[0].clone() })
    }

    /// For each point, a sample element taking it into `(−∞, a0]`.
    pub fn e_contractible_check<'g>(&self, c: &[S::P], sample: &'g [(String, G)]) -> Contractibility<'g, S::P> {
        let zero = Q::zero();
        let certified: Vec<&(String, G)> = sample.iter().filter(|(_, h)| self.stabilizes(h)).collect();
        let mut witnesses = Vec::new();
        let mut unreached = Vec::new();
        for p in c {
            let hit = certified.iter().find(|(_, h)| {
                let q = h.apply(p);
                self.on_axis(&q) && self.coord(&q) <= zero
            });
            match hit {
                Some((name, _)) => witnesses.push((p.clone(), name.as_str())),
                None => unreached.push(p.clone()),
            }
        }
        Contractibility { witnesses, unreached, certified: certified.len() }
    }
}

/// Verdict of `h1` against `h2` in the end order, with the first deep
/// sample point used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetOrderDatum<P> {
    pub verdict: Ordering,
    pub witness: P,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contractibility<'g, P> {
    pub witnesses: Vec<(P, &'g str)>,
    pub unreached: Vec<P>,
    pub certified: usize,
}

impl<P> Contractibility<'_, P> {
    pub fn passed(&self) -> bool {
        self.unreached.is_empty()
    }
}

/// Reduced words of length at most `bound` over `gens` and their inverses,
/// as composed maps labelled by the word (rightmost acts first).
pub fn word_sample<G: Automorphism>(gens: &[G], bound: usize) -> Vec<(String, G)> {
    let mut letters: Vec<(String, G, usize, bool)> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        letters.push((g.label(), g.clone(), i, false));
        letters.push((format!("{}^-1", g.label()), g.inverse(), i, true));
    }
    let id = gens.first().map(|g| g.compose(&g.inverse()));
    let Some(id) = id else { return Vec::new() };
    let mut out = vec![("id".to_string(), id.clone())];
    let mut layer: Vec<(Vec<(usize, bool)>, String, G)> = vec![(Vec::new(), "id".into(), id)];
    for _ in 0..bound {
        let mut next = Vec::new();
        for (w, name, m) in &layer {
            for (lname, l, i, inv) in &letters {
                if w.first() == Some(&(*i, !*inv)) {
                    continue;
                }
                let mut w2 = vec![(*i, *inv)];
                w2.extend(w.iter().copied());
                let name2 = if w.is_empty() { lname.clone() } else { format!("{lname}.{name}") };
                next.push((w2, name2, l.compose(m)));
            }
        }
        out.extend(next.iter().map(|(_, n, m)| (n.clone(), m.clone())));
        layer = next;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Density {
    /// Some gap is below the resolution.
    Dense { min_gap: Q, resolution: Q },
    /// Smallest gap `step`; `all_multiples` records whether every gap is an
    /// integer multiple of it.
    CyclicWithGenerator { step: Q, all_multiples: bool },
}

/// Dense-or-cyclic verdict on a sample of axis coordinates, relative to the
/// given resolution.
pub fn dense_or_cyclic(points: &[Q], resolution: &Q) -> Result<Density, EndError> {
    let mut v: Vec<Q> = points.to_vec();
    v.sort();
    v.dedup();
    if v.len() < 3 {
        return Err(EndError::SampleTooSmall(v.len()));
    }
    let gaps: Vec<Q> = v.windows(2).map(|w| &w[1] - &w[0]).collect();
    let min_gap = gaps.iter().min().expect("nonempty").clone();
    if min_gap < *resolution {
        return Ok(Density::Dense { min_gap, resolution: resolution.clone() });
    }
    let all_multiples = gaps.iter().all(|g| (g / &min_gap).is_integer());
    debug_assert!(min_gap.is_positive());
    Ok(Density::CyclicWithGenerator { step: min_gap, all_multiples })
}
