//! The free-group example: `θ`, the twisted translation `φ` along the axis of
//! `ba`, the group `G = ⟨a², b², φ⟩`, and bounded-window checks of its orbit
//! structure.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;

use crate::actions::Automorphism;
use crate::rational::{half, Q};
use crate::tree_model::{median_closure_in, F2Tree, Letter, Pt, SimplicialTree, TreeSpace, Word};

pub type F2Point = Pt<Word>;

/// Swaps `a ↔ b` letterwise.
pub fn theta(w: &Word) -> Word {
    w.map_letters(|l| match l {
        Letter::A => Letter::B,
        Letter::B => Letter::A,
        Letter::AInv => Letter::BInv,
        Letter::BInv => Letter::AInv,
    })
}

/// Length of the longest prefix of `w` alternating `first, second, first, …`.
fn alternating_prefix(w: &Word, first: Letter, second: Letter) -> usize {
    w.letters()
        .iter()
        .enumerate()
        .take_while(|(i, &l)| l == if i % 2 == 0 { first } else { second })
        .count()
}

fn repeat(pattern: &[Letter], k: usize) -> Vec<Letter> {
    pattern.iter().copied().cycle().take(pattern.len() * k).collect()
}

/// The axis of `ba` as a `ℤ`-indexed line: `0 ↦ 1`, `1 ↦ b`, `2 ↦ ba`,
/// `-1 ↦ a⁻¹`, `-2 ↦ a⁻¹b⁻¹`, …
pub fn axis_point(n: i64) -> Word {
    let m = n.unsigned_abs() as usize;
    let (first, second) = if n >= 0 { (Letter::B, Letter::A) } else { (Letter::AInv, Letter::BInv) };
    Word::from_letters((0..m).map(|i| if i % 2 == 0 { first } else { second }))
}

/// `w = axis_point(n) · rest` with the axis prefix as long as possible.
pub fn axis_decompose(w: &Word) -> (i64, Word) {
    let neg = alternating_prefix(w, Letter::AInv, Letter::BInv);
    if neg > 0 {
        return (-(neg as i64), w.suffix_from(neg));
    }
    let pos = alternating_prefix(w, Letter::B, Letter::A);
    (pos as i64, w.suffix_from(pos))
}

pub fn on_axis(w: &Word) -> bool {
    axis_decompose(w).1.is_empty()
}

/// `φ` by the two-form case split on the longest axis prefix.
///
/// The second form is applied for every `k ≥ 0`; with `k = 0` it covers
/// words starting `a⁻¹ w₁` with `w₁` leaving the axis.
pub fn phi(w: &Word) -> Word {
    let (a, b, ai, bi) = (Letter::A, Letter::B, Letter::AInv, Letter::BInv);
    let neg = alternating_prefix(w, ai, bi);
    if neg > 0 {
        let rest = theta(&w.suffix_from(neg));
        let head = if neg % 2 == 1 {
            // (a⁻¹b⁻¹)^k a⁻¹ w₁ ↦ (a⁻¹b⁻¹)^k θ(w₁)
            repeat(&[ai, bi], (neg - 1) / 2)
        } else {
            // (a⁻¹b⁻¹)^k w₁ ↦ (a⁻¹b⁻¹)^{k-1} a⁻¹ θ(w₁)
            let mut h = repeat(&[ai, bi], neg / 2 - 1);
            h.push(ai);
            h
        };
        return Word::from_letters(head).mul(&rest);
    }
    let pos = alternating_prefix(w, b, a);
    let (k, eps) = (pos / 2, pos % 2);
    let rest = theta(&w.suffix_from(pos));
    // (ba)^k b^ε w₁ ↦ (ba)^k b^ε a^ε b^{1-ε} θ(w₁)
    let mut head = repeat(&[b, a], k);
    if eps == 1 {
        head.extend([b, a]);
    } else {
        head.push(b);
    }
    Word::from_letters(head).mul(&rest)
}

/// Inverse of [`phi`]: shifts the axis prefix back by one and untwists the tail.
pub fn phi_inverse(w: &Word) -> Word {
    let (n, rest) = axis_decompose(w);
    axis_point(n - 1).mul(&theta(&rest))
}

/// A signed permutation of `{a, b}`, extended to an automorphism of `F2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LetterPerm {
    pub a: Letter,
    pub b: Letter,
}

impl LetterPerm {
    pub const THETA: LetterPerm = LetterPerm { a: Letter::B, b: Letter::A };

    pub fn new(a: Letter, b: Letter) -> Option<LetterPerm> {
        let base = |l: Letter| matches!(l, Letter::A | Letter::AInv);
        (base(a) != base(b)).then_some(LetterPerm { a, b })
    }

    /// All eight signed permutations.
    pub fn all() -> Vec<LetterPerm> {
        let mut v = Vec::new();
        for a in Letter::ALL {
            for b in Letter::ALL {
                if let Some(p) = LetterPerm::new(a, b) {
                    v.push(p);
                }
            }
        }
        v
    }

    pub fn image(&self, l: Letter) -> Letter {
        match l {
            Letter::A => self.a,
            Letter::B => self.b,
            Letter::AInv => self.a.inv(),
            Letter::BInv => self.b.inv(),
        }
    }

    pub fn apply(&self, w: &Word) -> Word {
        w.map_letters(|l| self.image(l))
    }

    pub fn inverse(&self) -> LetterPerm {
        let pre = |target: Letter| {
            Letter::ALL.into_iter().find(|&l| self.image(l) == target).expect("bijective")
        };
        LetterPerm { a: pre(Letter::A), b: pre(Letter::B) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum F2Op {
    LeftMul(Word),
    Perm(LetterPerm),
    /// `φ^k`.
    Phi(i64),
}

impl F2Op {
    fn apply(&self, w: &Word) -> Word {
        match self {
            F2Op::LeftMul(u) => u.mul(w),
            F2Op::Perm(p) => p.apply(w),
            F2Op::Phi(k) => {
                let mut x = w.clone();
                for _ in 0..k.unsigned_abs() {
                    x = if *k > 0 { phi(&x) } else { phi_inverse(&x) };
                }
                x
            }
        }
    }

    fn inverse(&self) -> F2Op {
        match self {
            F2Op::LeftMul(u) => F2Op::LeftMul(u.inverse()),
            F2Op::Perm(p) => F2Op::Perm(p.inverse()),
            F2Op::Phi(k) => F2Op::Phi(-k),
        }
    }
}

/// An isometry of the Cayley tree, as a sequence of ops applied in order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct F2Map {
    ops: Vec<F2Op>,
    name: String,
}

impl F2Map {
    pub fn identity() -> Self {
        F2Map { ops: Vec::new(), name: "id".into() }
    }

    pub fn from_op(op: F2Op, name: &str) -> Self {
        F2Map { ops: vec![op], name: name.into() }
    }

    pub fn left_mul(w: &Word) -> Self {
        F2Map::from_op(F2Op::LeftMul(w.clone()), &format!("L[{w}]"))
    }

    pub fn phi() -> Self {
        F2Map::from_op(F2Op::Phi(1), "phi")
    }

    pub fn theta() -> Self {
        F2Map::from_op(F2Op::Perm(LetterPerm::THETA), "theta")
    }

    pub fn perm(p: LetterPerm) -> Self {
        F2Map::from_op(F2Op::Perm(p), &format!("P[{}{}]", p.a.as_char(), p.b.as_char()))
    }

    pub fn ops(&self) -> &[F2Op] {
        &self.ops
    }

    pub fn apply_word(&self, w: &Word) -> Word {
        self.ops.iter().fold(w.clone(), |x, op| op.apply(&x))
    }

    pub fn apply_word_inv(&self, w: &Word) -> Word {
        self.ops.iter().rev().fold(w.clone(), |x, op| op.inverse().apply(&x))
    }

    fn map_point(&self, p: &F2Point, f: impl Fn(&Word) -> Word) -> F2Point {
        match p {
            Pt::V(v) => Pt::V(f(v)),
            Pt::E { lo, hi, off } => {
                let (x, y) = (f(lo), f(hi));
                crate::tree_model::simplicial_on_edge(&F2Tree::default(), &x, &y, off)
            }
        }
    }

    pub fn rename(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }
}

impl Automorphism for F2Map {
    type P = F2Point;

    fn apply(&self, p: &F2Point) -> F2Point {
        self.map_point(p, |w| self.apply_word(w))
    }

    fn apply_inv(&self, p: &F2Point) -> F2Point {
        self.map_point(p, |w| self.apply_word_inv(w))
    }

    fn compose(&self, o: &Self) -> Self {
        let mut ops = o.ops.clone();
        ops.extend(self.ops.iter().cloned());
        F2Map { ops, name: format!("{}.{}", self.name, o.name) }
    }

    fn inverse(&self) -> Self {
        F2Map { ops: self.ops.iter().rev().map(F2Op::inverse).collect(), name: format!("{}^-1", self.name) }
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}

/// Generators of `G` and their inverses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GGen {
    A2,
    B2,
    Phi,
    A2Inv,
    B2Inv,
    PhiInv,
}

impl GGen {
    pub const ALL: [GGen; 6] = [GGen::A2, GGen::B2, GGen::Phi, GGen::A2Inv, GGen::B2Inv, GGen::PhiInv];

    pub fn inv(self) -> GGen {
        match self {
            GGen::A2 => GGen::A2Inv,
            GGen::B2 => GGen::B2Inv,
            GGen::Phi => GGen::PhiInv,
            GGen::A2Inv => GGen::A2,
            GGen::B2Inv => GGen::B2,
            GGen::PhiInv => GGen::Phi,
        }
    }

    pub fn op(self) -> F2Op {
        let w = |s: &str| Word::parse(s).expect("literal");
        match self {
            GGen::A2 => F2Op::LeftMul(w("aa")),
            GGen::B2 => F2Op::LeftMul(w("bb")),
            GGen::Phi => F2Op::Phi(1),
            GGen::A2Inv => F2Op::LeftMul(w("AA")),
            GGen::B2Inv => F2Op::LeftMul(w("BB")),
            GGen::PhiInv => F2Op::Phi(-1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GGen::A2 => "a2",
            GGen::B2 => "b2",
            GGen::Phi => "phi",
            GGen::A2Inv => "a2^-1",
            GGen::B2Inv => "b2^-1",
            GGen::PhiInv => "phi^-1",
        }
    }

    pub fn map(self) -> F2Map {
        F2Map::from_op(self.op(), self.name())
    }
}

/// Words over the generators of `G` of length at most `bound`, with no
/// generator next to its inverse, as maps (rightmost letter acts first).
pub fn g_words(bound: usize) -> Vec<(Vec<GGen>, F2Map)> {
    let mut out = vec![(Vec::new(), F2Map::identity())];
    let mut layer = vec![(Vec::<GGen>::new(), F2Map::identity())];
    for _ in 0..bound {
        let mut next = Vec::new();
        for (w, m) in &layer {
            for g in GGen::ALL {
                if w.first() == Some(&g.inv()) {
                    continue;
                }
                let mut w2 = vec![g];
                w2.extend(w.iter().copied());
                let name = w2.iter().map(|g| g.name()).collect::<Vec<_>>().join(".");
                next.push((w2, g.map().compose(m).rename(&name)));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Points reachable from `v` by at most `bound` generator steps.
pub fn g_orbit(v: &F2Point, bound: usize) -> BTreeSet<F2Point> {
    let gens: Vec<F2Map> = GGen::ALL.iter().map(|g| g.map()).collect();
    let mut seen = BTreeSet::from([v.clone()]);
    let mut frontier = vec![v.clone()];
    for _ in 0..bound {
        let mut next = Vec::new();
        for p in &frontier {
            for g in &gens {
                let q = g.apply(p);
                if seen.insert(q.clone()) {
                    next.push(q);
                }
            }
        }
        frontier = next;
    }
    seen
}

/// Hop/metric distance of a point from the identity vertex.
pub fn depth(p: &F2Point) -> Q {
    F2Tree::default().dist(p, &Pt::V(Word::identity()))
}

pub fn ball_vertices(radius: usize) -> Vec<Word> {
    Word::all_up_to(radius)
}

/// Outcome of one bounded window check; `detail` holds `key=value` tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: BTreeMap<String, String>,
}

impl WindowCheck {
    fn new(name: &'static str) -> Self {
        WindowCheck { name, passed: true, detail: BTreeMap::new() }
    }

    fn set(&mut self, k: &str, v: impl ToString) {
        self.detail.insert(k.into(), v.to_string());
    }
}

/// `φ² = (ba)·` on all reduced words of length at most `bound`.
pub fn check_phi_squared(bound: usize) -> WindowCheck {
    let mut c = WindowCheck::new("phi2");
    let ba = Word::parse("ba").expect("literal");
    let words = Word::all_up_to(bound);
    let bad: Vec<_> = words.iter().filter(|w| phi(&phi(w)) != ba.mul(w)).collect();
    c.passed = bad.is_empty();
    c.set("words", words.len());
    c.set("mismatches", bad.len());
    if let Some(w) = bad.first() {
        c.set("first_mismatch", w);
    }
    c
}

/// `a² = a φ⁻¹ a⁻¹ φ`, `b² = φ a φ⁻¹ a⁻¹` as maps (rightmost acts first),
/// plus the even-to-odd parity. The variants with `φ` in place of `φ⁻¹` are
/// reported alongside under `variant_*`; they do not affect the verdict.
pub fn verify_generator_identities(bound: usize) -> WindowCheck {
    let mut c = WindowCheck::new("identities");
    let w = |s: &str| Word::parse(s).expect("literal");
    let (a, ai) = (w("a"), w("A"));
    let (a2, b2) = (w("aa"), w("bb"));
    let mut bad = [0usize; 4];
    let mut bad_parity = 0usize;
    let mut first_bad: Option<(Word, Word)> = None;
    let words = Word::all_up_to(bound);
    for x in &words {
        let stated_a = a.mul(&phi_inverse(&ai.mul(&phi(x))));
        let stated_b = phi(&a.mul(&phi_inverse(&ai.mul(x))));
        let variant_a = a.mul(&phi(&ai.mul(&phi(x))));
        let variant_b = phi(&a.mul(&phi(&ai.mul(x))));
        let want = [&a2, &b2, &a2, &b2];
        for (i, got) in [&stated_a, &stated_b, &variant_a, &variant_b].into_iter().enumerate() {
            if *got != want[i].mul(x) {
                bad[i] += 1;
                if i == 0 && first_bad.is_none() {
                    first_bad = Some((x.clone(), got.clone()));
                }
            }
        }
        if x.len().is_even() && phi(x).len().is_even() {
            bad_parity += 1;
        }
    }
    c.passed = bad[0] == 0 && bad[1] == 0 && bad_parity == 0;
    c.set("words", words.len());
    c.set("a2_mismatches", bad[0]);
    c.set("b2_mismatches", bad[1]);
    c.set("variant_a2_mismatches", bad[2]);
    c.set("variant_b2_mismatches", bad[3]);
    c.set("parity_mismatches", bad_parity);
    if let Some((x, got)) = first_bad {
        c.set("a2_witness", format!("{x}->{got}"));
    }
    c
}

/// Every ball vertex lies in the median closure of the clipped orbit of `1`.
pub fn check_orbit_closure(radius: usize, bound: usize) -> WindowCheck {
    let mut c = WindowCheck::new("orbit-closure");
    let r = Q::from_integer(radius.into());
    let root = Pt::V(Word::identity());
    let orbit: Vec<F2Point> = g_orbit(&root, bound).into_iter().filter(|p| depth(p) <= r).collect();
    let closure: BTreeSet<F2Point> = median_closure_in(&F2Tree::default(), &orbit).into_iter().collect();
    let ball = ball_vertices(radius);
    let missing: Vec<_> = ball.iter().filter(|w| !closure.contains(&Pt::V((*w).clone()))).collect();
    c.passed = missing.is_empty();
    c.set("radius", radius);
    c.set("word_bound", bound);
    c.set("orbit_points", orbit.len());
    c.set("closure_points", closure.len());
    c.set("ball_vertices", ball.len());
    c.set("missing", missing.len());
    c
}

/// Orbit labels on the clipped closure of `v`, and points per edge.
pub fn check_orbit_labels(v: &F2Point, radius: usize, bound: usize) -> WindowCheck {
    let mut c = WindowCheck::new("orbit-labels");
    let r = Q::from_integer(radius.into());
    let clip = |s: BTreeSet<F2Point>| -> BTreeSet<F2Point> { s.into_iter().filter(|p| depth(p) <= r).collect() };
    let orbit_v = clip(g_orbit(v, bound));
    let orbit_root = clip(g_orbit(&Pt::V(Word::identity()), bound));
    let seed: Vec<F2Point> = orbit_v.iter().cloned().collect();
    let closure = median_closure_in(&F2Tree::default(), &seed);
    let mut labels = BTreeSet::new();
    let mut unlabeled = 0usize;
    for p in &closure {
        let in_v = orbit_v.contains(p);
        let in_root = orbit_root.contains(p);
        match (in_v, in_root) {
            (true, false) => {
                labels.insert("Gv");
            }
            (false, true) => {
                labels.insert("G1");
            }
            (true, true) => {
                labels.insert("G1=Gv");
            }
            (false, false) => unlabeled += 1,
        }
    }
    let mut per_edge: BTreeMap<(Word, Word), usize> = BTreeMap::new();
    for p in &orbit_v {
        if let Pt::E { lo, hi, .. } = p {
            *per_edge.entry((lo.clone(), hi.clone())).or_default() += 1;
        }
    }
    let max_per_edge = per_edge.values().copied().max().unwrap_or(0);
    let vertex_orbit_points = orbit_v.iter().filter(|p| p.is_vertex()).count();
    let two_orbits = if v.is_vertex() { labels.len() <= 2 } else { labels.len() == 2 };
    c.passed = two_orbits && unlabeled == 0 && max_per_edge <= 1 && (v.is_vertex() || vertex_orbit_points == 0);
    c.set("radius", radius);
    c.set("word_bound", bound);
    c.set("orbit_points", orbit_v.len());
    c.set("closure_points", closure.len());
    c.set("orbit_labels", labels.len());
    c.set("unlabeled", unlabeled);
    c.set("max_orbit_points_per_edge", max_per_edge);
    c
}

/// `a^k` for some `k`.
pub fn on_a_axis(w: &Word) -> bool {
    w.letters().iter().all(|&l| l == Letter::A) || w.letters().iter().all(|&l| l == Letter::AInv)
}

fn a_power(w: &Word) -> i64 {
    let n = w.len() as i64;
    if w.first() == Some(Letter::AInv) {
        -n
    } else {
        n
    }
}

/// Window certificate for stabilizing the `+∞` end of the axis of `a`:
/// `a^m, …, a^{2m}` all land on that axis, increasing.
pub fn stabilizes_a_end(g: &F2Map, m: usize) -> bool {
    let a = Word::parse("a").expect("literal");
    let mut prev: Option<i64> = None;
    for k in m..=2 * m {
        let img = g.apply_word(&a.pow(k as i64));
        if !on_a_axis(&img) {
            return false;
        }
        let p = a_power(&img);
        if prev.is_some_and(|q| p != q + 1) {
            return false;
        }
        prev = Some(p);
    }
    true
}

/// Distances among `G_e`-images of `v` on the axis of `a` are all even.
pub fn check_even_axis_distances(v: &Word, bound: usize, window: usize) -> WindowCheck {
    let mut c = WindowCheck::new("even-distance");
    let mut stabilizers = 0usize;
    let mut images = BTreeSet::new();
    for (_, g) in g_words(bound) {
        if !stabilizes_a_end(&g, window) {
            continue;
        }
        stabilizers += 1;
        let img = g.apply_word(v);
        if on_a_axis(&img) {
            images.insert(a_power(&img));
        }
    }
    let pts: Vec<i64> = images.into_iter().collect();
    let odd = pts.iter().flat_map(|x| pts.iter().map(move |y| (x - y).abs())).filter(|d| d % 2 == 1).count();
    let v0 = if on_a_axis(v) { Some(a_power(v)) } else { None };
    let min_pos = v0.and_then(|z| pts.iter().map(|p| (p - z).abs()).filter(|&d| d > 0).min());
    c.passed = stabilizers > 0 && odd == 0 && min_pos.is_none_or(|d| d % 2 == 0);
    c.set("word_bound", bound);
    c.set("window", window);
    c.set("stabilizers", stabilizers);
    c.set("axis_images", pts.len());
    c.set("odd_pairs", odd);
    c.set("min_positive_distance", min_pos.map_or("none".to_string(), |d| d.to_string()));
    if stabilizers == 0 {
        c.set("inconclusive", "no_stabilizers");
    }
    c
}

/// The image of the oriented edge `1 → a` under `g` is again positively labelled.
pub fn preserves_edge_orientation(g: &F2Map) -> bool {
    let a = Word::parse("a").expect("literal");
    let (x, y) = (g.apply_word(&Word::identity()), g.apply_word(&a));
    let step = x.inverse().mul(&y);
    matches!(step.letters(), [Letter::A] | [Letter::B])
}

/// The midpoint of the edge from `1` to `a`.
pub fn edge_midpoint_a() -> F2Point {
    Pt::E { lo: Word::identity(), hi: Word::parse("a").expect("literal"), off: half() }
}

/// Parses a word, or an edge point `<word>-<word>:<q>` (offset from the first).
pub fn parse_point(s: &str) -> Option<F2Point> {
    let s = s.strip_prefix('@').unwrap_or(s);
    match s.split_once(':') {
        None => Word::parse(s).map(Pt::V),
        Some((e, off)) => {
            let (u, v) = e.split_once('-')?;
            let (u, v) = (Word::parse(u)?, Word::parse(v)?);
            if F2Tree::word_dist(&u, &v) != 1 {
                return None;
            }
            let off = crate::rational::parse_q(off)?;
            let t = F2Tree::default();
            if off <= crate::rational::zero() || off >= t.edge_len(&u, &v) {
                return None;
            }
            Some(crate::tree_model::simplicial_on_edge(&t, &u, &v, &off))
        }
    }
}
