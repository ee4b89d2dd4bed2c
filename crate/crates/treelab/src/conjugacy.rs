//! X-paths in conjugacy classes: transvections in `SL(n, p)` with the
//! commutator formula, and breadth-first search in finite group tables.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConjugacyError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("v·u must vanish (got {0})")]
    NotOrthogonal(u32),
    #[error("zero {0}")]
    Zero(&'static str),
    #[error("matrix has determinant {0}, expected 1")]
    NotSpecial(u32),
    #[error("commutator precondition fails: {0}")]
    Precondition(String),
    #[error("no path through the generic construction: {0}")]
    NoPath(String),
    #[error("group order exceeds cap {0}")]
    CapExceeded(usize),
    #[error("element not in X")]
    NotInClass,
    #[error("element not in the group")]
    NotInGroup,
    #[error("malformed input: {0}")]
    Parse(String),
}

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// An element of `GF(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fp {
    r: u32,
    p: u32,
}

impl Fp {
    pub fn new(r: i64, p: u32) -> Fp {
        Fp { r: r.rem_euclid(p as i64) as u32, p }
    }

    pub fn residue(self) -> u32 {
        self.r
    }

    pub fn modulus(self) -> u32 {
        self.p
    }

    pub fn add(self, o: Fp) -> Fp {
        Fp { r: (self.r + o.r) % self.p, p: self.p }
    }

    pub fn neg(self) -> Fp {
        Fp { r: (self.p - self.r) % self.p, p: self.p }
    }

    pub fn mul(self, o: Fp) -> Fp {
        Fp { r: ((self.r as u64 * o.r as u64) % self.p as u64) as u32, p: self.p }
    }

    pub fn inv(self) -> Option<Fp> {
        (self.r != 0).then(|| Fp { r: pow_mod(self.r, self.p - 2, self.p), p: self.p })
    }
}

fn pow_mod(b: u32, mut e: u32, p: u32) -> u32 {
    let (mut acc, mut b) = (1u64 % p as u64, b as u64 % p as u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    acc as u32
}

fn inv_mod(a: u32, p: u32) -> u32 {
    pow_mod(a, p - 2, p)
}

/// Dot product mod `p`.
pub fn dot(a: &[u32], b: &[u32], p: u32) -> u32 {
    (a.iter().zip(b).map(|(&x, &y)| x as u64 * y as u64).sum::<u64>() % p as u64) as u32
}

/// An `n × n` matrix over `GF(p)`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mat {
    n: usize,
    p: u32,
    a: Vec<u32>,
}

impl Mat {
    pub fn new(n: usize, p: u32, entries: &[i64]) -> Result<Mat, ConjugacyError> {
        if !is_prime(p) {
            return Err(ConjugacyError::NotPrime(p));
        }
        if entries.len() != n * n {
            return Err(ConjugacyError::Dimension(format!("{} entries for n={n}", entries.len())));
        }
        Ok(Mat { n, p, a: entries.iter().map(|&x| x.rem_euclid(p as i64) as u32).collect() })
    }

    pub fn identity(n: usize, p: u32) -> Mat {
        let mut a = vec![0; n * n];
        for i in 0..n {
            a[i * n + i] = 1;
        }
        Mat { n, p, a }
    }

    /// `t_ij(α) = I + α E_ij` (0-based), `i ≠ j`.
    pub fn elementary(n: usize, p: u32, i: usize, j: usize, alpha: u32) -> Mat {
        let mut m = Mat::identity(n, p);
        m.a[i * n + j] = (m.a[i * n + j] + alpha) % p;
        m
    }

    /// Parses a row-major comma list of `n²` integers.
    pub fn parse(s: &str, n: usize, p: u32) -> Result<Mat, ConjugacyError> {
        let v: Result<Vec<i64>, _> = s.split(',').map(|t| t.trim().parse::<i64>()).collect();
        let v = v.map_err(|e| ConjugacyError::Parse(format!("{s}: {e}")))?;
        Mat::new(n, p, &v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.a[i * self.n + j]
    }

    pub fn entries(&self) -> &[u32] {
        &self.a
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat::identity(self.n, self.p)
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        let (n, p) = (self.n, self.p as u64);
        let mut a = vec![0u32; n * n];
        for i in 0..n {
            for k in 0..n {
                let x = self.a[i * n + k] as u64;
                if x == 0 {
                    continue;
                }
                for j in 0..n {
                    a[i * n + j] = ((a[i * n + j] as u64 + x * o.a[k * n + j] as u64) % p) as u32;
                }
            }
        }
        Mat { n, p: self.p, a }
    }

    pub fn sub(&self, o: &Mat) -> Mat {
        let p = self.p;
        Mat { n: self.n, p, a: self.a.iter().zip(&o.a).map(|(&x, &y)| (x + p - y) % p).collect() }
    }

    pub fn apply_col(&self, u: &[u32]) -> Vec<u32> {
        (0..self.n).map(|i| dot(&self.a[i * self.n..(i + 1) * self.n], u, self.p)).collect()
    }

    pub fn apply_row(&self, v: &[u32]) -> Vec<u32> {
        (0..self.n).map(|j| dot(v, &(0..self.n).map(|i| self.get(i, j)).collect::<Vec<_>>(), self.p)).collect()
    }

    /// Row echelon form with the determinant factor and rank.
    fn eliminate(&self) -> (Vec<u32>, u32, usize) {
        let (n, p) = (self.n, self.p);
        let mut a = self.a.clone();
        let mut det = 1u64;
        let mut rank = 0;
        for col in 0..n {
            let Some(piv) = (rank..n).find(|&r| a[r * n + col] != 0) else {
                det = 0;
                continue;
            };
            if piv != rank {
                for j in 0..n {
                    a.swap(piv * n + j, rank * n + j);
                }
                det = det * (p as u64 - 1) % p as u64;
            }
            let pv = a[rank * n + col];
            det = det * pv as u64 % p as u64;
            let pinv = inv_mod(pv, p) as u64;
            for r in 0..n {
                if r == rank || a[r * n + col] == 0 {
                    continue;
                }
                let f = a[r * n + col] as u64 * pinv % p as u64;
                for j in 0..n {
                    let sub = f * a[rank * n + j] as u64 % p as u64;
                    a[r * n + j] = ((a[r * n + j] as u64 + p as u64 - sub) % p as u64) as u32;
                }
            }
            rank += 1;
        }
        (a, det as u32, rank)
    }

    pub fn det(&self) -> u32 {
        self.eliminate().1
    }

    pub fn rank(&self) -> usize {
        self.eliminate().2
    }

    pub fn inverse(&self) -> Option<Mat> {
        let n = self.n;
        let mut aug = Mat { n: 2 * n, p: self.p, a: vec![0; 4 * n * n] };
        for i in 0..n {
            for j in 0..n {
                aug.a[i * 2 * n + j] = self.get(i, j);
            }
            aug.a[i * 2 * n + n + i] = 1;
        }
        // Eliminating only the left block: run on the wide matrix column by column.
        let (w, p) = (2 * n, self.p as u64);
        let a = &mut aug.a;
        for col in 0..n {
            let piv = (col..n).find(|&r| a[r * w + col] != 0)?;
            for j in 0..w {
                a.swap(piv * w + j, col * w + j);
            }
            let pinv = inv_mod(a[col * w + col], self.p) as u64;
            for j in 0..w {
                a[col * w + j] = (a[col * w + j] as u64 * pinv % p) as u32;
            }
            for r in 0..n {
                if r == col || a[r * w + col] == 0 {
                    continue;
                }
                let f = a[r * w + col] as u64;
                for j in 0..w {
                    let sub = f * a[col * w + j] as u64 % p;
                    a[r * w + j] = ((a[r * w + j] as u64 + p - sub) % p) as u32;
                }
            }
        }
        let mut out = Mat::identity(n, self.p);
        for i in 0..n {
            for j in 0..n {
                out.a[i * n + j] = a[i * w + n + j];
            }
        }
        Some(out)
    }

    pub fn pow(&self, k: i64) -> Mat {
        let base = if k < 0 { self.inverse().expect("invertible") } else { self.clone() };
        let mut acc = Mat::identity(self.n, self.p);
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    /// Random element of `SL(n, p)` as a product of elementary transvections.
    pub fn random_special<R: Rng>(n: usize, p: u32, rng: &mut R, factors: usize) -> Mat {
        let mut m = Mat::identity(n, p);
        for _ in 0..factors {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            m = m.mul(&Mat::elementary(n, p, i, j, rng.gen_range(1..p)));
        }
        m
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.a.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", s.join(","))
    }
}

/// `I + u ξ v` with `v·u = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transvection {
    pub u: Vec<u32>,
    pub v: Vec<u32>,
    pub xi: u32,
    pub p: u32,
}

impl Transvection {
    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn matrix(&self) -> Mat {
        let (n, p) = (self.n(), self.p as u64);
        let mut m = Mat::identity(n, self.p);
        for i in 0..n {
            for j in 0..n {
                let add = self.u[i] as u64 * self.xi as u64 % p * self.v[j] as u64 % p;
                m.a[i * n + j] = ((m.a[i * n + j] as u64 + add) % p) as u32;
            }
        }
        m
    }

    pub fn inverse(&self) -> Transvection {
        Transvection { xi: (self.p - self.xi) % self.p, ..self.clone() }
    }
}

fn reduce(v: &[i64], p: u32) -> Vec<u32> {
    v.iter().map(|&x| x.rem_euclid(p as i64) as u32).collect()
}

pub fn make_transvection(u: &[i64], v: &[i64], xi: i64, p: u32) -> Result<Transvection, ConjugacyError> {
    if !is_prime(p) {
        return Err(ConjugacyError::NotPrime(p));
    }
    if u.len() != v.len() {
        return Err(ConjugacyError::Dimension(format!("|u|={} |v|={}", u.len(), v.len())));
    }
    let (u, v) = (reduce(u, p), reduce(v, p));
    let xi = xi.rem_euclid(p as i64) as u32;
    if u.iter().all(|&x| x == 0) {
        return Err(ConjugacyError::Zero("u"));
    }
    if v.iter().all(|&x| x == 0) {
        return Err(ConjugacyError::Zero("v"));
    }
    if xi == 0 {
        return Err(ConjugacyError::Zero("xi"));
    }
    let vu = dot(&v, &u, p);
    if vu != 0 {
        return Err(ConjugacyError::NotOrthogonal(vu));
    }
    Ok(Transvection { u, v, xi, p })
}

fn make_t(u: &[u32], v: &[u32], xi: u32, p: u32) -> Result<Transvection, ConjugacyError> {
    let c = |w: &[u32]| w.iter().map(|&x| x as i64).collect::<Vec<_>>();
    make_transvection(&c(u), &c(v), xi as i64, p)
}

/// `M ≠ I`, `rank(M − I) = 1` and `(M − I)² = 0`.
pub fn is_transvection(m: &Mat) -> Result<bool, ConjugacyError> {
    let d = m.det();
    if d != 1 {
        return Err(ConjugacyError::NotSpecial(d));
    }
    Ok(is_transvection_unchecked(m))
}

fn is_transvection_unchecked(m: &Mat) -> bool {
    let r = m.sub(&Mat::identity(m.n, m.p));
    !m.is_identity() && r.rank() == 1 && r.mul(&r).a.iter().all(|&x| x == 0)
}

/// Recovers `(u, v, 1)` from a transvection matrix: `u` a nonzero column of
/// `M − I`, `v` the matching row scaled so that `u v = M − I`.
pub fn factor_transvection(m: &Mat) -> Option<Transvection> {
    if !is_transvection_unchecked(m) {
        return None;
    }
    let (n, p) = (m.n, m.p);
    let r = m.sub(&Mat::identity(n, p));
    let (i0, j0) = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).find(|&(i, j)| r.get(i, j) != 0)?;
    let u: Vec<u32> = (0..n).map(|i| r.get(i, j0)).collect();
    let s = inv_mod(u[i0], p) as u64;
    let v: Vec<u32> = (0..n).map(|j| (r.get(i0, j) as u64 * s % p as u64) as u32).collect();
    let t = make_t(&u, &v, 1, p).ok()?;
    (t.matrix() == *m).then_some(t)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommutatorCheck {
    pub commutator: Mat,
    /// `t_{u y}(ξ (v·w) ζ)`, or `None` when the parameter vanishes.
    pub predicted: Option<Transvection>,
    pub holds: bool,
}

/// `[t₁, t₂] = t₁ t₂ t₁⁻¹ t₂⁻¹` against the closed form.
pub fn chevalley_commutator(t1: &Transvection, t2: &Transvection) -> Result<CommutatorCheck, ConjugacyError> {
    let p = t1.p;
    if t2.p != p || t1.n() != t2.n() {
        return Err(ConjugacyError::Dimension("transvections over different spaces".into()));
    }
    let (u, v, w, y) = (&t1.u, &t1.v, &t2.u, &t2.v);
    for (name, val) in [("v·u", dot(v, u, p)), ("y·w", dot(y, w, p)), ("y·u", dot(y, u, p))] {
        if val != 0 {
            return Err(ConjugacyError::Precondition(format!("{name}={val}")));
        }
    }
    let (a, b) = (t1.matrix(), t2.matrix());
    let comm = a.mul(&b).mul(&t1.inverse().matrix()).mul(&t2.inverse().matrix());
    let param = (t1.xi as u64 * dot(v, w, p) as u64 % p as u64 * t2.xi as u64 % p as u64) as u32;
    let predicted = if param == 0 { None } else { Some(make_t(u, y, param, p)?) };
    let expect = predicted.as_ref().map_or_else(|| Mat::identity(t1.n(), p), Transvection::matrix);
    Ok(CommutatorCheck { holds: comm == expect, commutator: comm, predicted })
}

/// How a returned path was built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathShape {
    /// The five-element construction through `t_{xy}(1)`.
    Generic,
    /// The same construction run from the far end and reversed.
    GenericReversed,
    /// A shorter path when the construction has no solution.
    Short(&'static str),
}

/// One step of an X-path certificate: `g_i^ε g_{i+1}^τ` lies in `X ∪ X⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub eps: i8,
    pub tau: i8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XPath<E> {
    pub elements: Vec<E>,
    pub steps: Vec<Step>,
}

impl<E> XPath<E> {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// The ambient group and class for X-path checks.
pub trait XContext {
    type E: Clone;
    fn in_x(&self, g: &Self::E) -> bool;
    /// Membership in `X ∪ X⁻¹`.
    fn in_x_pm(&self, g: &Self::E) -> bool;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn inv(&self, a: &Self::E) -> Self::E;
}

/// All transvections of `SL(n, p)`, one conjugacy class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransvectionClass;

impl XContext for TransvectionClass {
    type E = Mat;

    fn in_x(&self, g: &Mat) -> bool {
        g.det() == 1 && is_transvection_unchecked(g)
    }

    fn in_x_pm(&self, g: &Mat) -> bool {
        self.in_x(g)
    }

    fn mul(&self, a: &Mat, b: &Mat) -> Mat {
        a.mul(b)
    }

    fn inv(&self, a: &Mat) -> Mat {
        a.inverse().expect("invertible")
    }
}

/// First `(ε, τ)` in the order `(1,1), (1,-1), (-1,1), (-1,-1)` that works.
pub fn adjacency<C: XContext>(ctx: &C, g: &C::E, h: &C::E) -> Option<Step> {
    let (gi, hi) = (ctx.inv(g), ctx.inv(h));
    for (eps, tau) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
        let a = if eps == 1 { g } else { &gi };
        let b = if tau == 1 { h } else { &hi };
        if ctx.in_x_pm(&ctx.mul(a, b)) {
            return Some(Step { eps, tau });
        }
    }
    None
}

/// Certificates for `seq`, or `None` if it is not an X-path.
pub fn is_x_path<C: XContext>(ctx: &C, seq: &[C::E]) -> Option<Vec<Step>> {
    if seq.is_empty() || !seq.iter().all(|g| ctx.in_x(g)) {
        return None;
    }
    seq.windows(2).map(|w| adjacency(ctx, &w[0], &w[1])).collect()
}

fn vectors(n: usize, p: u32) -> impl Iterator<Item = Vec<u32>> {
    let total = (p as u64).pow(n as u32);
    (1..total).map(move |mut k| {
        let mut v = vec![0u32; n];
        for slot in v.iter_mut().rev() {
            *slot = (k % p as u64) as u32;
            k /= p as u64;
        }
        v
    })
}

/// Lexicographically first `(x, y)` with `y·u = v'·x = y·x = 0`, `v·x ≠ 0`,
/// `y·u' ≠ 0`.
fn solve_xy(t: &Transvection, t2: &Transvection) -> Option<(Vec<u32>, Vec<u32>)> {
    let (n, p) = (t.n(), t.p);
    for x in vectors(n, p) {
        if dot(&t2.v, &x, p) != 0 || dot(&t.v, &x, p) == 0 {
            continue;
        }
        for y in vectors(n, p) {
            if dot(&y, &t.u, p) == 0 && dot(&y, &x, p) == 0 && dot(&y, &t2.u, p) != 0 {
                return Some((x, y));
            }
        }
    }
    None
}

fn generic_path(t: &Transvection, t2: &Transvection) -> Option<Vec<Mat>> {
    let p = t.p;
    let (x, y) = solve_xy(t, t2)?;
    let xi1 = (t.xi as u64 * dot(&t.v, &x, p) as u64 % p as u64) as u32;
    let xi2 = (t2.xi as u64 * dot(&y, &t2.u, p) as u64 % p as u64) as u32;
    let mid = [make_t(&t.u, &y, xi1, p).ok()?, make_t(&x, &y, 1, p).ok()?, make_t(&x, &t2.v, xi2, p).ok()?];
    let mut out = vec![t.matrix()];
    out.extend(mid.iter().map(Transvection::matrix));
    out.push(t2.matrix());
    Some(out)
}

/// An X-path from `t` to `t2` in the class of transvections.
pub fn transvection_xpath(
    t: &Transvection,
    t2: &Transvection,
) -> Result<(XPath<Mat>, PathShape), ConjugacyError> {
    if t.n() != t2.n() || t.p != t2.p {
        return Err(ConjugacyError::Dimension("transvections over different spaces".into()));
    }
    if t.n() < 3 {
        return Err(ConjugacyError::Dimension(format!("n={} < 3", t.n())));
    }
    let ctx = TransvectionClass;
    let certify = |els: Vec<Mat>| is_x_path(&ctx, &els).map(|steps| XPath { elements: els, steps });
    let (a, b) = (t.matrix(), t2.matrix());
    if a == b {
        return Ok((certify(vec![a]).expect("transvection"), PathShape::Short("equal")));
    }
    if let Some(els) = generic_path(t, t2) {
        if let Some(path) = certify(els) {
            return Ok((path, PathShape::Generic));
        }
    }
    if let Some(mut els) = generic_path(t2, t) {
        els.reverse();
        if let Some(path) = certify(els) {
            return Ok((path, PathShape::GenericReversed));
        }
    }
    if let Some(path) = certify(vec![a.clone(), b.clone()]) {
        return Ok((path, PathShape::Short("adjacent")));
    }
    // Through a transvection sharing the column of one end and the row of the other.
    for (col, row) in [(&t.u, &t2.v), (&t2.u, &t.v)] {
        if dot(row, col, t.p) != 0 {
            continue;
        }
        let mid = make_t(col, row, 1, t.p)?.matrix();
        if let Some(path) = certify(vec![a.clone(), mid, b.clone()]) {
            return Ok((path, PathShape::Short("via-shared-line")));
        }
    }
    Err(ConjugacyError::NoPath(format!("u={:?} v={:?} u'={:?} v'={:?}", t.u, t.v, t2.u, t2.v)))
}

/// How elements of a group table are represented.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Repr {
    Matrix { n: usize, p: u32 },
    Perm { m: usize },
}

impl Repr {
    fn mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        match self {
            Repr::Matrix { n, p } => {
                let x = Mat { n: *n, p: *p, a: a.to_vec() };
                x.mul(&Mat { n: *n, p: *p, a: b.to_vec() }).a
            }
            // (a b)(i) = a(b(i))
            Repr::Perm { .. } => b.iter().map(|&i| a[i as usize]).collect(),
        }
    }

    fn identity(&self) -> Vec<u32> {
        match self {
            Repr::Matrix { n, p } => Mat::identity(*n, *p).a,
            Repr::Perm { m } => (0..*m as u32).collect(),
        }
    }

    fn format(&self, k: &[u32]) -> String {
        let s: Vec<String> = k.iter().map(|x| x.to_string()).collect();
        s.join(",")
    }
}

/// Which group to build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupKind {
    Sl { n: usize, p: u32 },
    Permutations { m: usize },
    Generated { repr: Repr, gens: Vec<Vec<u32>> },
}

impl GroupKind {
    /// `sl:<n>:<p>` or `sym:<m>`.
    pub fn parse(s: &str) -> Result<GroupKind, ConjugacyError> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<usize>().map_err(|e| ConjugacyError::Parse(format!("{s}: {e}")));
        match parts.as_slice() {
            ["sl", n, p] => Ok(GroupKind::Sl { n: num(n)?, p: num(p)? as u32 }),
            ["sym", m] => Ok(GroupKind::Permutations { m: num(m)? }),
            _ => Err(ConjugacyError::Parse(format!("unknown group {s}"))),
        }
    }
}

/// A finite group closed from generators, with conjugacy classes.
#[derive(Debug, Clone)]
pub struct FiniteGroupTable {
    repr: Repr,
    elements: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    gens: Vec<usize>,
    inverse: Vec<usize>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

impl FiniteGroupTable {
    pub fn build(kind: &GroupKind, cap: usize) -> Result<FiniteGroupTable, ConjugacyError> {
        let (repr, gens) = match kind {
            GroupKind::Sl { n, p } => {
                if !is_prime(*p) {
                    return Err(ConjugacyError::NotPrime(*p));
                }
                let mut g = Vec::new();
                for i in 0..*n {
                    for j in 0..*n {
                        if i != j {
                            g.push(Mat::elementary(*n, *p, i, j, 1).a);
                        }
                    }
                }
                (Repr::Matrix { n: *n, p: *p }, g)
            }
            GroupKind::Permutations { m } => {
                let mut g = Vec::new();
                if *m >= 2 {
                    let mut t: Vec<u32> = (0..*m as u32).collect();
                    t.swap(0, 1);
                    g.push(t);
                    g.push((0..*m as u32).map(|i| (i + 1) % *m as u32).collect());
                }
                (Repr::Perm { m: *m }, g)
            }
            GroupKind::Generated { repr, gens } => (repr.clone(), gens.clone()),
        };
        let id = repr.identity();
        let mut elements = vec![id.clone()];
        let mut index = HashMap::from([(id, 0usize)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in &gens {
                let k = repr.mul(&elements[i], g);
                if !index.contains_key(&k) {
                    if elements.len() >= cap {
                        return Err(ConjugacyError::CapExceeded(cap));
                    }
                    index.insert(k.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(k);
                }
            }
        }
        // Canonical order: sort by key.
        elements.sort();
        let index: HashMap<Vec<u32>, usize> = elements.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        let gens: Vec<usize> = gens.iter().map(|g| index[g]).collect();
        let id = index[&repr.identity()];
        let mut table = FiniteGroupTable {
            repr,
            elements,
            index,
            gens,
            inverse: Vec::new(),
            class_of: Vec::new(),
            classes: Vec::new(),
        };
        table.inverse = (0..table.len()).map(|i| table.find_inverse(i, id)).collect();
        table.compute_classes();
        Ok(table)
    }

    fn find_inverse(&self, i: usize, id: usize) -> usize {
        // g^{ord-1}
        let mut prev = id;
        let mut cur = i;
        while cur != id {
            prev = cur;
            cur = self.mul(cur, i);
        }
        prev
    }

    fn compute_classes(&mut self) {
        let n = self.len();
        let mut class_of = vec![usize::MAX; n];
        let mut classes = Vec::new();
        for start in 0..n {
            if class_of[start] != usize::MAX {
                continue;
            }
            let c = classes.len();
            let mut members = vec![start];
            class_of[start] = c;
            let mut k = 0;
            while k < members.len() {
                let x = members[k];
                for &g in &self.gens {
                    let y = self.mul(self.mul(g, x), self.inverse[g]);
                    if class_of[y] == usize::MAX {
                        class_of[y] = c;
                        members.push(y);
                    }
                }
                k += 1;
            }
            members.sort();
            classes.push(members);
        }
        self.class_of = class_of;
        self.classes = classes;
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn key(&self, i: usize) -> &[u32] {
        &self.elements[i]
    }

    pub fn format(&self, i: usize) -> String {
        self.repr.format(&self.elements[i])
    }

    pub fn lookup(&self, key: &[u32]) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn identity(&self) -> usize {
        self.index[&self.repr.identity()]
    }

    pub fn generators(&self) -> &[usize] {
        &self.gens
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.index[&self.repr.mul(&self.elements[a], &self.elements[b])]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, g: usize) -> usize {
        self.class_of[g]
    }

    /// Class of the element with this key.
    pub fn class_containing(&self, key: &[u32]) -> Option<usize> {
        self.lookup(key).map(|i| self.class_of[i])
    }

    /// The class of transvections, for matrix groups.
    pub fn transvection_class(&self) -> Option<usize> {
        let Repr::Matrix { n, p } = self.repr else { return None };
        (0..self.len()).find(|&i| is_transvection_unchecked(&Mat { n, p, a: self.elements[i].clone() })).map(|i| self.class_of[i])
    }
}

/// A conjugacy class inside a table.
#[derive(Debug, Clone, Copy)]
pub struct TableClass<'a> {
    pub table: &'a FiniteGroupTable,
    pub class: usize,
}

impl TableClass<'_> {
    fn inverse_class(&self) -> usize {
        let rep = self.table.classes[self.class][0];
        self.table.class_of(self.table.inv(rep))
    }
}

impl XContext for TableClass<'_> {
    type E = usize;

    fn in_x(&self, g: &usize) -> bool {
        self.table.class_of(*g) == self.class
    }

    fn in_x_pm(&self, g: &usize) -> bool {
        let c = self.table.class_of(*g);
        c == self.class || c == self.inverse_class()
    }

    fn mul(&self, a: &usize, b: &usize) -> usize {
        self.table.mul(*a, *b)
    }

    fn inv(&self, a: &usize) -> usize {
        self.table.inv(*a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BfsResult {
    Path(XPath<usize>),
    Disconnected { reachable: usize },
}

/// Shortest X-path by breadth-first search, neighbours in key order.
pub fn bfs_xpath(ctx: &TableClass<'_>, g: usize, g2: usize) -> Result<BfsResult, ConjugacyError> {
    if !ctx.in_x(&g) || !ctx.in_x(&g2) {
        return Err(ConjugacyError::NotInClass);
    }
    let members = &ctx.table.classes[ctx.class];
    let mut parent: BTreeMap<usize, usize> = BTreeMap::from([(g, g)]);
    let mut queue = VecDeque::from([g]);
    while let Some(x) = queue.pop_front() {
        if x == g2 {
            break;
        }
        for &y in members {
            if !parent.contains_key(&y) && adjacency(ctx, &x, &y).is_some() {
                parent.insert(y, x);
                queue.push_back(y);
            }
        }
    }
    if !parent.contains_key(&g2) {
        return Ok(BfsResult::Disconnected { reachable: parent.len() });
    }
    let mut path = vec![g2];
    while *path.last().expect("nonempty") != g {
        path.push(parent[path.last().expect("nonempty")]);
    }
    path.reverse();
    let steps = is_x_path(ctx, &path).expect("bfs edges are adjacencies");
    Ok(BfsResult::Path(XPath { elements: path, steps }))
}

/// All-pairs maximal shortest path length in a class, or `None` if disconnected.
pub fn class_diameter(ctx: &TableClass<'_>) -> Option<usize> {
    let members = &ctx.table.classes[ctx.class];
    let pos: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let adj: Vec<Vec<usize>> = members
        .iter()
        .map(|x| members.iter().filter(|y| adjacency(ctx, x, y).is_some()).map(|y| pos[y]).collect())
        .collect();
    let mut worst = 1;
    for s in 0..members.len() {
        let mut dist = vec![usize::MAX; members.len()];
        dist[s] = 1;
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            for &y in &adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    q.push_back(y);
                }
            }
        }
        worst = worst.max(*dist.iter().max()?);
        if dist.contains(&usize::MAX) {
            return None;
        }
    }
    Some(worst)
}
