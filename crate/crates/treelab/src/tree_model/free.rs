//! Reduced words in the free group on `a, b` and its Cayley tree.
//!
//! Text form: letters `a b A B` with `A = a⁻¹`, `B = b⁻¹`; the empty word is `1`.

use std::fmt;

use super::lazy::LazyTree;
use super::simplicial::{simplicial_space, SimplicialTree};
use crate::rational::Q;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    A,
    B,
    AInv,
    BInv,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::B, Letter::AInv, Letter::BInv];

    pub fn inv(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::B => 'b',
            Letter::AInv => 'A',
            Letter::BInv => 'B',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a' => Some(Letter::A),
            'b' => Some(Letter::B),
            'A' => Some(Letter::AInv),
            'B' => Some(Letter::BInv),
            _ => None,
        }
    }
}

/// A freely reduced word; every constructor reduces.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Word {
        Word(Vec::new())
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(it: I) -> Word {
        let mut w = Word::identity();
        for l in it {
            w.push(l);
        }
        w
    }

    pub fn letter(l: Letter) -> Word {
        Word(vec![l])
    }

    pub fn parse(s: &str) -> Option<Word> {
        let s = s.trim();
        if s == "1" || s.is_empty() {
            return Some(Word::identity());
        }
        let mut v = Vec::new();
        for c in s.chars() {
            v.push(Letter::from_char(c)?);
        }
        Some(Word::from_letters(v))
    }

    /// Appends one letter with free reduction.
    pub fn push(&mut self, l: Letter) {
        if self.0.last() == Some(&l.inv()) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &l in &other.0 {
            w.push(l);
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut w = Word::identity();
        for _ in 0..k.unsigned_abs() {
            w = w.mul(&base);
        }
        w
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k].to_vec())
    }

    pub fn suffix_from(&self, k: usize) -> Word {
        Word(self.0[k..].to_vec())
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    /// Letterwise substitution; extended to a homomorphism.
    pub fn map_letters<F: Fn(Letter) -> Letter>(&self, f: F) -> Word {
        Word::from_letters(self.0.iter().map(|&l| f(l)))
    }

    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count()
    }

    /// All reduced words of length exactly `n`, in lexicographic letter order.
    pub fn all_of_length(n: usize) -> Vec<Word> {
        let mut layer = vec![Word::identity()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(layer.len() * 3);
            for w in &layer {
                for l in Letter::ALL {
                    if w.last() != Some(l.inv()) {
                        let mut x = w.clone();
                        x.0.push(l);
                        next.push(x);
                    }
                }
            }
            layer = next;
        }
        layer
    }

    /// All reduced words of length at most `n`, shortest first.
    pub fn all_up_to(n: usize) -> Vec<Word> {
        (0..=n).flat_map(Word::all_of_length).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

/// The Cayley tree of `F2` with unit edges; vertices are reduced words.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct F2Tree {
    /// Largest radius accepted by [`super::materialize_ball`].
    pub radius_bound: usize,
}

impl F2Tree {
    pub fn new(radius_bound: usize) -> Self {
        F2Tree { radius_bound }
    }

    pub fn word_dist(u: &Word, v: &Word) -> usize {
        let k = u.common_prefix_len(v);
        u.len() + v.len() - 2 * k
    }
}

impl SimplicialTree for F2Tree {
    type V = Word;

    fn vertex_path(&self, a: &Word, b: &Word) -> Vec<Word> {
        let k = a.common_prefix_len(b);
        let mut out = Vec::with_capacity(a.len() + b.len() - 2 * k + 1);
        for i in (k..=a.len()).rev() {
            out.push(a.prefix(i));
        }
        for i in k + 1..=b.len() {
            out.push(b.prefix(i));
        }
        out
    }

    fn edge_len(&self, _a: &Word, _b: &Word) -> Q {
        Q::from_integer(1.into())
    }

    fn vdist(&self, a: &Word, b: &Word) -> Q {
        Q::from_integer(F2Tree::word_dist(a, b).into())
    }

    fn vlabel(&self, v: &Word) -> String {
        v.to_string()
    }

    /// The longest of the three pairwise common prefixes.
    fn vmedian(&self, a: &Word, b: &Word, c: &Word) -> Option<Word> {
        let k = a.common_prefix_len(b).max(a.common_prefix_len(c));
        let k2 = b.common_prefix_len(c);
        Some(if k2 > k { b.prefix(k2) } else { a.prefix(k) })
    }
}

simplicial_space!(F2Tree);

impl LazyTree for F2Tree {
    type V = Word;

    fn root(&self) -> Word {
        Word::identity()
    }

    fn neighbors(&self, v: &Word) -> Vec<Word> {
        Letter::ALL.iter().map(|&l| v.mul(&Word::letter(l))).collect()
    }

    fn vlabel(&self, v: &Word) -> String {
        v.to_string()
    }

    fn radius_bound(&self) -> usize {
        self.radius_bound
    }
}
