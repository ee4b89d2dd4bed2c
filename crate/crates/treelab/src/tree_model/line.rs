//! The rational line and line models with a distinguished subset.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};

use super::TreeSpace;
use crate::rational::{fmt_q, Q};

/// `Q` with order betweenness and the usual metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RationalLine;

impl TreeSpace for RationalLine {
    type P = Q;

    fn dist(&self, a: &Q, b: &Q) -> Q {
        (a - b).abs()
    }

    fn towards(&self, x: &Q, y: &Q, s: &Q) -> Q {
        let d = self.dist(x, y);
        if *s >= d {
            return y.clone();
        }
        if !s.is_positive() {
            return x.clone();
        }
        if y > x {
            x + s
        } else {
            x - s
        }
    }

    fn median(&self, x: &Q, y: &Q, z: &Q) -> Q {
        let mut v = [x, y, z];
        v.sort();
        v[1].clone()
    }

    fn label(&self, p: &Q) -> String {
        fmt_q(p)
    }
}

/// Membership predicate for the distinguished subset of a line model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineSubset {
    All,
    Integers,
    /// Integer multiples of a positive step.
    Multiples(Q),
    /// `k / 2^m` for `m` up to the given level.
    Dyadic(u32),
}

impl LineSubset {
    pub fn contains(&self, x: &Q) -> bool {
        match self {
            LineSubset::All => true,
            LineSubset::Integers => x.is_integer(),
            LineSubset::Multiples(step) => (x / step).is_integer(),
            LineSubset::Dyadic(m) => {
                let scaled = x * Q::from_integer(num_bigint::BigInt::from(2u8).pow(*m));
                scaled.is_integer()
            }
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, LineSubset::All)
    }
}

/// A rational line with a base point and a distinguished subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineModel {
    pub a0: Q,
    pub subset: LineSubset,
}

impl LineModel {
    pub fn new(a0: Q, subset: LineSubset) -> Self {
        LineModel { a0, subset }
    }

    pub fn space(&self) -> RationalLine {
        RationalLine
    }

    /// Distinguished points in `[lo, hi]` spaced by `step`, starting at `lo`.
    pub fn sample(&self, lo: &Q, hi: &Q, step: &Q) -> Vec<Q> {
        assert!(step.is_positive());
        let mut out = Vec::new();
        let mut x = lo.clone();
        while x <= *hi {
            if self.subset.contains(&x) {
                out.push(x.clone());
            }
            x += step;
        }
        out
    }

    pub fn signed_offset(&self, x: &Q) -> Q {
        x - &self.a0
    }

    pub fn is_origin(&self, x: &Q) -> bool {
        self.signed_offset(x).is_zero()
    }
}

pub fn line_order_compare(x: &Q, y: &Q) -> Ordering {
    x.cmp(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    #[test]
    fn order_and_betweenness() {
        assert_eq!(line_order_compare(&qf(1, 2), &qf(2, 3)), Ordering::Less);
        assert_eq!(line_order_compare(&q(3), &q(3)), Ordering::Equal);
        let l = RationalLine;
        assert!(l.between(&qf(1, 2), &q(0), &q(1)));
        assert!(!l.between(&q(2), &q(0), &q(1)));
        assert_eq!(l.median(&q(5), &q(-1), &q(2)), q(2));
    }

    #[test]
    fn subsets() {
        assert!(LineSubset::Integers.contains(&q(-3)));
        assert!(!LineSubset::Integers.contains(&qf(1, 2)));
        assert!(LineSubset::Dyadic(3).contains(&qf(3, 8)));
        assert!(!LineSubset::Dyadic(2).contains(&qf(3, 8)));
        assert!(LineSubset::Multiples(q(5)).contains(&q(-10)));
        let m = LineModel::new(q(0), LineSubset::Integers);
        assert_eq!(m.sample(&q(-1), &q(1), &qf(1, 2)), vec![q(-1), q(0), q(1)]);
    }
}
