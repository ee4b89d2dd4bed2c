//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

pub fn half() -> Q {
    qf(1, 2)
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

/// Parses `7`, `-3/4` or `3/6` (normalized).
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

/// Canonical text form: `n` for integers, `n/d` otherwise.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn floor_u64(x: &Q) -> Option<u64> {
    let f = x.floor().to_integer();
    u64::try_from(f).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        assert_eq!(parse_q("3/6"), Some(qf(1, 2)));
        assert_eq!(parse_q("-4"), Some(q(-4)));
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(fmt_q(&qf(6, 4)), "3/2");
        assert_eq!(fmt_q(&q(5)), "5");
    }
}
