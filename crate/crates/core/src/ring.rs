//! Exact scalars and the coefficient-ring contract used by word series.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// "p/q" or "p"; no decimal points, no exponents.
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || Error::Input(format!("malformed rational `{s}` (expected \"p/q\" or an integer)"));
    let int = |x: &str| -> Result<BigInt> {
        let x = x.trim();
        let digits = x.strip_prefix(['-', '+']).unwrap_or(x);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        x.parse::<BigInt>().map_err(|_| bad())
    };
    match t.split_once('/') {
        Some((n, d)) => {
            let d = int(d)?;
            if d.is_zero() {
                return Err(Error::Input(format!("rational `{s}` has zero denominator")));
            }
            Ok(Q::new(int(n)?, d))
        }
        None => Ok(Q::from_integer(int(t)?)),
    }
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn q_to_f64(x: &Q) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn factorial(n: u32) -> Q {
    let mut f = BigInt::one();
    for k in 2..=n {
        f *= k;
    }
    Q::from_integer(f)
}

pub fn pow_q(x: &Q, n: u32) -> Q {
    let mut r = Q::one();
    for _ in 0..n {
        r *= x;
    }
    r
}

/// Commutative ring with exact equality.
pub trait Coeff: Clone + PartialEq + Debug + Send + Sync {
    fn zero_elem() -> Self;
    fn one_elem() -> Self;
    fn is_zero_elem(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
    fn from_q(x: &Q) -> Self;

    fn minus(&self, o: &Self) -> Self {
        self.plus(&o.negated())
    }

    fn scaled(&self, x: &Q) -> Self {
        self.times(&Self::from_q(x))
    }

    fn accumulate(&mut self, o: &Self) {
        *self = self.plus(o);
    }
}

impl Coeff for Q {
    fn zero_elem() -> Self {
        Zero::zero()
    }
    fn one_elem() -> Self {
        One::one()
    }
    fn is_zero_elem(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn from_q(x: &Q) -> Self {
        x.clone()
    }
    fn accumulate(&mut self, o: &Self) {
        *self += o;
    }
}

pub fn is_negative(x: &Q) -> bool {
    x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_q("1/3").unwrap(), q(1, 3));
        assert_eq!(parse_q("-2/4").unwrap(), q(-1, 2));
        assert_eq!(parse_q(" 7 ").unwrap(), qi(7));
        assert!(parse_q("0.5").is_err());
        assert!(parse_q("1e3").is_err());
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("").is_err());
    }

    #[test]
    fn format_rationals() {
        assert_eq!(fmt_q(&q(3, 2)), "3/2");
        assert_eq!(fmt_q(&q(-4, 2)), "-2");
        assert_eq!(factorial(5), qi(120));
    }
}
