//! Coefficient rings. Everything downstream is generic over [`Coeff`].

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{QplError, Result};

pub type Rational = BigRational;

/// An exact commutative coefficient ring of characteristic zero.
///
/// The by-reference methods exist so hot loops avoid cloning big integers.
pub trait Coeff: Clone + PartialEq + Debug + Send + Sync + Zero + One + 'static {
    fn add_ref(&self, o: &Self) -> Self;
    fn sub_ref(&self, o: &Self) -> Self;
    fn mul_ref(&self, o: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn scale(&self, r: &Rational) -> Self;
    fn from_rational(r: Rational) -> Self;
    /// Inverse if the element is a unit of the ring.
    fn try_inv(&self) -> Option<Self>;
    /// The value as a plain rational, when the element is a constant.
    fn as_rational(&self) -> Option<Rational>;
    fn to_json(&self) -> serde_json::Value;
    fn ring_name() -> &'static str;

    fn add_assign_ref(&mut self, o: &Self) {
        *self = self.add_ref(o);
    }

    fn from_int(k: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(k)))
    }

    fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.mul_ref(self);
        }
        acc
    }
}

impl Coeff for Rational {
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn add_assign_ref(&mut self, o: &Self) {
        *self += o;
    }
    fn scale(&self, r: &Rational) -> Self {
        self * r
    }
    fn from_rational(r: Rational) -> Self {
        r
    }
    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
    fn as_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(rat_str(self))
    }
    fn ring_name() -> &'static str {
        "numeric"
    }
}

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Canonical "p/q" rendering; integers keep the "/1".
pub fn rat_str(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rat(s: &str) -> Result<Rational> {
    let bad = || QplError::Data(format!("not a rational: {s:?}"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() || q.is_negative() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_are_reduced_and_render_canonically() {
        assert_eq!(rat_str(&rat(6, -4)), "-3/2");
        assert_eq!(rat_str(&Rational::zero()), "0/1");
        assert_eq!(parse_rat("-3/2").unwrap(), rat(-3, 2));
        assert_eq!(parse_rat("5").unwrap(), int(5));
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(3, 5), BigInt::zero());
        assert_eq!(factorial(5), BigInt::from(120));
    }
}
