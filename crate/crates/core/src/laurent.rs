//! Laurent polynomials in the equivariant parameters λ₁..λₙ.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::scalar::{rat_str, Coeff, Rational};
use crate::MAX_FACTORS;

/// Exponent vector of a Laurent monomial; unused trailing slots stay zero.
pub type LMono = [i16; MAX_FACTORS];

#[derive(Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<LMono, Rational>,
}

impl LaurentPoly {
    pub fn monomial(exps: LMono, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        LaurentPoly { terms }
    }

    /// λ_i^k (i zero-based).
    pub fn lambda_pow(i: usize, k: i32) -> Self {
        let mut e = [0i16; MAX_FACTORS];
        e[i] = k as i16;
        Self::monomial(e, Rational::one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LMono, &Rational)> {
        self.terms.iter()
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&[0; MAX_FACTORS]).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total λ-degree of every term, if homogeneous.
    pub fn homogeneous_degree(&self) -> Option<i32> {
        let mut degs = self.terms.keys().map(|e| e.iter().map(|&x| x as i32).sum::<i32>());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// Evaluate at λ_i ↦ values[i].
    pub fn evaluate(&self, values: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let v = &values[i];
                let p = num_traits::pow(v.clone(), k.unsigned_abs() as usize);
                t = if k > 0 { t * p } else { t / p };
            }
            acc += t;
        }
        acc
    }

    fn insert_add(&mut self, e: LMono, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut s = rat_str(c);
                for (i, &k) in e.iter().enumerate() {
                    if k != 0 {
                        s.push_str(&format!("*l{}^{}", i + 1, k));
                    }
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Add for LaurentPoly {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.add_ref(&o)
    }
}

impl Sub for LaurentPoly {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.sub_ref(&o)
    }
}

impl Mul for LaurentPoly {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.mul_ref(&o)
    }
}

impl Neg for LaurentPoly {
    type Output = Self;
    fn neg(self) -> Self {
        self.neg_ref()
    }
}

impl Zero for LaurentPoly {
    fn zero() -> Self {
        LaurentPoly::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for LaurentPoly {
    fn one() -> Self {
        Self::monomial([0; MAX_FACTORS], Rational::one())
    }
}

impl Coeff for LaurentPoly {
    fn add_ref(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.add_assign_ref(o);
        r
    }
    fn add_assign_ref(&mut self, o: &Self) {
        for (e, c) in &o.terms {
            self.insert_add(*e, c.clone());
        }
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self.add_ref(&o.neg_ref())
    }
    fn mul_ref(&self, o: &Self) -> Self {
        let mut r = LaurentPoly::default();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let mut e = *e1;
                for i in 0..MAX_FACTORS {
                    e[i] += e2[i];
                }
                r.insert_add(e, c1 * c2);
            }
        }
        r
    }
    fn neg_ref(&self) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }
    fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        LaurentPoly { terms: self.terms.iter().map(|(e, c)| (*e, c * r)).collect() }
    }
    fn from_rational(r: Rational) -> Self {
        Self::monomial([0; MAX_FACTORS], r)
    }
    fn try_inv(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (e, c) = self.terms.iter().next()?;
        let mut inv = *e;
        for x in inv.iter_mut() {
            *x = -*x;
        }
        Some(Self::monomial(inv, c.recip()))
    }
    fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&[0; MAX_FACTORS]).cloned(),
            _ => None,
        }
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(e, c)| serde_json::json!({"l": e.to_vec(), "c": rat_str(c)}))
                .collect(),
        )
    }
    fn ring_name() -> &'static str {
        "lambda-laurent"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn monomials_are_units() {
        let m = LaurentPoly::lambda_pow(0, 2).scale(&int(3));
        let inv = m.try_inv().unwrap();
        assert_eq!(m.mul_ref(&inv), LaurentPoly::one());
        let s = LaurentPoly::lambda_pow(0, 1).add_ref(&LaurentPoly::one());
        assert!(s.try_inv().is_none());
    }

    #[test]
    fn evaluation_matches_arithmetic() {
        let a = LaurentPoly::lambda_pow(0, -1).add_ref(&LaurentPoly::lambda_pow(1, 2));
        let b = a.mul_ref(&a);
        let v = [rat(2, 3), int(-5)];
        assert_eq!(b.evaluate(&v), a.evaluate(&v) * a.evaluate(&v));
        assert_eq!(b.homogeneous_degree(), None);
        assert_eq!(LaurentPoly::lambda_pow(1, 3).homogeneous_degree(), Some(3));
    }
}
