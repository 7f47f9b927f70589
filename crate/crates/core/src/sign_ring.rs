//! The multilinear sign algebra ℚ[λ_{i,j}]/(λ_{i,j}² − 1) and its type grading.
//!
//! A generator λ_{i,j} carries a factor index i and a slot j. In graph sums
//! the slot is the vertex label, so one element encodes the value at every
//! fixed-point assignment of the graph simultaneously.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{QplError, Result};
use crate::scalar::{rat_str, Coeff, Rational};
use crate::MAX_FACTORS;

pub const MAX_SLOTS: usize = 128 / MAX_FACTORS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignGen {
    /// Zero-based factor index.
    pub factor: usize,
    pub slot: usize,
}

impl SignGen {
    pub fn new(factor: usize, slot: usize) -> Self {
        assert!(factor < MAX_FACTORS && slot < MAX_SLOTS, "sign generator out of range");
        SignGen { factor, slot }
    }

    fn bit(self) -> u128 {
        1u128 << (self.slot * MAX_FACTORS + self.factor)
    }

    fn from_bit(b: u32) -> Self {
        let b = b as usize;
        SignGen { factor: b % MAX_FACTORS, slot: b / MAX_FACTORS }
    }
}

/// Canonical monomial: the set of generators with odd exponent, as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SignMonomial(u128);

impl SignMonomial {
    pub const ONE: SignMonomial = SignMonomial(0);

    pub fn from_gens(gens: &[SignGen]) -> Self {
        SignMonomial(gens.iter().fold(0, |m, g| m ^ g.bit()))
    }

    pub fn mask(self) -> u128 {
        self.0
    }

    pub fn length(self) -> u32 {
        self.0.count_ones()
    }

    pub fn support(self) -> Vec<SignGen> {
        let mut out = Vec::new();
        let mut m = self.0;
        while m != 0 {
            let b = m.trailing_zeros();
            out.push(SignGen::from_bit(b));
            m &= m - 1;
        }
        out
    }

    pub fn mul(self, o: SignMonomial) -> SignMonomial {
        SignMonomial(self.0 ^ o.0)
    }

    pub fn contains(self, g: SignGen) -> bool {
        self.0 & g.bit() != 0
    }
}

impl fmt::Debug for SignMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "1");
        }
        let names: Vec<String> =
            self.support().iter().map(|g| format!("l{},{}", g.factor + 1, g.slot)).collect();
        write!(f, "{}", names.join("*"))
    }
}

/// Reduce an arbitrary exponent map to canonical form (exponents mod 2).
pub fn canonicalize(exps: &[(SignGen, i64)]) -> SignMonomial {
    let mut m = 0u128;
    for &(g, e) in exps {
        if e.rem_euclid(2) == 1 {
            m ^= g.bit();
        }
    }
    SignMonomial(m)
}

/// Type (𝖺; b). Entries of 𝖺 may be negative: the generators are units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeTag {
    pub a: Vec<i32>,
    pub b: u32,
}

impl TypeTag {
    pub fn new(a: Vec<i32>, b: u32) -> Self {
        TypeTag { a, b }
    }

    /// (0̄; b) for n factors.
    pub fn zero(n: usize, b: u32) -> Self {
        TypeTag { a: vec![0; n], b }
    }

    /// (k̄; b): every entry of 𝖺 equal to k.
    pub fn uniform(n: usize, k: i32, b: u32) -> Self {
        TypeTag { a: vec![k; n], b }
    }

    /// Types add under products.
    pub fn add(&self, o: &Self) -> Self {
        let len = self.a.len().max(o.a.len());
        let a = (0..len).map(|i| self.a.get(i).copied().unwrap_or(0) + o.a.get(i).copied().unwrap_or(0)).collect();
        TypeTag { a, b: self.b + o.b }
    }
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct SignPoly {
    terms: BTreeMap<SignMonomial, Rational>,
}

impl SignPoly {
    pub fn monomial(m: SignMonomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        SignPoly { terms }
    }

    pub fn gen(g: SignGen) -> Self {
        Self::monomial(SignMonomial::from_gens(&[g]), Rational::one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SignMonomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support_mask(&self) -> u128 {
        self.terms.keys().fold(0, |m, k| m | k.0)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&SignMonomial::ONE).cloned().unwrap_or_else(Rational::zero)
    }

    fn insert_add(&mut self, m: SignMonomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    /// Evaluate with every generator set by `value(g) ∈ {+1, −1}`.
    pub fn evaluate(&self, value: impl Fn(SignGen) -> i8) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let sign: i8 = m.support().into_iter().map(&value).product();
            if sign > 0 {
                acc += c;
            } else {
                acc -= c;
            }
        }
        acc
    }

    /// Rename slots through `f`; used to move single-vertex data onto a graph slot.
    pub fn map_slots(&self, f: impl Fn(usize) -> usize) -> SignPoly {
        let mut r = SignPoly::default();
        for (m, c) in &self.terms {
            let gens: Vec<SignGen> =
                m.support().into_iter().map(|g| SignGen::new(g.factor, f(g.slot))).collect();
            r.insert_add(SignMonomial::from_gens(&gens), c.clone());
        }
        r
    }

    pub fn has_type(&self, tag: &TypeTag) -> bool {
        self.terms.keys().all(|m| monomial_has_type(*m, tag))
    }
}

/// Decides whether m = ∏λ_{i,j}^{a_{i,j}}·g with row sums a_i and length(g) ≤ b.
///
/// The exponents a_{i,j} range over ℤ. Let T be the generators raised to odd
/// powers; then g = m·T up to squares. Searching over T ∩ supp(m) and extra
/// generators outside it, factor i costs 0 when |supp_i(m)| ≡ a_i (mod 2) and
/// 1 otherwise (drop or add a single generator).
pub fn monomial_has_type(m: SignMonomial, tag: &TypeTag) -> bool {
    let mut cost = 0u32;
    for i in 0..MAX_FACTORS {
        let ai = tag.a.get(i).copied().unwrap_or(0);
        let si = (m.0 & ROW_MASKS[i]).count_ones() as i32;
        if (si - ai).rem_euclid(2) != 0 {
            cost += 1;
        }
    }
    cost <= tag.b
}

/// Bits of every generator with factor index i.
const ROW_MASKS: [u128; MAX_FACTORS] = {
    let mut out = [0u128; MAX_FACTORS];
    let mut i = 0;
    while i < MAX_FACTORS {
        let mut j = 0;
        while j < MAX_SLOTS {
            out[i] |= 1u128 << (j * MAX_FACTORS + i);
            j += 1;
        }
        i += 1;
    }
    out
};

/// Σ over all ±1 assignments of the ambient generators.
pub fn sum_over_signs(f: &SignPoly, ambient: &[SignGen]) -> Result<Rational> {
    let amb = SignMonomial::from_gens(ambient).mask();
    let outside = f.support_mask() & !amb;
    if outside != 0 {
        let g = SignMonomial(outside).support()[0];
        return Err(QplError::Precondition(format!(
            "generator l{},{} outside the ambient set",
            g.factor + 1,
            g.slot
        )));
    }
    let count = amb.count_ones();
    Ok(f.constant_term() * Rational::from_integer(num_bigint::BigInt::one() << count))
}

/// Multilinear interpolation: the unique element in generators (i, slot),
/// i < n, whose value at σ ∈ {±1}ⁿ is `value(σ)`.
pub fn interpolate(n: usize, slot: usize, value: impl Fn(&[i8]) -> Rational) -> SignPoly {
    let points = crate::target::all_signs(n);
    let vals: Vec<Rational> = points.iter().map(|s| value(s)).collect();
    let scale = Rational::new(1.into(), num_bigint::BigInt::one() << n);
    let mut out = SignPoly::default();
    for subset in 0usize..(1 << n) {
        let mut c = Rational::zero();
        for (s, v) in points.iter().zip(&vals) {
            let chi: i8 = (0..n).filter(|i| subset >> i & 1 == 1).map(|i| s[i]).product();
            if chi > 0 {
                c += v;
            } else {
                c -= v;
            }
        }
        let gens: Vec<SignGen> =
            (0..n).filter(|i| subset >> i & 1 == 1).map(|i| SignGen::new(i, slot)).collect();
        out.insert_add(SignMonomial::from_gens(&gens), c * &scale);
    }
    out
}

impl fmt::Debug for SignPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.terms.iter().map(|(m, c)| format!("{}*{:?}", rat_str(c), m)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Add for SignPoly {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.add_ref(&o)
    }
}

impl Sub for SignPoly {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.sub_ref(&o)
    }
}

impl Mul for SignPoly {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.mul_ref(&o)
    }
}

impl Neg for SignPoly {
    type Output = Self;
    fn neg(self) -> Self {
        self.neg_ref()
    }
}

impl Zero for SignPoly {
    fn zero() -> Self {
        SignPoly::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for SignPoly {
    fn one() -> Self {
        Self::monomial(SignMonomial::ONE, Rational::one())
    }
}

impl Coeff for SignPoly {
    fn add_ref(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.add_assign_ref(o);
        r
    }
    fn add_assign_ref(&mut self, o: &Self) {
        for (m, c) in &o.terms {
            self.insert_add(*m, c.clone());
        }
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self.add_ref(&o.neg_ref())
    }
    fn mul_ref(&self, o: &Self) -> Self {
        let mut r = SignPoly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                r.insert_add(m1.mul(*m2), c1 * c2);
            }
        }
        r
    }
    fn neg_ref(&self) -> Self {
        SignPoly { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }
    fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        SignPoly { terms: self.terms.iter().map(|(m, c)| (*m, c * r)).collect() }
    }
    fn from_rational(r: Rational) -> Self {
        Self::monomial(SignMonomial::ONE, r)
    }
    fn try_inv(&self) -> Option<Self> {
        // c·m with m² = 1 inverts to m/c; other units are not needed here.
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next()?;
        Some(Self::monomial(*m, c.recip()))
    }
    fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&SignMonomial::ONE).cloned(),
            _ => None,
        }
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(m, c)| {
                    let gens: Vec<[usize; 2]> =
                        m.support().iter().map(|g| [g.factor + 1, g.slot]).collect();
                    serde_json::json!({"m": gens, "c": rat_str(c)})
                })
                .collect(),
        )
    }
    fn ring_name() -> &'static str {
        "sign-symbolic"
    }
}

/// Two-valued lift used by the factor data: the element equal to `plus` at
/// λ_{i,slot} = +1 and `minus` at −1.
pub fn signed_pair(factor: usize, slot: usize, plus: &Rational, minus: &Rational) -> SignPoly {
    let half = Rational::new(1.into(), 2.into());
    let even = (plus + minus) * &half;
    let odd = (plus - minus) * &half;
    let mut r = SignPoly::from_rational(even);
    r.insert_add(SignMonomial::from_gens(&[SignGen::new(factor, slot)]), odd);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn g(i: usize, j: usize) -> SignGen {
        SignGen::new(i - 1, j)
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonicalize(&[(g(1, 1), 2)]), SignMonomial::ONE);
        assert_eq!(
            canonicalize(&[(g(1, 1), 3), (g(2, 1), 1)]),
            SignMonomial::from_gens(&[g(1, 1), g(2, 1)])
        );
        assert_eq!(canonicalize(&[]), SignMonomial::ONE);
        assert_eq!(SignMonomial::from_gens(&[g(1, 1), g(1, 2), g(3, 7)]).length(), 3);
        assert_eq!(SignMonomial::ONE.length(), 0);
    }

    #[test]
    fn type_examples() {
        let f = SignPoly::monomial(SignMonomial::from_gens(&[g(1, 1), g(1, 2)]), int(1));
        assert!(f.has_type(&TypeTag::new(vec![2], 0)));
        assert!(!SignPoly::gen(g(1, 1)).has_type(&TypeTag::new(vec![0], 0)));
        let h = SignPoly::monomial(SignMonomial::from_gens(&[g(1, 1), g(2, 1)]), int(1));
        assert!(h.has_type(&TypeTag::new(vec![1, 1], 0)));
        // λ_{1,1} has type (1;0), (3;0) and (−1;0) but not (2;0).
        assert!(SignPoly::gen(g(1, 1)).has_type(&TypeTag::new(vec![-1], 0)));
        // λ₁₁λ₁₂λ₁₃ = λ₁₁λ₁₂λ₁₃^{−1}
        assert!(SignPoly::monomial(SignMonomial::from_gens(&[g(1, 1), g(1, 2), g(1, 3)]), int(1)).has_type(&TypeTag::new(vec![1], 0)));
        assert!(SignPoly::gen(g(1, 1)).has_type(&TypeTag::new(vec![3], 0)));
        assert!(!SignPoly::gen(g(1, 1)).has_type(&TypeTag::new(vec![2], 0)));
        // constants have type (2;0) via λ²=1 but not (1;0).
        assert!(SignPoly::one().has_type(&TypeTag::new(vec![2], 0)));
        assert!(!SignPoly::one().has_type(&TypeTag::new(vec![1], 0)));
        assert!(SignPoly::one().has_type(&TypeTag::new(vec![1], 1)));
    }

    #[test]
    fn sums_over_signs() {
        let a = [g(1, 1)];
        assert_eq!(sum_over_signs(&SignPoly::gen(g(1, 1)), &a).unwrap(), int(0));
        assert_eq!(sum_over_signs(&SignPoly::one(), &a).unwrap(), int(2));
        let f = SignPoly::monomial(SignMonomial::from_gens(&[g(1, 1), g(2, 1)]), int(1))
            .add_ref(&SignPoly::from_rational(int(3)));
        assert_eq!(sum_over_signs(&f, &[g(1, 1), g(2, 1)]).unwrap(), int(12));
        assert!(sum_over_signs(&f, &a).is_err());
    }

    #[test]
    fn interpolation_reproduces_values() {
        let f = |s: &[i8]| int(3 * s[0] as i64 + 5 * (s[0] * s[1]) as i64 + 7);
        let p = interpolate(2, 4, f);
        for s in crate::target::all_signs(2) {
            let v = p.evaluate(|gen| s[gen.factor]);
            assert_eq!(v, f(&s));
        }
        assert_eq!(p.len(), 3);
        let q = signed_pair(0, 2, &int(5), &int(1));
        assert_eq!(q.evaluate(|_| 1), int(5));
        assert_eq!(q.evaluate(|_| -1), int(1));
    }
}
