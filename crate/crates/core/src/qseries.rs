//! Truncated power series in the Novikov variables q₁..qₙ.

use std::cmp::Ordering;
use std::collections::BTreeMap;


use crate::error::{QplError, Result};
use crate::scalar::{int, Coeff, Rational};
use crate::MAX_FACTORS;

/// Exponent vector, ordered graded-lexicographically (q₁ before q₂ within a degree).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Multidegree {
    e: [u16; MAX_FACTORS],
    n: u8,
}

impl Multidegree {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_FACTORS);
        Multidegree { e: [0; MAX_FACTORS], n: n as u8 }
    }

    pub fn from_slice(d: &[u32]) -> Self {
        let mut m = Self::zero(d.len());
        for (i, &x) in d.iter().enumerate() {
            m.e[i] = x as u16;
        }
        m
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut m = Self::zero(n);
        m.e[i] = 1;
        m
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn get(&self, i: usize) -> u32 {
        self.e[i] as u32
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.e[..self.n()].iter().map(|&x| x as u32).collect()
    }

    pub fn total(&self) -> u32 {
        self.e.iter().map(|&x| x as u32).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|&x| x == 0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = *self;
        for i in 0..MAX_FACTORS {
            r.e[i] += o.e[i];
        }
        r
    }

    /// self − o when componentwise non-negative.
    pub fn checked_sub(&self, o: &Self) -> Option<Self> {
        let mut r = *self;
        for i in 0..MAX_FACTORS {
            r.e[i] = r.e[i].checked_sub(o.e[i])?;
        }
        Some(r)
    }

    /// Restriction to one factor, as a one-variable degree.
    pub fn component(&self, i: usize) -> Multidegree {
        Multidegree::from_slice(&[self.get(i)])
    }
}

impl Ord for Multidegree {
    fn cmp(&self, o: &Self) -> Ordering {
        self.total().cmp(&o.total()).then_with(|| o.e.cmp(&self.e))
    }
}

impl PartialOrd for Multidegree {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Truncation: a total-degree cap plus optional per-variable caps.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Truncation {
    pub n: usize,
    pub total: u32,
    pub per_var: Option<Vec<u32>>,
}

impl Truncation {
    pub fn total(n: usize, cap: u32) -> Self {
        Truncation { n, total: cap, per_var: None }
    }

    pub fn per_variable(caps: &[u32]) -> Self {
        Truncation { n: caps.len(), total: caps.iter().sum(), per_var: Some(caps.to_vec()) }
    }

    pub fn contains(&self, d: &Multidegree) -> bool {
        if d.total() > self.total {
            return false;
        }
        match &self.per_var {
            Some(c) => (0..self.n).all(|i| d.get(i) <= c[i]),
            None => true,
        }
    }

    pub fn meet(&self, o: &Self) -> Self {
        let per_var = match (&self.per_var, &o.per_var) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| *x.min(y)).collect()),
        };
        Truncation { n: self.n, total: self.total.min(o.total), per_var }
    }

    /// Upper bound on the i-th exponent.
    pub fn var_cap(&self, i: usize) -> u32 {
        match &self.per_var {
            Some(c) => c[i].min(self.total),
            None => self.total,
        }
    }

    /// Every multidegree inside the truncation, in graded-lex order.
    pub fn degrees(&self) -> Vec<Multidegree> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.n];
        fn rec(t: &Truncation, i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Multidegree>) {
            if i == t.n {
                out.push(Multidegree::from_slice(cur));
                return;
            }
            for k in 0..=left.min(t.var_cap(i)) {
                cur[i] = k;
                rec(t, i + 1, left - k, cur, out);
            }
            cur[i] = 0;
        }
        rec(self, 0, self.total, &mut cur, &mut out);
        out.sort();
        out
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct QSeries<C: Coeff> {
    trunc: Truncation,
    terms: BTreeMap<Multidegree, C>,
}

impl<C: Coeff> QSeries<C> {
    pub fn zero(trunc: Truncation) -> Self {
        QSeries { trunc, terms: BTreeMap::new() }
    }

    pub fn constant(trunc: Truncation, c: C) -> Self {
        let mut s = Self::zero(trunc);
        let z = Multidegree::zero(s.n());
        s.set(z, c);
        s
    }

    pub fn one(trunc: Truncation) -> Self {
        Self::constant(trunc, C::one())
    }

    /// c·q^d (dropped if beyond the truncation).
    pub fn monomial(trunc: Truncation, d: Multidegree, c: C) -> Self {
        let mut s = Self::zero(trunc);
        s.set(d, c);
        s
    }

    pub fn from_terms(trunc: Truncation, terms: impl IntoIterator<Item = (Multidegree, C)>) -> Self {
        let mut s = Self::zero(trunc);
        for (d, c) in terms {
            s.add_term(d, &c);
        }
        s
    }

    pub fn n(&self) -> usize {
        self.trunc.n
    }

    pub fn truncation(&self) -> &Truncation {
        &self.trunc
    }

    pub fn cap(&self) -> u32 {
        self.trunc.total
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Multidegree, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, d: &Multidegree) -> C {
        self.terms.get(d).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Multidegree::zero(self.n()))
    }

    pub fn set(&mut self, d: Multidegree, c: C) {
        if !self.trunc.contains(&d) || c.is_zero() {
            self.terms.remove(&d);
        } else {
            self.terms.insert(d, c);
        }
    }

    pub fn add_term(&mut self, d: Multidegree, c: &C) {
        if !self.trunc.contains(&d) || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&d) {
            Some(v) => {
                v.add_assign_ref(c);
                if v.is_zero() {
                    self.terms.remove(&d);
                }
            }
            None => {
                self.terms.insert(d, c.clone());
            }
        }
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.n() != o.n() {
            return Err(QplError::FactorMismatch(self.n(), o.n()));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut r = Self::zero(self.trunc.meet(&o.trunc));
        for (d, c) in self.terms.iter().chain(o.terms.iter()) {
            r.add_term(*d, c);
        }
        Ok(r)
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.try_add(&o.neg())
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let trunc = self.trunc.meet(&o.trunc);
        let mut r = Self::zero(trunc);
        for (d1, c1) in &self.terms {
            if !r.trunc.contains(d1) {
                continue;
            }
            for (d2, c2) in &o.terms {
                let d = d1.add(d2);
                if r.trunc.contains(&d) {
                    r.add_term(d, &c1.mul_ref(c2));
                }
            }
        }
        Ok(r)
    }

    /// Panicking conveniences for internal code where factor counts agree by construction.
    pub fn add(&self, o: &Self) -> Self {
        self.try_add(o).expect("series factor mismatch")
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.try_sub(o).expect("series factor mismatch")
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.try_mul(o).expect("series factor mismatch")
    }

    pub fn neg(&self) -> Self {
        QSeries {
            trunc: self.trunc.clone(),
            terms: self.terms.iter().map(|(d, c)| (*d, c.neg_ref())).collect(),
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        self.map(|c| c.scale(r))
    }

    pub fn mul_coeff(&self, k: &C) -> Self {
        self.map(|c| c.mul_ref(k))
    }

    pub fn map(&self, f: impl Fn(&C) -> C) -> Self {
        let mut r = Self::zero(self.trunc.clone());
        for (d, c) in &self.terms {
            r.set(*d, f(c));
        }
        r
    }

    /// Coefficientwise change of ring.
    pub fn map_ring<D: Coeff>(&self, f: impl Fn(&Multidegree, &C) -> D) -> QSeries<D> {
        let mut r = QSeries::zero(self.trunc.clone());
        for (d, c) in &self.terms {
            r.set(*d, f(d, c));
        }
        r
    }

    pub fn truncate(&self, trunc: &Truncation) -> Self {
        let t = self.trunc.meet(trunc);
        QSeries {
            terms: self.terms.iter().filter(|(d, _)| t.contains(d)).map(|(d, c)| (*d, c.clone())).collect(),
            trunc: t,
        }
    }

    /// Same terms under a new (not larger) truncation label.
    pub fn with_truncation(&self, trunc: Truncation) -> Self {
        let mut r = Self::zero(trunc);
        for (d, c) in &self.terms {
            r.set(*d, c.clone());
        }
        r
    }

    /// q_i ∂/∂q_i.
    pub fn theta(&self, i: usize) -> Self {
        let mut r = Self::zero(self.trunc.clone());
        for (d, c) in &self.terms {
            r.set(*d, c.scale(&int(d.get(i) as i64)));
        }
        r
    }

    /// Multiply by q^e.
    pub fn shift(&self, e: &Multidegree) -> Self {
        let mut r = Self::zero(self.trunc.clone());
        for (d, c) in &self.terms {
            r.set(d.add(e), c.clone());
        }
        r
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.trunc.clone());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiplicative inverse, solved coefficient by coefficient in graded order.
    pub fn invert(&self) -> Result<Self> {
        let c0 = self.constant_term();
        let inv0 = c0
            .try_inv()
            .ok_or_else(|| QplError::NonUnit(format!("{:?}", c0)))?;
        let mut b: BTreeMap<Multidegree, C> = BTreeMap::new();
        for d in self.trunc.degrees() {
            let v = if d.is_zero() {
                inv0.clone()
            } else {
                let mut acc = C::zero();
                for (e, a) in &self.terms {
                    if e.is_zero() {
                        continue;
                    }
                    if let Some(rest) = d.checked_sub(e) {
                        if let Some(bv) = b.get(&rest) {
                            acc.add_assign_ref(&a.mul_ref(bv));
                        }
                    }
                }
                acc.mul_ref(&inv0).neg_ref()
            };
            if !v.is_zero() {
                b.insert(d, v);
            }
        }
        Ok(QSeries { trunc: self.trunc.clone(), terms: b })
    }

    /// exp(a) for a with zero constant term, via E(exp a) = E(a)·exp a with E the Euler operator.
    pub fn exp(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(QplError::Precondition("exp needs zero constant term".into()));
        }
        let mut b: BTreeMap<Multidegree, C> = BTreeMap::new();
        for d in self.trunc.degrees() {
            let v = if d.is_zero() {
                C::one()
            } else {
                let mut acc = C::zero();
                for (e, a) in &self.terms {
                    if let Some(rest) = d.checked_sub(e) {
                        if let Some(bv) = b.get(&rest) {
                            acc.add_assign_ref(&a.mul_ref(bv).scale(&int(e.total() as i64)));
                        }
                    }
                }
                acc.scale(&Rational::new(1.into(), (d.total() as i64).into()))
            };
            if !v.is_zero() {
                b.insert(d, v);
            }
        }
        Ok(QSeries { trunc: self.trunc.clone(), terms: b })
    }

    /// log(a) for a with constant term 1.
    pub fn log(&self) -> Result<Self> {
        if self.constant_term() != C::one() {
            return Err(QplError::Precondition("log needs constant term 1".into()));
        }
        let mut l: BTreeMap<Multidegree, C> = BTreeMap::new();
        for d in self.trunc.degrees() {
            if d.is_zero() {
                continue;
            }
            let mut acc = C::zero();
            for (e, a) in &self.terms {
                if e.is_zero() || *e == d {
                    continue;
                }
                if let Some(rest) = d.checked_sub(e) {
                    if let Some(lv) = l.get(&rest) {
                        acc.add_assign_ref(&a.mul_ref(lv).scale(&int(rest.total() as i64)));
                    }
                }
            }
            let v = self
                .coeff(&d)
                .sub_ref(&acc.scale(&Rational::new(1.into(), (d.total() as i64).into())));
            if !v.is_zero() {
                l.insert(d, v);
            }
        }
        Ok(QSeries { trunc: self.trunc.clone(), terms: l })
    }

    /// Canonical JSON: {"n","cap","terms":[{"d","c"}]} in graded-lex order.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(d, c)| serde_json::json!({"d": d.to_vec(), "c": c.to_json()}))
            .collect();
        let mut obj = serde_json::json!({"n": self.n(), "cap": self.cap(), "terms": terms});
        if let Some(c) = &self.trunc.per_var {
            obj["caps"] = serde_json::json!(c);
        }
        obj
    }
}

impl QSeries<Rational> {
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |m: &str| QplError::Data(format!("series json: {m}"));
        let n = v["n"].as_u64().ok_or_else(|| bad("n"))? as usize;
        let cap = v["cap"].as_u64().ok_or_else(|| bad("cap"))? as u32;
        let trunc = match v.get("caps") {
            Some(c) => {
                let caps: Vec<u32> = c
                    .as_array()
                    .ok_or_else(|| bad("caps"))?
                    .iter()
                    .map(|x| x.as_u64().map(|x| x as u32).ok_or_else(|| bad("caps")))
                    .collect::<Result<_>>()?;
                Truncation { n, total: cap, per_var: Some(caps) }
            }
            None => Truncation::total(n, cap),
        };
        let mut s = QSeries::zero(trunc);
        for t in v["terms"].as_array().ok_or_else(|| bad("terms"))? {
            let d: Vec<u32> = t["d"]
                .as_array()
                .ok_or_else(|| bad("d"))?
                .iter()
                .map(|x| x.as_u64().map(|x| x as u32).ok_or_else(|| bad("d")))
                .collect::<Result<_>>()?;
            if d.len() != n {
                return Err(bad("exponent length"));
            }
            let c = crate::scalar::parse_rat(t["c"].as_str().ok_or_else(|| bad("c"))?)?;
            s.set(Multidegree::from_slice(&d), c);
        }
        Ok(s)
    }
}

/// One-variable series from a coefficient list.
pub fn univariate<C: Coeff>(cap: u32, coeffs: &[C]) -> QSeries<C> {
    let mut s = QSeries::zero(Truncation::total(1, cap));
    for (k, c) in coeffs.iter().enumerate() {
        s.set(Multidegree::from_slice(&[k as u32]), c.clone());
    }
    s
}

/// Embed a one-variable series as a series in q_i among n variables.
pub fn embed<C: Coeff>(s: &QSeries<C>, i: usize, trunc: &Truncation) -> QSeries<C> {
    let mut r = QSeries::zero(trunc.clone());
    for (d, c) in s.terms() {
        let mut e = Multidegree::zero(trunc.n);
        e.e[i] = d.get(0) as u16;
        r.set(e, c.clone());
    }
    r
}

impl<C: Coeff> QSeries<C> {
    /// Is every coefficient a plain rational, and which?
    pub fn as_rational_series(&self) -> Option<QSeries<Rational>> {
        let mut r = QSeries::zero(self.trunc.clone());
        for (d, c) in &self.terms {
            r.set(*d, c.as_rational()?);
        }
        Some(r)
    }
}

pub fn one_trunc(cap: u32) -> Truncation {
    Truncation::total(1, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{factorial, rat};
    use num_traits::Zero;

    fn t1(cap: u32) -> Truncation {
        Truncation::total(1, cap)
    }

    fn q(n: usize, i: usize, cap: u32) -> QSeries<Rational> {
        QSeries::monomial(Truncation::total(n, cap), Multidegree::unit(n, i), int(1))
    }

    #[test]
    fn graded_lex_order() {
        let mut v = Truncation::total(2, 2).degrees();
        v.sort();
        let got: Vec<Vec<u32>> = v.iter().map(|d| d.to_vec()).collect();
        assert_eq!(got, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn difference_of_squares_and_identity() {
        let one = QSeries::one(t1(4));
        let x = q(1, 0, 4);
        let p = one.add(&x).mul(&one.sub(&x));
        assert_eq!(p, one.sub(&x.mul(&x)));
        let two = Truncation::total(2, 3);
        let s = QSeries::one(two.clone()).add(&q(2, 0, 3)).add(&q(2, 1, 3));
        assert_eq!(s.mul(&QSeries::one(two)), s);
    }

    #[test]
    fn exp_times_exp_neg_by_convolution() {
        let cap = 6;
        let e: Vec<Rational> = (0..=cap).map(|d| Rational::new(1.into(), factorial(d))).collect();
        let en: Vec<Rational> =
            (0..=cap).map(|d| Rational::new(if d % 2 == 0 { 1.into() } else { (-1).into() }, factorial(d))).collect();
        // brute-force convolution as the oracle
        let mut conv = vec![Rational::zero(); cap as usize + 1];
        for i in 0..=cap as usize {
            for j in 0..=(cap as usize - i) {
                conv[i + j] += &e[i] * &en[j];
            }
        }
        assert_eq!(univariate(cap, &conv), QSeries::one(t1(cap)));
        assert_eq!(univariate(cap, &e).mul(&univariate(cap, &en)), QSeries::one(t1(cap)));
    }

    #[test]
    fn geometric_inverse() {
        let cap = 5;
        let a = QSeries::one(t1(cap)).sub(&q(1, 0, cap));
        let b = a.invert().unwrap();
        assert_eq!(b, univariate(cap, &vec![int(1); cap as usize + 1]));
        assert_eq!(QSeries::<Rational>::one(t1(3)).invert().unwrap(), QSeries::one(t1(3)));
        assert!(QSeries::<Rational>::zero(t1(3)).invert().is_err());
    }

    #[test]
    fn inverse_agrees_with_newton() {
        let tr = Truncation::total(2, 5);
        let a = QSeries::one(tr.clone()).add(&q(2, 0, 5).scale(&int(2))).add(&q(2, 1, 5));
        let direct = a.invert().unwrap();
        // Newton: b ← b(2 − ab), doubling correct degrees from b = 1.
        let mut b = QSeries::one(tr.clone());
        for _ in 0..4 {
            let two = QSeries::constant(tr.clone(), int(2));
            b = b.mul(&two.sub(&a.mul(&b)));
        }
        assert_eq!(direct, b);
        assert_eq!(direct.coeff(&Multidegree::from_slice(&[1, 1])), int(4));
        assert_eq!(direct.coeff(&Multidegree::from_slice(&[0, 2])), int(1));
    }

    #[test]
    fn exp_and_log() {
        let cap = 6;
        let x = q(1, 0, cap);
        let e = x.exp().unwrap();
        let want: Vec<Rational> = (0..=cap).map(|d| Rational::new(1.into(), factorial(d))).collect();
        assert_eq!(e, univariate(cap, &want));
        let l = QSeries::one(t1(cap)).add(&x).log().unwrap();
        let want: Vec<Rational> = (0..=cap as i64)
            .map(|d| if d == 0 { int(0) } else { rat(if d % 2 == 1 { 1 } else { -1 }, d) })
            .collect();
        assert_eq!(l, univariate(cap, &want));
        let tr = Truncation::total(2, 4);
        let s = QSeries::one(tr.clone()).add(&q(2, 0, 4)).add(&q(2, 1, 4));
        assert_eq!(s.log().unwrap().exp().unwrap(), s);
        assert!(s.exp().is_err());
        assert!(x.log().is_err());
    }

    #[test]
    fn per_variable_caps() {
        let tr = Truncation::per_variable(&[2, 1]);
        let a = QSeries::<Rational>::one(tr.clone()).add(&QSeries::monomial(tr.clone(), Multidegree::unit(2, 0), int(1)));
        let sq = a.mul(&a).mul(&a);
        assert_eq!(sq.coeff(&Multidegree::from_slice(&[2, 0])), int(3));
        assert_eq!(sq.coeff(&Multidegree::from_slice(&[3, 0])), int(0));
        assert_eq!(tr.degrees().len(), 6);
    }

    #[test]
    fn json_round_trip() {
        let a = univariate(3, &[int(1), rat(-1, 4), rat(5, 32)]);
        let j = a.to_json();
        assert_eq!(j.to_string(), r#"{"cap":3,"n":1,"terms":[{"c":"1/1","d":[0]},{"c":"-1/4","d":[1]},{"c":"5/32","d":[2]}]}"#);
        assert_eq!(QSeries::from_json(&j).unwrap(), a);
    }

    #[test]
    fn mismatched_factor_counts_are_rejected() {
        assert!(q(1, 0, 2).try_add(&q(2, 0, 2)).is_err());
        assert!(q(1, 0, 2).try_mul(&q(2, 1, 2)).is_err());
    }
}
