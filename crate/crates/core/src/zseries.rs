//! Series in an auxiliary variable z with q-series coefficients and an explicit validity window.

use std::collections::BTreeMap;

use crate::error::{QplError, Result};
use crate::qseries::{QSeries, Truncation};
use crate::scalar::{Coeff, Rational};

/// Which side of the window is exact.
///
/// `Descending`: expansions in 1/z, exactly zero above `hi`, unknown below `lo`.
/// `Ascending`: expansions in z, exactly zero below `lo`, unknown above `hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZDir {
    Descending,
    Ascending,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZSeries<C: Coeff> {
    dir: ZDir,
    lo: i32,
    hi: i32,
    trunc: Truncation,
    coeffs: BTreeMap<i32, QSeries<C>>,
}

impl<C: Coeff> ZSeries<C> {
    pub fn new(dir: ZDir, lo: i32, hi: i32, trunc: Truncation) -> Self {
        ZSeries { dir, lo, hi, trunc, coeffs: BTreeMap::new() }
    }

    pub fn window(&self) -> (i32, i32) {
        (self.lo, self.hi)
    }

    pub fn dir(&self) -> ZDir {
        self.dir
    }

    pub fn truncation(&self) -> &Truncation {
        &self.trunc
    }

    fn known(&self, e: i32) -> bool {
        e >= self.lo && e <= self.hi
    }

    fn exact_zero(&self, e: i32) -> bool {
        match self.dir {
            ZDir::Descending => e > self.hi,
            ZDir::Ascending => e < self.lo,
        }
    }

    /// Coefficient of z^e; error when it lies in the unknown region.
    pub fn coeff(&self, e: i32) -> Result<QSeries<C>> {
        if self.exact_zero(e) {
            return Ok(QSeries::zero(self.trunc.clone()));
        }
        if !self.known(e) {
            return Err(QplError::WindowExhausted { exponent: e, lo: self.lo, hi: self.hi });
        }
        Ok(self.coeffs.get(&e).cloned().unwrap_or_else(|| QSeries::zero(self.trunc.clone())))
    }

    pub fn set(&mut self, e: i32, s: QSeries<C>) {
        assert!(self.known(e), "z-exponent {e} outside window");
        if s.is_zero() {
            self.coeffs.remove(&e);
        } else {
            self.coeffs.insert(e, s.with_truncation(self.trunc.clone()));
        }
    }

    pub fn add_at(&mut self, e: i32, s: &QSeries<C>) {
        let cur = self.coeff(e).expect("add outside window");
        self.set(e, cur.add(s));
    }

    pub fn exponents(&self) -> impl Iterator<Item = (&i32, &QSeries<C>)> {
        self.coeffs.iter()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.combine(o, false)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.combine(o, true)
    }

    fn combine(&self, o: &Self, negate: bool) -> Result<Self> {
        if self.dir != o.dir {
            return Err(QplError::Precondition("z-series directions differ".into()));
        }
        let (lo, hi) = match self.dir {
            ZDir::Descending => (self.lo.max(o.lo), self.hi.max(o.hi)),
            ZDir::Ascending => (self.lo.min(o.lo), self.hi.min(o.hi)),
        };
        let trunc = self.trunc.meet(&o.trunc);
        let mut r = ZSeries::new(self.dir, lo, hi, trunc);
        for e in lo..=hi {
            let a = self.coeff(e)?;
            let b = o.coeff(e)?;
            r.set(e, if negate { a.sub(&b) } else { a.add(&b) });
        }
        Ok(r)
    }

    /// Product; the valid window shrinks to what both factors determine.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.dir != o.dir {
            return Err(QplError::Precondition("z-series directions differ".into()));
        }
        let (lo, hi) = match self.dir {
            ZDir::Descending => ((self.lo + o.hi).max(o.lo + self.hi), self.hi + o.hi),
            ZDir::Ascending => (self.lo + o.lo, (self.hi + o.lo).min(o.hi + self.lo)),
        };
        let trunc = self.trunc.meet(&o.trunc);
        let mut r = ZSeries::new(self.dir, lo, hi, trunc);
        for (e1, a) in &self.coeffs {
            for (e2, b) in &o.coeffs {
                let e = e1 + e2;
                if e >= lo && e <= hi {
                    r.add_at(e, &a.mul(b));
                }
            }
        }
        Ok(r)
    }

    pub fn mul_q(&self, s: &QSeries<C>) -> Self {
        let mut r = ZSeries::new(self.dir, self.lo, self.hi, self.trunc.meet(s.truncation()));
        for (e, a) in &self.coeffs {
            r.set(*e, a.mul(s));
        }
        r
    }

    /// Multiply by z^k.
    pub fn shift(&self, k: i32) -> Self {
        let mut r = ZSeries::new(self.dir, self.lo + k, self.hi + k, self.trunc.clone());
        for (e, a) in &self.coeffs {
            r.set(e + k, a.clone());
        }
        r
    }

    /// z ↦ −z.
    pub fn reflect(&self) -> Self {
        let mut r = self.clone();
        for (e, a) in r.coeffs.iter_mut() {
            if e.rem_euclid(2) == 1 {
                *a = a.neg();
            }
        }
        r
    }

    /// (w + z·q_i∂_{q_i}) applied to the series.
    pub fn weight_plus_z_theta(&self, w: &C, i: usize) -> Result<Self> {
        let mut a = self.clone();
        for v in a.coeffs.values_mut() {
            *v = v.mul_coeff(w);
        }
        let mut b = ZSeries::new(self.dir, self.lo, self.hi, self.trunc.clone());
        for (e, s) in &self.coeffs {
            b.set(*e, s.theta(i));
        }
        let b = b.shift(1);
        // For a descending series the shift raises the exact-zero ceiling; keep the
        // common window.
        let (lo, hi) = match self.dir {
            ZDir::Descending => (self.lo + 1, self.hi + 1),
            ZDir::Ascending => (self.lo, self.hi),
        };
        let mut r = ZSeries::new(self.dir, lo, hi, self.trunc.clone());
        for e in lo..=hi {
            let x = if a.exact_zero(e) || a.known(e) { a.coeff(e)? } else { continue };
            r.set(e, x.add(&b.coeff(e)?));
        }
        Ok(r)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v = v.scale(r);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::Multidegree;
    use crate::scalar::int;

    fn c(v: i64) -> QSeries<Rational> {
        QSeries::constant(Truncation::total(1, 2), int(v))
    }

    #[test]
    fn descending_window_shrinks() {
        // (1 + 1/z) known down to z^-3, squared.
        let mut a = ZSeries::new(ZDir::Descending, -3, 0, Truncation::total(1, 2));
        a.set(0, c(1));
        a.set(-1, c(1));
        let b = a.mul(&a).unwrap();
        assert_eq!(b.window(), (-3, 0));
        assert_eq!(b.coeff(-1).unwrap(), c(2));
        assert_eq!(b.coeff(-2).unwrap(), c(1));
        assert_eq!(b.coeff(-3).unwrap(), c(0));
        assert!(b.coeff(-4).is_err());
        assert!(b.coeff(3).unwrap().is_zero());
    }

    #[test]
    fn ascending_window_shrinks() {
        let mut a = ZSeries::new(ZDir::Ascending, -1, 3, Truncation::total(1, 2));
        a.set(-1, c(1));
        a.set(0, c(1));
        let b = a.mul(&a).unwrap();
        assert_eq!(b.window(), (-2, 2));
        assert_eq!(b.coeff(-1).unwrap(), c(2));
        assert!(b.coeff(3).is_err());
    }

    #[test]
    fn weight_plus_theta() {
        let tr = Truncation::total(1, 2);
        let mut a = ZSeries::new(ZDir::Descending, -4, 0, tr.clone());
        a.set(0, QSeries::one(tr.clone()));
        a.set(-2, QSeries::monomial(tr.clone(), Multidegree::from_slice(&[1]), int(1)));
        let b = a.weight_plus_z_theta(&int(3), 0).unwrap();
        assert_eq!(b.coeff(0).unwrap(), QSeries::constant(tr.clone(), int(3)));
        assert_eq!(b.coeff(-1).unwrap(), QSeries::monomial(tr.clone(), Multidegree::from_slice(&[1]), int(1)));
        assert_eq!(b.coeff(-2).unwrap(), QSeries::monomial(tr, Multidegree::from_slice(&[1]), int(3)));
    }
}
