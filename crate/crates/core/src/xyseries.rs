//! Power series in two auxiliary variables x, y with q-series coefficients.

use std::collections::BTreeMap;

use crate::error::{QplError, Result};
use crate::qseries::{QSeries, Truncation};
use crate::scalar::Coeff;

#[derive(Clone, Debug, PartialEq)]
pub struct XYSeries<C: Coeff> {
    xcap: u32,
    ycap: u32,
    trunc: Truncation,
    coeffs: BTreeMap<(u32, u32), QSeries<C>>,
}

impl<C: Coeff> XYSeries<C> {
    pub fn new(xcap: u32, ycap: u32, trunc: Truncation) -> Self {
        XYSeries { xcap, ycap, trunc, coeffs: BTreeMap::new() }
    }

    pub fn caps(&self) -> (u32, u32) {
        (self.xcap, self.ycap)
    }

    pub fn truncation(&self) -> &Truncation {
        &self.trunc
    }

    pub fn coeff(&self, i: u32, j: u32) -> QSeries<C> {
        assert!(i <= self.xcap && j <= self.ycap, "xy-exponent beyond cap");
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(|| QSeries::zero(self.trunc.clone()))
    }

    pub fn set(&mut self, i: u32, j: u32, s: QSeries<C>) {
        if i > self.xcap || j > self.ycap {
            return;
        }
        if s.is_zero() {
            self.coeffs.remove(&(i, j));
        } else {
            self.coeffs.insert((i, j), s.with_truncation(self.trunc.clone()));
        }
    }

    pub fn add_at(&mut self, i: u32, j: u32, s: &QSeries<C>) {
        if i > self.xcap || j > self.ycap {
            return;
        }
        let cur = self.coeff(i, j);
        self.set(i, j, cur.add(s));
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &QSeries<C>)> {
        self.coeffs.iter()
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = XYSeries::new(self.xcap.min(o.xcap), self.ycap.min(o.ycap), self.trunc.meet(&o.trunc));
        for ((i, j), s) in &self.coeffs {
            r.add_at(*i, *j, s);
        }
        for ((i, j), s) in &o.coeffs {
            r.add_at(*i, *j, &s.neg());
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = XYSeries::new(self.xcap.min(o.xcap), self.ycap.min(o.ycap), self.trunc.meet(&o.trunc));
        for ((i1, j1), a) in &self.coeffs {
            for ((i2, j2), b) in &o.coeffs {
                r.add_at(i1 + i2, j1 + j2, &a.mul(b));
            }
        }
        r
    }

    /// G with G·(x+y) = F. Valid for total xy-degree < min(xcap, ycap); each
    /// anti-diagonal of F must have vanishing alternating sum (F(x,−x) = 0).
    pub fn divide_by_x_plus_y(&self) -> Result<Self> {
        let top = self.xcap.min(self.ycap);
        let gcap = top.saturating_sub(1);
        let mut g = XYSeries::new(gcap, gcap, self.trunc.clone());
        let f0 = self.coeff(0, 0);
        if !f0.is_zero() {
            return Err(QplError::DiagonalNonvanishing { degree: 0, detail: format!("{:?}", f0) });
        }
        for t in 1..=top {
            // f_{t,0} = g_{t−1,0}; f_{a,t−a} = g_{a−1,t−a} + g_{a,t−a−1}.
            let mut prev = self.coeff(t, 0);
            g.set(t - 1, 0, prev.clone());
            for b in 1..t {
                let a = t - b;
                let cur = self.coeff(a, b).sub(&prev);
                g.set(a - 1, b, cur.clone());
                prev = cur;
            }
            let resid = self.coeff(0, t).sub(&prev);
            if !resid.is_zero() {
                return Err(QplError::DiagonalNonvanishing { degree: t, detail: format!("{:?}", resid) });
            }
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Rational};

    fn xy(terms: &[((u32, u32), i64)], cap: u32) -> XYSeries<Rational> {
        let tr = Truncation::total(1, 1);
        let mut s = XYSeries::new(cap, cap, tr.clone());
        for &((i, j), c) in terms {
            s.set(i, j, QSeries::constant(tr.clone(), int(c)));
        }
        s
    }

    #[test]
    fn small_quotients() {
        let g = xy(&[((2, 0), 1), ((0, 2), -1)], 4).divide_by_x_plus_y().unwrap();
        assert_eq!(g, xy(&[((1, 0), 1), ((0, 1), -1)], 3));
        let g = xy(&[((1, 0), 1), ((0, 1), 1)], 4).divide_by_x_plus_y().unwrap();
        assert_eq!(g, xy(&[((0, 0), 1)], 3));
        let g = xy(&[((3, 0), 1), ((0, 3), 1)], 4).divide_by_x_plus_y().unwrap();
        assert_eq!(g, xy(&[((2, 0), 1), ((1, 1), -1), ((0, 2), 1)], 3));
        // long division oracle: re-multiply
        let xpy = xy(&[((1, 0), 1), ((0, 1), 1)], 4);
        assert_eq!(g.mul(&xpy), xy(&[((3, 0), 1), ((0, 3), 1)], 3));
    }

    #[test]
    fn diagonal_obstruction_is_reported() {
        let err = xy(&[((1, 0), 1)], 3).divide_by_x_plus_y().unwrap_err();
        assert!(matches!(err, QplError::DiagonalNonvanishing { degree: 1, .. }));
        assert!(xy(&[((0, 0), 2)], 3).divide_by_x_plus_y().is_err());
    }
}
