//! The target (P¹)ⁿ: fixed points, square-free classes, and the coefficient modes.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::laurent::LaurentPoly;
use crate::scalar::{int, Coeff, Rational};
use crate::error::Result;
use crate::sign_ring::{signed_pair, sum_over_signs, SignGen, SignPoly};
use crate::MAX_FACTORS;

/// Torus-fixed point: H_i restricts to σ_iλ_i.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FixedPoint {
    n: u8,
    /// bit i set ⇔ σ_i = −1
    minus: u8,
}

impl FixedPoint {
    pub fn from_index(n: usize, idx: usize) -> Self {
        assert!(n <= MAX_FACTORS && idx < 1 << n);
        FixedPoint { n: n as u8, minus: idx as u8 }
    }

    pub fn from_signs(s: &[i8]) -> Self {
        let minus = s.iter().enumerate().fold(0u8, |m, (i, &x)| if x < 0 { m | 1 << i } else { m });
        FixedPoint { n: s.len() as u8, minus }
    }

    pub fn index(&self) -> usize {
        self.minus as usize
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn sign(&self, i: usize) -> i8 {
        if self.minus >> i & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.n()).map(|i| self.sign(i)).collect()
    }
}

impl fmt::Debug for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.n()).map(|i| if self.sign(i) > 0 { '+' } else { '-' }).collect();
        write!(f, "({s})")
    }
}

pub fn all_points(n: usize) -> Vec<FixedPoint> {
    (0..1usize << n).map(|i| FixedPoint::from_index(n, i)).collect()
}

pub fn all_signs(n: usize) -> Vec<Vec<i8>> {
    all_points(n).iter().map(|p| p.signs()).collect()
}

/// Where a piece of local data lives: a fixed point and, for symbolic sums, a sign slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub point: FixedPoint,
    pub slot: usize,
}

impl Site {
    pub fn at(point: FixedPoint) -> Self {
        Site { point, slot: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModeKind {
    Numeric,
    LambdaLaurent,
    SignSymbolic,
}

impl ModeKind {
    pub fn name(self) -> &'static str {
        match self {
            ModeKind::Numeric => "numeric",
            ModeKind::LambdaLaurent => "lambda",
            ModeKind::SignSymbolic => "symbolic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "numeric" => Some(ModeKind::Numeric),
            "lambda" | "lambda-laurent" => Some(ModeKind::LambdaLaurent),
            "symbolic" | "sign" | "sign-symbolic" => Some(ModeKind::SignSymbolic),
            _ => None,
        }
    }
}

/// How the equivariant parameters are specialized in a coefficient ring.
pub trait Mode: Send + Sync {
    type C: Coeff;
    /// Ring of a graph's contribution after summing over vertex signs.
    type Out: Coeff;
    fn kind(&self) -> ModeKind;
    fn n(&self) -> usize;
    /// H_i restricted at the site: σ_iλ_i.
    fn weight(&self, site: &Site, i: usize) -> Self::C;
    /// λ_i^k.
    fn lambda_pow(&self, i: usize, k: i32) -> Self::C;
    /// The ring element equal to `plus` when σ_i = +1 and `minus` when σ_i = −1.
    fn lift_pair(&self, site: &Site, i: usize, plus: &Rational, minus: &Rational) -> Self::C;

    /// Site tuples summed over by a graph with `nv` vertices.
    fn assignments(&self, nv: usize) -> Vec<Vec<Site>> {
        let pts = all_points(self.n());
        let mut out: Vec<Vec<Site>> = vec![vec![]];
        for v in 0..nv {
            let mut next = Vec::with_capacity(out.len() * pts.len());
            for a in &out {
                for p in &pts {
                    let mut b = a.clone();
                    b.push(Site { point: *p, slot: v });
                    next.push(b);
                }
            }
            out = next;
        }
        out
    }

    /// Key under which per-site data is shared.
    fn site_key(&self, site: &Site) -> (usize, usize) {
        (site.point.index(), 0)
    }

    /// Moves data computed for the site's table entry onto the site.
    fn relabel(&self, c: &Self::C, _site: &Site) -> Self::C {
        c.clone()
    }

    /// Sum over the vertex signs of a graph with `nv` vertices.
    fn finalize(&self, c: &Self::C, nv: usize) -> Result<Self::Out>;

    fn euler(&self, site: &Site) -> Self::C {
        (0..self.n()).fold(Self::C::one(), |acc, i| acc.mul_ref(&self.weight(site, i).scale(&int(2))))
    }
}

/// Plain rationals, all λ_i = 1.
#[derive(Clone, Debug)]
pub struct Numeric {
    pub n: usize,
}

impl Mode for Numeric {
    type C = Rational;
    type Out = Rational;
    fn finalize(&self, c: &Rational, _nv: usize) -> Result<Rational> {
        Ok(c.clone())
    }
    fn kind(&self) -> ModeKind {
        ModeKind::Numeric
    }
    fn n(&self) -> usize {
        self.n
    }
    fn weight(&self, site: &Site, i: usize) -> Rational {
        int(site.point.sign(i) as i64)
    }
    fn lambda_pow(&self, _i: usize, _k: i32) -> Rational {
        Rational::one()
    }
    fn lift_pair(&self, site: &Site, i: usize, plus: &Rational, minus: &Rational) -> Rational {
        if site.point.sign(i) > 0 {
            plus.clone()
        } else {
            minus.clone()
        }
    }
}

/// Laurent polynomials in λ₁..λₙ with λ̄ = −λ.
#[derive(Clone, Debug)]
pub struct Lambda {
    pub n: usize,
}

impl Mode for Lambda {
    type C = LaurentPoly;
    type Out = LaurentPoly;
    fn finalize(&self, c: &LaurentPoly, _nv: usize) -> Result<LaurentPoly> {
        Ok(c.clone())
    }
    fn kind(&self) -> ModeKind {
        ModeKind::LambdaLaurent
    }
    fn n(&self) -> usize {
        self.n
    }
    fn weight(&self, site: &Site, i: usize) -> LaurentPoly {
        LaurentPoly::lambda_pow(i, 1).scale(&int(site.point.sign(i) as i64))
    }
    fn lambda_pow(&self, i: usize, k: i32) -> LaurentPoly {
        LaurentPoly::lambda_pow(i, k)
    }
    fn lift_pair(&self, site: &Site, i: usize, plus: &Rational, minus: &Rational) -> LaurentPoly {
        LaurentPoly::from_rational(if site.point.sign(i) > 0 { plus.clone() } else { minus.clone() })
    }
}

/// Sign generators λ_{i,slot}, all |λ| = 1; one assignment per graph.
#[derive(Clone, Debug)]
pub struct Symbolic {
    pub n: usize,
}

impl Mode for Symbolic {
    type C = SignPoly;
    type Out = Rational;
    fn finalize(&self, c: &SignPoly, nv: usize) -> Result<Rational> {
        let ambient: Vec<SignGen> = (0..nv).flat_map(|v| (0..self.n).map(move |i| SignGen::new(i, v))).collect();
        sum_over_signs(c, &ambient)
    }
    fn site_key(&self, site: &Site) -> (usize, usize) {
        (0, site.slot)
    }
    /// Table entries are stored at slot 0.
    fn relabel(&self, c: &SignPoly, site: &Site) -> SignPoly {
        c.map_slots(|_| site.slot)
    }
    fn kind(&self) -> ModeKind {
        ModeKind::SignSymbolic
    }
    fn n(&self) -> usize {
        self.n
    }
    fn weight(&self, site: &Site, i: usize) -> SignPoly {
        SignPoly::gen(SignGen::new(i, site.slot))
    }
    fn lambda_pow(&self, _i: usize, _k: i32) -> SignPoly {
        SignPoly::one()
    }
    fn lift_pair(&self, site: &Site, i: usize, plus: &Rational, minus: &Rational) -> SignPoly {
        signed_pair(i, site.slot, plus, minus)
    }
    fn assignments(&self, nv: usize) -> Vec<Vec<Site>> {
        let p = FixedPoint::from_index(self.n, 0);
        vec![(0..nv).map(|v| Site { point: p, slot: v }).collect()]
    }
}

/// Linear combination of square-free monomials H^S (S as a bitmask).
#[derive(Clone, PartialEq, Debug)]
pub struct EquivClass<C: Coeff> {
    pub n: usize,
    pub coeffs: BTreeMap<u32, C>,
}

impl<C: Coeff> EquivClass<C> {
    pub fn zero(n: usize) -> Self {
        EquivClass { n, coeffs: BTreeMap::new() }
    }

    pub fn monomial(n: usize, mask: u32, c: C) -> Self {
        let mut s = Self::zero(n);
        s.add_term(mask, c);
        s
    }

    pub fn unit(n: usize) -> Self {
        Self::monomial(n, 0, C::one())
    }

    pub fn add_term(&mut self, mask: u32, c: C) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(mask).or_insert_with(C::zero);
        e.add_assign_ref(&c);
        if e.is_zero() {
            self.coeffs.remove(&mask);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.coeffs {
            r.add_term(*m, c.clone());
        }
        r
    }

    pub fn scale_by(&self, k: &C) -> Self {
        let mut r = Self::zero(self.n);
        for (m, c) in &self.coeffs {
            r.add_term(*m, c.mul_ref(k));
        }
        r
    }

    /// Product in H*_T, using H_i² = λ_i².
    pub fn mul<M: Mode<C = C>>(&self, o: &Self, mode: &M) -> Self {
        let mut r = Self::zero(self.n);
        for (m1, c1) in &self.coeffs {
            for (m2, c2) in &o.coeffs {
                let both = m1 & m2;
                let mut c = c1.mul_ref(c2);
                for i in 0..self.n {
                    if both >> i & 1 == 1 {
                        c = c.mul_ref(&mode.lambda_pow(i, 2));
                    }
                }
                r.add_term(m1 ^ m2, c);
            }
        }
        r
    }

    pub fn restrict<M: Mode<C = C>>(&self, mode: &M, site: &Site) -> C {
        let mut acc = C::zero();
        for (m, c) in &self.coeffs {
            let mut t = c.clone();
            for i in 0..self.n {
                if m >> i & 1 == 1 {
                    t = t.mul_ref(&mode.weight(site, i));
                }
            }
            acc.add_assign_ref(&t);
        }
        acc
    }
}

/// ∫_X γ by localization.
pub fn integrate<M: Mode>(mode: &M, gamma: &EquivClass<M::C>) -> M::C {
    let mut acc = M::C::zero();
    for p in all_points(mode.n()) {
        let site = Site::at(p);
        let e = mode.euler(&site).try_inv().expect("Euler class is a unit");
        acc.add_assign_ref(&gamma.restrict(mode, &site).mul_ref(&e));
    }
    acc
}

/// φ_p = ∏_i (H_i + w_i)/(2w_i), w_i = σ_iλ_i.
pub fn phi_basis<M: Mode>(mode: &M, site: &Site) -> EquivClass<M::C> {
    let n = mode.n();
    let half = Rational::new(1.into(), 2.into());
    let mut r = EquivClass::unit(n);
    for i in 0..n {
        let w = mode.weight(site, i);
        let inv2w = w.scale(&int(2)).try_inv().expect("weight is a unit");
        let mut f = EquivClass::monomial(n, 1 << i, inv2w);
        f.add_term(0, M::C::from_rational(half.clone()));
        r = r.mul(&f, mode);
    }
    r
}

/// φ^p = e_p·φ_p.
pub fn phi_dual<M: Mode>(mode: &M, site: &Site) -> EquivClass<M::C> {
    phi_basis(mode, site).scale_by(&mode.euler(site))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_and_top_class() {
        let m = Lambda { n: 1 };
        let e = m.euler(&Site::at(FixedPoint::from_index(1, 0)));
        assert_eq!(e, LaurentPoly::lambda_pow(0, 1).scale(&int(2)));
        let total = all_points(1)
            .iter()
            .fold(LaurentPoly::zero(), |acc, p| acc.add_ref(&m.euler(&Site::at(*p)).try_inv().unwrap()));
        assert!(total.is_zero());
        assert_eq!(Numeric { n: 2 }.euler(&Site::at(FixedPoint::from_index(2, 0))), int(4));
        for n in 1..=3 {
            let top = EquivClass::monomial(n, (1 << n) - 1, LaurentPoly::one());
            assert_eq!(integrate(&Lambda { n }, &top), LaurentPoly::one());
        }
    }

    #[test]
    fn phi_basis_properties() {
        let m = Numeric { n: 1 };
        let plus = Site::at(FixedPoint::from_index(1, 0));
        let minus = Site::at(FixedPoint::from_index(1, 1));
        let phi = phi_basis(&m, &plus);
        assert_eq!(phi.coeffs.get(&0), Some(&Rational::new(1.into(), 2.into())));
        assert_eq!(phi.coeffs.get(&1), Some(&Rational::new(1.into(), 2.into())));
        assert!(phi.restrict(&m, &minus).is_zero());
        for n in 1..=3 {
            let lm = Lambda { n };
            let sum = all_points(n)
                .iter()
                .fold(EquivClass::zero(n), |acc, p| acc.add(&phi_basis(&lm, &Site::at(*p))));
            assert_eq!(sum, EquivClass::unit(n));
        }
        let lm = Lambda { n: 2 };
        for p in all_points(2) {
            for q in all_points(2) {
                let prod = phi_basis(&lm, &Site::at(p)).mul(&phi_dual(&lm, &Site::at(q)), &lm);
                let want = if p == q { LaurentPoly::one() } else { LaurentPoly::zero() };
                assert_eq!(integrate(&lm, &prod), want);
            }
        }
    }
}
