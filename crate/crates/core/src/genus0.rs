//! Genus-0 operators from the explicit I-function, all in the 1/z regime.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{QplError, Result};
use crate::qseries::{Multidegree, QSeries, Truncation};
use crate::scalar::{Coeff, Rational};
use crate::target::{all_points, phi_basis, phi_dual, EquivClass, Mode, Site};
use crate::xyseries::XYSeries;
use crate::zseries::{ZDir, ZSeries};

/// Expansion of ∏_{k=1}^{d} 1/((w−λ+kz)(w+λ+kz)) as a polynomial in u = 1/z, to u^window.
fn factor_u_poly<M: Mode>(mode: &M, site: &Site, i: usize, d: u32, window: usize) -> Vec<M::C> {
    let w = mode.weight(site, i);
    let lam = mode.lambda_pow(i, 1);
    let shifts = [w.sub_ref(&lam), w.add_ref(&lam)];
    let mut poly = vec![M::C::zero(); window + 1];
    poly[0] = M::C::one();
    for k in 1..=d as i64 {
        for c in &shifts {
            // 1/(c + kz) = Σ_r (−c)^r k^{−r−1} u^{r+1}
            let mut geo = vec![M::C::zero(); window + 1];
            let mut pw = M::C::one();
            let mut kk = Rational::new(1.into(), k.into());
            for r in 0..window {
                geo[r + 1] = pw.scale(&kk);
                pw = pw.mul_ref(&c.neg_ref());
                kk = kk / Rational::from_integer(k.into());
            }
            let mut next = vec![M::C::zero(); window + 1];
            for (a, x) in poly.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (b, y) in geo.iter().enumerate() {
                    if a + b > window || y.is_zero() {
                        continue;
                    }
                    next[a + b].add_assign_ref(&x.mul_ref(y));
                }
            }
            poly = next;
        }
    }
    poly
}

/// I|_p at t = 0, expanded in 1/z down to z^{−window}.
pub fn i_function<M: Mode>(mode: &M, site: &Site, trunc: &Truncation, window: u32) -> Result<ZSeries<M::C>> {
    if window < 2 * trunc.total {
        return Err(QplError::Precondition(format!(
            "z-window {window} too small for q-cap {} (needs {})",
            trunc.total,
            2 * trunc.total
        )));
    }
    let w = window as usize;
    let mut out = ZSeries::new(ZDir::Descending, -(window as i32), 0, trunc.clone());
    let mut cache: BTreeMap<(usize, u32), Vec<M::C>> = BTreeMap::new();
    for d in trunc.degrees() {
        let mut poly = vec![M::C::zero(); w + 1];
        poly[0] = M::C::one();
        for i in 0..mode.n() {
            let f = cache
                .entry((i, d.get(i)))
                .or_insert_with(|| factor_u_poly(mode, site, i, d.get(i), w))
                .clone();
            let mut next = vec![M::C::zero(); w + 1];
            for (a, x) in poly.iter().enumerate() {
                for (b, y) in f.iter().enumerate() {
                    if a + b <= w && !x.is_zero() && !y.is_zero() {
                        next[a + b].add_assign_ref(&x.mul_ref(y));
                    }
                }
            }
            poly = next;
        }
        for (j, c) in poly.into_iter().enumerate() {
            if !c.is_zero() {
                out.add_at(-(j as i32), &QSeries::monomial(trunc.clone(), d, c));
            }
        }
    }
    Ok(out)
}

/// z·∂/∂t_i at t = 0, from the substitution rule I(t,q) = ∏e^{t_iw_i/z}·I(0, q_ie^{t_i}).
pub fn z_dt<M: Mode>(mode: &M, site: &Site, s: &ZSeries<M::C>, i: usize) -> Result<ZSeries<M::C>> {
    s.weight_plus_z_theta(&mode.weight(site, i), i)
}

/// Drop the top of a descending series after checking it vanishes.
fn cap_top<C: Coeff>(s: &ZSeries<C>, top: i32) -> Result<ZSeries<C>> {
    let (lo, hi) = s.window();
    for e in top + 1..=hi {
        let c = s.coeff(e)?;
        if !c.is_zero() {
            return Err(QplError::Precondition(format!("unexpected z^{e} term {:?}", c)));
        }
    }
    let mut r = ZSeries::new(ZDir::Descending, lo, top, s.truncation().clone());
    for (e, c) in s.exponents() {
        if *e <= top {
            r.set(*e, c.clone());
        }
    }
    Ok(r)
}

/// S(H^S)|_p = ∏_{i∈S}(w_i + zθ_i) I|_p, known down to z^{−window}.
pub fn s_operator<M: Mode>(
    mode: &M,
    site: &Site,
    mask: u32,
    trunc: &Truncation,
    window: u32,
) -> Result<ZSeries<M::C>> {
    let extra = mask.count_ones();
    let mut s = i_function(mode, site, trunc, window + extra)?;
    for i in 0..mode.n() {
        if mask >> i & 1 == 1 {
            s = z_dt(mode, site, &s, i)?;
        }
    }
    let s = cap_top(&s, 0)?;
    let (lo, _) = s.window();
    debug_assert!(lo <= -(window as i32));
    let mut r = ZSeries::new(ZDir::Descending, -(window as i32), 0, trunc.clone());
    for (e, c) in s.exponents() {
        if *e >= -(window as i32) {
            r.set(*e, c.clone());
        }
    }
    Ok(r)
}

/// S(γ)|_p for a general class, by linearity.
pub fn s_operator_class<M: Mode>(
    mode: &M,
    site: &Site,
    gamma: &EquivClass<M::C>,
    trunc: &Truncation,
    window: u32,
) -> Result<ZSeries<M::C>> {
    let mut acc = ZSeries::new(ZDir::Descending, -(window as i32), 0, trunc.clone());
    for (mask, c) in &gamma.coeffs {
        let s = s_operator(mode, site, *mask, trunc, window)?;
        let mut scaled = ZSeries::new(ZDir::Descending, -(window as i32), 0, trunc.clone());
        for (e, v) in s.exponents() {
            scaled.set(*e, v.mul_coeff(c));
        }
        acc = acc.add(&scaled)?;
    }
    Ok(acc)
}

/// Polynomial in z with q-series coefficients.
pub type ZPoly<C> = BTreeMap<i32, QSeries<C>>;

#[derive(Clone, Debug)]
pub struct BirkhoffTable<C: Coeff> {
    /// a_p(z, q) indexed by fixed-point index.
    pub coeffs: Vec<ZPoly<C>>,
}

/// Solves Σ_p a_p(z,q)·z∂_{φ_p}I = γ + O(1/z), where z∂_{φ_p} = Σ_S c_{p,S}∏_{i∈S} z∂_{t_i}.
///
/// Triangular in the q-degree: at q⁰ the operator matrix is φ_p|_{p'} = δ.
pub fn birkhoff_coefficients<M: Mode>(
    mode: &M,
    gamma: &EquivClass<M::C>,
    trunc: &Truncation,
    window: u32,
) -> Result<BirkhoffTable<M::C>> {
    let pts = all_points(mode.n());
    // phi_ops[p][p'] = (z∂_{φ_p} I)|_{p'}
    let mut phi_ops = Vec::new();
    for p in &pts {
        let phi = phi_basis(mode, &Site::at(*p));
        let mut row = Vec::new();
        for q in &pts {
            row.push(s_operator_class(mode, &Site::at(*q), &phi, trunc, window)?);
        }
        phi_ops.push(row);
    }
    let zero_d = Multidegree::zero(mode.n());
    for (a, row) in phi_ops.iter().enumerate() {
        for (b, op) in row.iter().enumerate() {
            let lead = op.coeff(0)?.coeff(&zero_d);
            let want = if a == b { M::C::one() } else { M::C::zero() };
            if lead != want {
                return Err(QplError::Singular(format!("q⁰ pivot ({a},{b}) is {:?}", lead)));
            }
        }
    }
    let mut a: Vec<ZPoly<M::C>> = vec![BTreeMap::new(); pts.len()];
    for d in trunc.degrees() {
        for (pj, q) in pts.iter().enumerate() {
            // residual: target minus contributions from lower q-degrees, z^{≥0} part
            let mut resid: ZPoly<M::C> = BTreeMap::new();
            if d.is_zero() {
                let v = gamma.restrict(mode, &Site::at(*q));
                resid.insert(0, QSeries::monomial(trunc.clone(), d, v));
            }
            for (pi, ap) in a.iter().enumerate() {
                for (zk, coeff) in ap {
                    for (dd, c) in coeff.terms() {
                        let Some(rest) = d.checked_sub(dd) else { continue };
                        if rest.is_zero() {
                            continue;
                        }
                        let op = &phi_ops[pi][pj];
                        let (lo, _) = op.window();
                        for e in lo..=0 {
                            let tot = e + zk;
                            if tot < 0 {
                                continue;
                            }
                            let v = op.coeff(e)?.coeff(&rest);
                            if v.is_zero() {
                                continue;
                            }
                            let entry = resid.entry(tot).or_insert_with(|| QSeries::zero(trunc.clone()));
                            entry.add_term(d, &c.mul_ref(&v).neg_ref());
                        }
                        if *zk + lo > 0 {
                            return Err(QplError::Depth("Birkhoff window too small".into()));
                        }
                    }
                }
            }
            for (zk, s) in resid {
                if s.is_zero() {
                    continue;
                }
                let entry = a[pj].entry(zk).or_insert_with(|| QSeries::zero(trunc.clone()));
                *entry = entry.add(&s);
            }
        }
    }
    Ok(BirkhoffTable { coeffs: a })
}

/// Σ_p a_p·z∂_{φ_p}I at a point, for comparison with s_operator(γ).
pub fn birkhoff_apply<M: Mode>(
    mode: &M,
    table: &BirkhoffTable<M::C>,
    site: &Site,
    trunc: &Truncation,
    window: u32,
) -> Result<ZSeries<M::C>> {
    let pts = all_points(mode.n());
    let mut acc = ZSeries::new(ZDir::Descending, -(window as i32), 0, trunc.clone());
    for (pi, p) in pts.iter().enumerate() {
        let phi = phi_basis(mode, &Site::at(*p));
        let op = s_operator_class(mode, site, &phi, trunc, window)?;
        for (zk, coeff) in &table.coeffs[pi] {
            let mut poly = ZSeries::new(ZDir::Descending, *zk - 2 * window as i32, *zk, trunc.clone());
            poly.set(*zk, coeff.clone());
            let prod = poly.mul(&op)?;
            let mut clipped = ZSeries::new(ZDir::Descending, -(window as i32), 0, trunc.clone());
            let (lo, hi) = prod.window();
            for e in lo.max(-(window as i32))..=hi.min(0) {
                clipped.set(e, prod.coeff(e)?);
            }
            for e in 1..=hi {
                if !prod.coeff(e)?.is_zero() {
                    return Err(QplError::Precondition("positive z-power after Birkhoff apply".into()));
                }
            }
            acc = acc.add(&clipped)?;
        }
    }
    Ok(acc)
}

/// (w + zθ − λ)(w + zθ + λ)I − qI for the P¹ factor i, as a one-variable series.
pub fn pf_residual<M: Mode>(mode: &M, site: &Site, i: usize, cap: u32, window: u32) -> Result<ZSeries<M::C>> {
    let one = FactorMode { inner: mode, factor: i };
    let trunc = Truncation::total(1, cap);
    let s = Site { point: crate::target::FixedPoint::from_signs(&[site.point.sign(i)]), slot: site.slot };
    let i_fn = i_function(&one, &s, &trunc, window + 2)?;
    let w = one.weight(&s, 0);
    let lam = one.lambda_pow(0, 1);
    let a = i_fn.weight_plus_z_theta(&w.add_ref(&lam), 0)?;
    let b = a.weight_plus_z_theta(&w.sub_ref(&lam), 0)?;
    let q = QSeries::monomial(trunc.clone(), Multidegree::from_slice(&[1]), M::C::one());
    let qi = i_fn.mul_q(&q);
    let r = b.sub(&qi)?;
    let mut out = ZSeries::new(ZDir::Descending, -(window as i32), 2, trunc);
    for e in -(window as i32)..=2 {
        out.set(e, r.coeff(e)?);
    }
    Ok(out)
}

/// View of factor i of a mode as a one-factor mode (same ring, same slot).
struct FactorMode<'a, M: Mode> {
    inner: &'a M,
    factor: usize,
}

impl<M: Mode> Mode for FactorMode<'_, M> {
    type C = M::C;
    type Out = M::C;
    fn finalize(&self, c: &M::C, _nv: usize) -> Result<M::C> {
        Ok(c.clone())
    }
    fn kind(&self) -> crate::target::ModeKind {
        self.inner.kind()
    }
    fn n(&self) -> usize {
        1
    }
    fn weight(&self, site: &Site, _i: usize) -> M::C {
        self.inner.weight(&lift_site(site, self.factor, self.inner.n()), self.factor)
    }
    fn lambda_pow(&self, _i: usize, k: i32) -> M::C {
        self.inner.lambda_pow(self.factor, k)
    }
    fn lift_pair(&self, site: &Site, _i: usize, plus: &Rational, minus: &Rational) -> M::C {
        self.inner.lift_pair(&lift_site(site, self.factor, self.inner.n()), self.factor, plus, minus)
    }
}

fn lift_site(site: &Site, factor: usize, n: usize) -> Site {
    let mut signs = vec![1i8; n];
    signs[factor] = site.point.sign(0);
    Site { point: crate::target::FixedPoint::from_signs(&signs), slot: site.slot }
}

/// Σ_k S(φ_k)|_i(z)·S(φ^k)|_j(−z) − δ_{ij}e_i.
pub fn s_unitarity_residual<M: Mode>(
    mode: &M,
    si: &Site,
    sj: &Site,
    trunc: &Truncation,
    window: u32,
) -> Result<ZSeries<M::C>> {
    let mut acc = ZSeries::new(ZDir::Descending, -(window as i32), 0, trunc.clone());
    for k in all_points(mode.n()) {
        let sk = Site::at(k);
        let a = s_operator_class(mode, si, &phi_basis(mode, &sk), trunc, window)?;
        let b = s_operator_class(mode, sj, &phi_dual(mode, &sk), trunc, window)?.reflect();
        acc = acc.add(&a.mul(&b)?)?;
    }
    if si.point == sj.point {
        let e = QSeries::constant(trunc.clone(), mode.euler(si));
        acc.add_at(0, &e.neg());
    }
    Ok(acc)
}

/// The two-point series (N − δe)/(x+y) in the variables X = 1/x, Y = 1/y, with its polar constant.
#[derive(Clone, Debug)]
pub struct VSeries<C: Coeff> {
    /// Coefficient of x^{−a}y^{−b} at key (a, b).
    pub regular: XYSeries<C>,
    /// δ_{ij}e_i, the numerator of the polar part δ_{ij}e_i/(x+y).
    pub polar: Option<C>,
}

/// N(x,y) = Σ_k S(φ_k)|_i(x)S(φ^k)|_j(y) in X = 1/x, Y = 1/y.
pub fn v_numerator<M: Mode>(
    mode: &M,
    si: &Site,
    sj: &Site,
    trunc: &Truncation,
    window: u32,
) -> Result<XYSeries<M::C>> {
    let mut n = XYSeries::new(window, window, trunc.clone());
    for k in all_points(mode.n()) {
        let sk = Site::at(k);
        let a = s_operator_class(mode, si, &phi_basis(mode, &sk), trunc, window)?;
        let b = s_operator_class(mode, sj, &phi_dual(mode, &sk), trunc, window)?;
        for (ea, ca) in a.exponents() {
            for (eb, cb) in b.exponents() {
                n.add_at((-ea) as u32, (-eb) as u32, &ca.mul(cb));
            }
        }
    }
    Ok(n)
}

pub fn v_series<M: Mode>(mode: &M, si: &Site, sj: &Site, trunc: &Truncation, window: u32) -> Result<VSeries<M::C>> {
    let mut num = v_numerator(mode, si, sj, trunc, window)?;
    let polar = (si.point == sj.point).then(|| mode.euler(si));
    if let Some(e) = &polar {
        num.add_at(0, 0, &QSeries::constant(trunc.clone(), e.neg_ref()));
    }
    // (N − δe)/(x+y) = XY·(N − δe)/(X+Y)
    let g = num.divide_by_x_plus_y()?;
    let (gx, gy) = g.caps();
    let mut regular = XYSeries::new(gx + 1, gy + 1, trunc.clone());
    for ((a, b), c) in g.terms() {
        regular.set(a + 1, b + 1, c.clone());
    }
    Ok(VSeries { regular, polar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::LaurentPoly;
    use crate::scalar::int;
    use crate::target::{FixedPoint, Lambda, Numeric};

    fn plus(n: usize) -> Site {
        Site::at(FixedPoint::from_index(n, 0))
    }

    #[test]
    fn i_function_first_coefficient() {
        // 1/(z(z+2)) = Σ_r (−2)^r z^{−r−2}
        let m = Numeric { n: 1 };
        let tr = Truncation::total(1, 2);
        let i = i_function(&m, &plus(1), &tr, 8).unwrap();
        let d1 = Multidegree::from_slice(&[1]);
        for r in 0..6 {
            let want = int((-2i64).pow(r as u32));
            assert_eq!(i.coeff(-(r + 2)).unwrap().coeff(&d1), want);
        }
        assert_eq!(i.coeff(-1).unwrap().coeff(&d1), int(0));
        assert_eq!(i.coeff(0).unwrap(), QSeries::one(tr.clone()));
        assert!(i_function(&m, &plus(1), &Truncation::total(1, 5), 8).is_err());
    }

    #[test]
    fn s_operator_h_first_coefficient() {
        // (λ+z)/(z(z+2λ)) at λ=1: z^{-1} + Σ_{r≥1} (−1)^r 2^{r−1} z^{−r−1}
        let m = Numeric { n: 1 };
        let tr = Truncation::total(1, 2);
        let s = s_operator(&m, &plus(1), 1, &tr, 6).unwrap();
        let d1 = Multidegree::from_slice(&[1]);
        assert_eq!(s.coeff(0).unwrap(), QSeries::constant(tr.clone(), int(1)));
        assert_eq!(s.coeff(-1).unwrap().coeff(&d1), int(1));
        assert_eq!(s.coeff(-2).unwrap().coeff(&d1), int(-1));
        assert_eq!(s.coeff(-3).unwrap().coeff(&d1), int(2));
    }

    #[test]
    fn pf_residual_vanishes() {
        for idx in 0..2 {
            let m = Lambda { n: 1 };
            let r = pf_residual(&m, &Site::at(FixedPoint::from_index(1, idx)), 0, 6, 14).unwrap();
            assert!(r.is_zero());
        }
    }

    #[test]
    fn v_series_diagonal() {
        let m = Lambda { n: 1 };
        let tr = Truncation::total(1, 2);
        let v = v_series(&m, &plus(1), &plus(1), &tr, 8).unwrap();
        assert_eq!(v.polar, Some(LaurentPoly::lambda_pow(0, 1).scale(&int(2))));
        let minus = Site::at(FixedPoint::from_index(1, 1));
        assert!(v_series(&m, &plus(1), &minus, &tr, 8).unwrap().polar.is_none());
    }
}
