//! z → 0 asymptotics of the localized S-operator: S|_p = e^{U/z} Σ_k R_k z^k.
//!
//! Per P¹ factor at λ = 1, with a = σ + qU′ and θ = q d/dq, the Picard–Fuchs
//! operator (a + zθ)² − (1 + q) acting on Σ R_k z^k gives a² = 1 + q at z⁰ and
//!   2aθR_k + (θa)R_k = −θ²R_{k−1}
//! at z^{k+1}. The H-series is R̃(H)_k = a·R_k + θR_{k−1}.
//! General λ is recovered by homogeneity: the q^m coefficient of U, R_k and
//! R̃(H)_k carries λ^{1−2m}, λ^{−k−2m} and λ^{1−k−2m} respectively.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::Result;
use crate::qseries::{embed, univariate, Multidegree, QSeries, Truncation};
use crate::report::Report;
use crate::scalar::{int, Coeff, Rational};
use crate::sign_ring::{SignGen, SignMonomial, SignPoly, TypeTag};
use crate::target::{all_points, phi_basis, phi_dual, EquivClass, FixedPoint, Mode, Site, Symbolic};

#[derive(Clone, Debug, PartialEq)]
pub struct FactorAsymptotics {
    pub sigma: i8,
    pub cap: u32,
    pub k_max: usize,
    /// a = σ√(1+q)
    pub a: Vec<Rational>,
    pub u: Vec<Rational>,
    /// R_k for γ = 1, k = 0..=k_max.
    pub r: Vec<Vec<Rational>>,
    /// R̃(H)_k.
    pub rh: Vec<Vec<Rational>>,
}

pub fn solve_factor(sigma: i8, cap: u32, k_max: usize) -> FactorAsymptotics {
    let m_max = cap as usize;
    let s = int(sigma as i64);
    // a² = 1 + q, a(0) = σ
    let mut a = vec![Rational::zero(); m_max + 1];
    a[0] = s.clone();
    for m in 1..=m_max {
        let mut rhs = if m == 1 { Rational::one() } else { Rational::zero() };
        for j in 1..m {
            rhs -= &a[j] * &a[m - j];
        }
        a[m] = rhs / (int(2) * &s);
    }
    let u: Vec<Rational> =
        (0..=m_max).map(|m| if m == 0 { Rational::zero() } else { &a[m] / int(m as i64) }).collect();
    let mut r: Vec<Vec<Rational>> = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut rk = vec![Rational::zero(); m_max + 1];
        rk[0] = if k == 0 { Rational::one() } else { Rational::zero() };
        for m in 1..=m_max {
            let mut acc = match k {
                0 => Rational::zero(),
                _ => -(int((m * m) as i64) * &r[k - 1][m]),
            };
            for j in 1..=m {
                acc -= int((2 * (m - j) + j) as i64) * &a[j] * &rk[m - j];
            }
            rk[m] = acc / (int(2 * m as i64) * &a[0]);
        }
        r.push(rk);
    }
    let mut rh = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut v = vec![Rational::zero(); m_max + 1];
        for m in 0..=m_max {
            for j in 0..=m {
                v[m] += &a[j] * &r[k][m - j];
            }
            if k > 0 {
                v[m] += int(m as i64) * &r[k - 1][m];
            }
        }
        rh.push(v);
    }
    FactorAsymptotics { sigma, cap, k_max, a, u, r, rh }
}

/// Residuals of the ansatz substituted back into the factor Picard–Fuchs operator, per z-order.
pub fn ansatz_residual(f: &FactorAsymptotics) -> Vec<QSeries<Rational>> {
    let cap = f.cap;
    let a = univariate(cap, &f.a);
    let one_plus_q = univariate(cap, &[int(1), int(1)]);
    let zero = QSeries::zero(Truncation::total(1, cap));
    let rk = |k: isize| -> QSeries<Rational> {
        if k < 0 {
            zero.clone()
        } else {
            univariate(cap, &f.r[k as usize])
        }
    };
    let mut out = Vec::new();
    // z^0: (a² − 1 − q)R_0; z^{k+1}: 2aθR_k + (θa)R_k + θ²R_{k−1} + (a² − 1 − q)R_{k+1}
    out.push(a.mul(&a).sub(&one_plus_q).mul(&rk(0)));
    for k in 0..f.k_max as isize {
        let r = rk(k);
        let t = a.mul(&r.theta(0)).scale(&int(2)).add(&a.theta(0).mul(&r)).add(&rk(k - 1).theta(0).theta(0));
        out.push(t.add(&a.mul(&a).sub(&one_plus_q).mul(&rk(k + 1))));
    }
    out
}

/// Both sign branches of the factor data.
#[derive(Clone, Debug)]
pub struct FactorTable {
    pub plus: FactorAsymptotics,
    pub minus: FactorAsymptotics,
}

impl FactorTable {
    pub fn new(cap: u32, k_max: usize) -> Self {
        FactorTable { plus: solve_factor(1, cap, k_max), minus: solve_factor(-1, cap, k_max) }
    }

    pub fn k_max(&self) -> usize {
        self.plus.k_max
    }

    pub fn cap(&self) -> u32 {
        self.plus.cap
    }

    fn lift<M: Mode>(&self, mode: &M, site: &Site, i: usize, pick: impl Fn(&FactorAsymptotics) -> &Vec<Rational>, pw: i32, cap: u32) -> QSeries<M::C> {
        let p = pick(&self.plus);
        let m = pick(&self.minus);
        let coeffs: Vec<M::C> = (0..=cap as usize)
            .map(|j| {
                let v = mode.lift_pair(site, i, &p[j], &m[j]);
                if v.is_zero() {
                    v
                } else {
                    v.mul_ref(&mode.lambda_pow(i, pw - 2 * j as i32))
                }
            })
            .collect();
        univariate(cap, &coeffs)
    }

    /// U for factor i at the site, as a one-variable series.
    pub fn u_series<M: Mode>(&self, mode: &M, site: &Site, i: usize, cap: u32) -> QSeries<M::C> {
        self.lift(mode, site, i, |f| &f.u, 1, cap)
    }

    /// R̃(H^ε)_k for factor i (ε = 0 or 1), one-variable series.
    pub fn r_series<M: Mode>(&self, mode: &M, site: &Site, i: usize, eps: u8, k: usize, cap: u32) -> QSeries<M::C> {
        if eps == 0 {
            self.lift(mode, site, i, move |f| &f.r[k], -(k as i32), cap)
        } else {
            self.lift(mode, site, i, move |f| &f.rh[k], 1 - k as i32, cap)
        }
    }
}

/// Per-site asymptotic data for the product target.
#[derive(Clone, Debug)]
pub struct LocalData<C: Coeff> {
    pub site: Site,
    pub u: QSeries<C>,
    /// mask of H-monomial ↦ [R̃_0, …, R̃_K]
    pub rt: BTreeMap<u32, Vec<QSeries<C>>>,
}

impl<C: Coeff> LocalData<C> {
    pub fn k_max(&self) -> usize {
        self.rt[&0].len() - 1
    }

    /// R̃(γ)_k for a general class by linearity.
    pub fn r_class(&self, gamma: &EquivClass<C>, k: usize) -> QSeries<C> {
        let mut acc = QSeries::zero(self.u.truncation().clone());
        for (mask, c) in &gamma.coeffs {
            acc = acc.add(&self.rt[mask][k].mul_coeff(c));
        }
        acc
    }
}

pub fn assemble<M: Mode>(mode: &M, factors: &FactorTable, site: &Site, trunc: &Truncation, k_max: usize) -> LocalData<M::C> {
    let n = mode.n();
    assert!(k_max <= factors.k_max(), "factor table too shallow");
    let mut u = QSeries::zero(trunc.clone());
    // per factor, per ε, per k: series in q_i embedded among n variables
    let mut fr: Vec<[Vec<QSeries<M::C>>; 2]> = Vec::new();
    for i in 0..n {
        let cap = trunc.var_cap(i);
        u = u.add(&embed(&factors.u_series(mode, site, i, cap), i, trunc));
        let mk = |eps: u8| -> Vec<QSeries<M::C>> {
            (0..=k_max).map(|k| embed(&factors.r_series(mode, site, i, eps, k, cap), i, trunc)).collect()
        };
        fr.push([mk(0), mk(1)]);
    }
    let mut rt = BTreeMap::new();
    for mask in 0u32..(1 << n) {
        // product over factors of Σ_k F_i[k] z^k, truncated at z^{k_max}
        let mut acc: Vec<QSeries<M::C>> = (0..=k_max)
            .map(|k| if k == 0 { QSeries::one(trunc.clone()) } else { QSeries::zero(trunc.clone()) })
            .collect();
        for (i, f) in fr.iter().enumerate() {
            let fi = &f[(mask >> i & 1) as usize];
            let mut next = vec![QSeries::zero(trunc.clone()); k_max + 1];
            for (ka, a) in acc.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (kb, b) in fi.iter().enumerate().take(k_max + 1 - ka) {
                    next[ka + kb] = next[ka + kb].add(&a.mul(b));
                }
            }
            acc = next;
        }
        rt.insert(mask, acc);
    }
    LocalData { site: *site, u, rt }
}

/// Sign-parity structure: R_k(−σ) = (−1)^k R_k(σ), R̃(H)_k(−σ) = (−1)^{k+1}R̃(H)_k(σ),
/// U odd in σ, and the q = 0 column (1, 0, 0, …).
pub fn structure_check(factors: &FactorTable) -> Report {
    let mut rep = Report::new("localized S-operator coefficients alternate in σ with k");
    let sym = Symbolic { n: 1 };
    let site = Site { point: FixedPoint::from_index(1, 0), slot: 0 };
    let lam = SignMonomial::from_gens(&[SignGen::new(0, 0)]);
    let cap = factors.cap();
    let allowed = |s: &QSeries<SignPoly>, odd: bool| -> bool {
        let want = if odd { lam } else { SignMonomial::ONE };
        s.terms().all(|(_, c)| c.terms().all(|(m, _)| *m == want))
    };
    rep.check(allowed(&factors.u_series(&sym, &site, 0, cap), true), || "U is not odd in σ".into());
    for k in 0..=factors.k_max() {
        let r = factors.r_series(&sym, &site, 0, 0, k, cap);
        rep.check(allowed(&r, k % 2 == 1), || format!("R_{k} for γ=1 breaks the parity pattern"));
        let rh = factors.r_series(&sym, &site, 0, 1, k, cap);
        rep.check(allowed(&rh, k % 2 == 0), || format!("R_{k} for γ=H breaks the parity pattern"));
        let c0 = r.constant_term();
        let want = if k == 0 { SignPoly::one() } else { SignPoly::zero() };
        rep.check(c0 == want, || format!("q⁰ column of R_{k} is {:?}", c0));
    }
    rep
}

/// Every q-coefficient of R_k = (∏_{i∈S}λ_{i,v})·R̃(H^S)_k has type (0̄; k).
pub fn r_type_check(local: &LocalData<SignPoly>, n: usize) -> Report {
    let mut rep = Report::new("R_k has type (0;k)");
    let slot = local.site.slot;
    for (mask, series) in &local.rt {
        let gens: Vec<SignGen> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| SignGen::new(i, slot)).collect();
        let pre = SignPoly::monomial(SignMonomial::from_gens(&gens), Rational::one());
        for (k, s) in series.iter().enumerate() {
            let tag = TypeTag::zero(n, k as u32);
            for (d, c) in s.terms() {
                let c = c.mul_ref(&pre);
                rep.check(c.has_type(&tag), || format!("mask {mask:b}, k={k}, q^{:?}: {:?}", d.to_vec(), c));
            }
        }
    }
    rep
}

/// Σ_m R̃(φ_m)|_i(x)·R̃(φ^m)|_j(−x) − δ_{ij}e_i, coefficients of x⁰..x^K.
pub fn r_unitarity_residual<M: Mode>(
    mode: &M,
    li: &LocalData<M::C>,
    lj: &LocalData<M::C>,
) -> Vec<QSeries<M::C>> {
    let k_max = li.k_max().min(lj.k_max());
    let trunc = li.u.truncation().meet(lj.u.truncation());
    let mut out = vec![QSeries::zero(trunc.clone()); k_max + 1];
    for p in all_points(mode.n()) {
        let sp = Site::at(p);
        let phi = phi_basis(mode, &sp);
        let dual = phi_dual(mode, &sp);
        let a: Vec<_> = (0..=k_max).map(|k| li.r_class(&phi, k)).collect();
        let b: Vec<_> = (0..=k_max).map(|k| lj.r_class(&dual, k)).collect();
        for k in 0..=k_max {
            for ka in 0..=k {
                let t = a[ka].mul(&b[k - ka]);
                out[k] = if (k - ka) % 2 == 1 { out[k].sub(&t) } else { out[k].add(&t) };
            }
        }
    }
    if li.site.point == lj.site.point {
        out[0] = out[0].sub(&QSeries::constant(trunc, mode.euler(&li.site)));
    }
    out
}

pub fn r_unitarity_check<M: Mode>(mode: &M, li: &LocalData<M::C>, lj: &LocalData<M::C>) -> Result<Report> {
    let mut rep = Report::new(format!("R-unitarity at {:?},{:?}", li.site.point, lj.site.point));
    for (k, s) in r_unitarity_residual(mode, li, lj).iter().enumerate() {
        rep.check(s.is_zero(), || format!("x^{k} residual {:?}", s));
    }
    Ok(rep)
}

/// The q-degree d one-variable coefficient as a plain vector (testing convenience).
pub fn coeff_vec(s: &QSeries<Rational>, cap: u32) -> Vec<Rational> {
    (0..=cap).map(|m| s.coeff(&Multidegree::from_slice(&[m]))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::target::{Lambda, Numeric};

    #[test]
    fn u_and_r_leading_terms() {
        let f = solve_factor(1, 5, 3);
        assert_eq!(f.u[1..].to_vec(), vec![rat(1, 2), rat(-1, 16), rat(1, 48), rat(-5, 512), rat(7, 1280)]);
        assert_eq!(f.r[0][..4].to_vec(), vec![int(1), rat(-1, 4), rat(5, 32), rat(-15, 128)]);
        assert_eq!(f.r[1][..3].to_vec(), vec![int(0), rat(1, 8), rat(-13, 64)]);
        let g = solve_factor(-1, 5, 3);
        assert_eq!(g.u[1], rat(-1, 2));
        assert_eq!(g.r[1][1], rat(-1, 8));
        assert!(ansatz_residual(&f).iter().all(|s| s.is_zero()));
        assert!(ansatz_residual(&g).iter().all(|s| s.is_zero()));
    }

    #[test]
    fn r0_is_quartic_root() {
        // (1+q)^{-1/4}: r_m = r_{m−1}·(−1/4 − (m−1))/m
        let f = solve_factor(1, 6, 0);
        let mut want = vec![int(1)];
        for m in 1..=6i64 {
            let prev = want[m as usize - 1].clone();
            want.push(prev * (rat(-1, 4) - int(m - 1)) / int(m));
        }
        assert_eq!(f.r[0], want);
    }

    #[test]
    fn assemble_is_factorwise() {
        let table = FactorTable::new(3, 2);
        let m = Numeric { n: 2 };
        let tr = Truncation::total(2, 3);
        let site = Site::at(FixedPoint::from_index(2, 0));
        let ld = assemble(&m, &table, &site, &tr, 2);
        assert_eq!(ld.u.coeff(&Multidegree::from_slice(&[1, 0])), rat(1, 2));
        assert_eq!(ld.u.coeff(&Multidegree::from_slice(&[0, 1])), rat(1, 2));
        assert_eq!(ld.u.coeff(&Multidegree::from_slice(&[1, 1])), int(0));
        assert_eq!(ld.rt[&0][0].constant_term(), int(1));
        assert_eq!(ld.rt[&3][0].constant_term(), int(1));
        let lm = Lambda { n: 2 };
        let site = Site::at(FixedPoint::from_index(2, 1));
        let ld = assemble(&lm, &table, &site, &tr, 1);
        let want = lm.weight(&site, 0).mul_ref(&lm.weight(&site, 1));
        assert_eq!(ld.rt[&3][0].constant_term(), want);
    }

    #[test]
    fn structure_and_unitarity_small() {
        let table = FactorTable::new(4, 6);
        assert!(structure_check(&table).passed);
        let lm = Lambda { n: 1 };
        let tr = Truncation::total(1, 4);
        let sites: Vec<Site> = all_points(1).into_iter().map(Site::at).collect();
        let lds: Vec<_> = sites.iter().map(|s| assemble(&lm, &table, s, &tr, 6)).collect();
        for a in &lds {
            for b in &lds {
                let rep = r_unitarity_check(&lm, a, b).unwrap();
                assert!(rep.passed, "{:?}", rep);
            }
        }
    }
}
