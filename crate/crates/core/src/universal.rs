//! Universal polynomials: correlators with T(ψ)-insertions rewritten in the
//! genus-0 unit brackets s_i = ⟨⟨1,…,1⟩⟩_{0,i+3}.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_traits::{One, Zero};

use crate::error::{QplError, Result};
use crate::moduli::hodge_integral;
use crate::qseries::QSeries;
use crate::scalar::{factorial, rat_str, Coeff, Rational};

/// Monomial x₀^{base} · ∏ y_{k}^{e_k}, where y_k has grading weight k+1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MixedMonomial {
    pub base: i32,
    pub exps: Vec<u32>,
}

impl MixedMonomial {
    fn trimmed(base: i32, mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        MixedMonomial { base, exps }
    }

    pub fn weight(&self) -> u32 {
        self.exps.iter().enumerate().map(|(k, &e)| (k as u32 + 1) * e).sum()
    }

    fn mul(&self, other: &Self) -> Self {
        let len = self.exps.len().max(other.exps.len());
        let exps = (0..len)
            .map(|k| self.exps.get(k).copied().unwrap_or(0) + other.exps.get(k).copied().unwrap_or(0))
            .collect();
        Self::trimmed(self.base + other.base, exps)
    }
}

/// Polynomial in graded variables y_k over a Laurent variable x₀ of weight 0.
///
/// As a [`TPolynomial`] the variables are x₀ = u = 1/(1−t₁), y_k = t_{k+2}.
/// As an [`SExpression`] they are x₀ = s₀, y_k = s_{k+1}.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MixedPoly {
    pub terms: BTreeMap<MixedMonomial, Rational>,
}

pub type TPolynomial = MixedPoly;
pub type SExpression = MixedPoly;

impl MixedPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(base: i32, exps: Vec<u32>, c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(MixedMonomial::trimmed(base, exps), c);
        p
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(0, vec![], c)
    }

    /// The single variable y_k.
    pub fn var(k: usize) -> Self {
        let mut e = vec![0; k + 1];
        e[k] = 1;
        Self::monomial(0, e, Rational::one())
    }

    pub fn base_pow(p: i32) -> Self {
        Self::monomial(p, vec![], Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: MixedMonomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut r = Self::zero();
        for (m, v) in &self.terms {
            r.add_term(m.clone(), v * c);
        }
        r
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut r = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                r.add_term(m1.mul(m2), c1 * c2);
            }
        }
        r
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::constant(Rational::one());
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// The common grading weight; `None` for the zero polynomial.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(MixedMonomial::weight);
        let first = it.next()?;
        assert!(it.all(|w| w == first), "inhomogeneous universal polynomial");
        Some(first)
    }

    /// Substitutes x₀ ↦ base_pow(b) and y_k ↦ images[k].
    ///
    /// `base_powers(e)` returns the image of x₀^e for any integer e.
    pub fn substitute(&self, base_powers: &dyn Fn(i32) -> MixedPoly, images: &[MixedPoly]) -> MixedPoly {
        let mut r = Self::zero();
        for (m, c) in &self.terms {
            let mut t = base_powers(m.base).scale(c);
            for (k, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&images[k].pow(e));
                }
            }
            r = r.add(&t);
        }
        r
    }

    /// Largest y-index used, as a count of variables.
    pub fn num_vars(&self) -> usize {
        self.terms.keys().map(|m| m.exps.len()).max().unwrap_or(0)
    }

    pub fn min_base(&self) -> i32 {
        self.terms.keys().map(|m| m.base).min().unwrap_or(0)
    }

    /// Rendering as an expression in s-variables.
    pub fn display_s(&self) -> String {
        self.render("s0", |k| format!("s{}", k + 1))
    }

    pub fn display_t(&self) -> String {
        self.render("u", |k| format!("t{}", k + 2))
    }

    fn render(&self, base: &str, var: impl Fn(usize) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, c) in self.terms.iter().rev() {
            let mut f = vec![rat_str(c)];
            for (k, &e) in m.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => f.push(var(k)),
                    _ => f.push(format!("{}^{}", var(k), e)),
                }
            }
            if m.base != 0 {
                f.push(format!("{base}^{}", m.base));
            }
            parts.push(f.join("*"));
        }
        parts.join(" + ")
    }
}

impl fmt::Display for MixedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_s())
    }
}

/// Multisets of parts ≥ `min` (each part j costs j−1) with total cost `deg`.
fn t_partitions(deg: u32, min: u32) -> Vec<Vec<u32>> {
    if deg == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for j in min..=deg + 1 {
        for mut rest in t_partitions(deg - (j - 1), j) {
            rest.insert(0, j);
            out.push(rest);
        }
    }
    out
}

/// ⟨⟨ψ^{a_1},…,ψ^{a_n} | λ₁^{hodge}⟩⟩_{g,n} at t₀ = 0 as a polynomial in u, t₂, t₃, ….
pub fn bracket_in_t(g: u32, a: &[u32], hodge: u32) -> Result<TPolynomial> {
    let n = a.len();
    if 2 * g as i64 - 2 + n as i64 <= 0 {
        return Err(QplError::Unstable { g, n });
    }
    let dim = 3 * g as i64 - 3 + n as i64;
    let deg = dim - a.iter().map(|&x| x as i64).sum::<i64>() - hodge as i64;
    let mut out = TPolynomial::zero();
    if deg < 0 {
        return Ok(out);
    }
    for parts in t_partitions(deg as u32, 2) {
        let mut full = a.to_vec();
        full.extend(&parts);
        let c = hodge_integral(g, &full, hodge)?;
        if c.is_zero() {
            continue;
        }
        let mut exps = vec![0u32; (deg as usize).max(1)];
        for &j in &parts {
            exps[j as usize - 2] += 1;
        }
        let sym = exps.iter().fold(num_bigint::BigInt::one(), |acc, &e| acc * factorial(e));
        let base = 2 * g as i32 - 2 + n as i32 + parts.len() as i32;
        out.add_term(MixedMonomial::trimmed(base, exps), c / Rational::from_integer(sym));
    }
    if let Some(d) = out.homogeneous_degree() {
        assert_eq!(d as i64, deg);
    }
    Ok(out)
}

/// s_i(t) = ⟨⟨1^{i+3}⟩⟩_0 at t₀ = 0.
pub fn s_of_t(i: usize) -> TPolynomial {
    bracket_in_t(0, &vec![0; i + 3], 0).expect("stable genus-0 bracket")
}

static T_OF_S: OnceLock<RwLock<Vec<SExpression>>> = OnceLock::new();

/// t_{j+2} as an expression in s₀..s_{j+1}, for j < count.
pub fn s_to_t_inversion(count: usize) -> Vec<SExpression> {
    let lock = T_OF_S.get_or_init(|| RwLock::new(Vec::new()));
    {
        let have = lock.read().unwrap();
        if have.len() >= count {
            return have[..count].to_vec();
        }
    }
    let mut have = lock.write().unwrap();
    while have.len() < count {
        let j = have.len();
        // s_{j+1} = s₀^{j+3} t_{j+2} + rest(t₂..t_{j+1})
        let s = s_of_t(j + 1);
        let lead = MixedMonomial::trimmed(j as i32 + 3, {
            let mut e = vec![0; j + 1];
            e[j] = 1;
            e
        });
        assert_eq!(s.terms.get(&lead), Some(&Rational::one()), "non-invertible leading term");
        let mut rest = s.clone();
        rest.terms.remove(&lead);
        let rest_s = rest.substitute(&SExpression::base_pow, &have);
        let t = SExpression::var(j).sub(&rest_s).mul(&SExpression::base_pow(-(j as i32) - 3));
        have.push(t);
    }
    have[..count].to_vec()
}

type PKey = (u32, Vec<u32>, u32);
static P_MEMO: OnceLock<RwLock<HashMap<PKey, SExpression>>> = OnceLock::new();

/// The universal polynomial P[ψ^{a} | λ₁^{hodge}]_g in s₀, s₁, ….
pub fn p_polynomial(g: u32, a: &[u32], hodge: u32) -> Result<SExpression> {
    let mut sorted = a.to_vec();
    sorted.sort_unstable();
    let key = (g, sorted.clone(), hodge);
    let memo = P_MEMO.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(p) = memo.read().unwrap().get(&key) {
        return Ok(p.clone());
    }
    let t = bracket_in_t(g, &sorted, hodge)?;
    let images = s_to_t_inversion(t.num_vars());
    let p = t.substitute(&SExpression::base_pow, &images);
    memo.write().unwrap().insert(key, p.clone());
    Ok(p)
}

/// Substitutes local s-series into an s-expression.
pub fn p_evaluate<C: Coeff>(expr: &SExpression, s: &[QSeries<C>]) -> Result<QSeries<C>> {
    let s0 = s.first().ok_or_else(|| QplError::Precondition("empty s-table".into()))?;
    let trunc = s0.truncation().clone();
    let mut out = QSeries::zero(trunc.clone());
    if expr.is_zero() {
        return Ok(out);
    }
    let needed = expr.num_vars();
    if s.len() < needed + 1 {
        return Err(QplError::Depth(format!("s-table has {} entries, expression needs {}", s.len(), needed + 1)));
    }
    let min_base = expr.min_base();
    let inv = if min_base < 0 { Some(s0.invert()?) } else { None };
    let mut base_cache: HashMap<i32, QSeries<C>> = HashMap::new();
    let mut var_cache: HashMap<(usize, u32), QSeries<C>> = HashMap::new();
    for (m, c) in &expr.terms {
        let b = base_cache
            .entry(m.base)
            .or_insert_with(|| {
                if m.base >= 0 {
                    s0.pow(m.base as u32)
                } else {
                    inv.as_ref().unwrap().pow((-m.base) as u32)
                }
            })
            .clone();
        let mut term = b.scale(c);
        for (k, &e) in m.exps.iter().enumerate() {
            if e > 0 {
                let v = var_cache.entry((k, e)).or_insert_with(|| s[k + 1].pow(e));
                term = term.mul(v);
            }
        }
        out = out.add(&term);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::{univariate, Truncation};
    use crate::scalar::{int, rat};

    fn s_expr(terms: &[(i32, &[u32], Rational)]) -> SExpression {
        terms.iter().fold(SExpression::zero(), |acc, (b, e, c)| acc.add(&SExpression::monomial(*b, e.to_vec(), c.clone())))
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(bracket_in_t(0, &[0, 0, 0], 0).unwrap(), TPolynomial::base_pow(1));
        let b4 = bracket_in_t(0, &[0, 0, 0, 0], 0).unwrap();
        assert_eq!(b4.terms.get(&MixedMonomial::trimmed(3, vec![1])), Some(&int(1)));
        let b11 = bracket_in_t(1, &[0], 0).unwrap();
        assert_eq!(b11.terms.get(&MixedMonomial::trimmed(2, vec![1])), Some(&rat(1, 24)));
        assert!(bracket_in_t(0, &[0, 0], 0).is_err());
    }

    #[test]
    fn inversion_leading_terms() {
        let t = s_to_t_inversion(3);
        // t₂ = s₁/s₀³
        assert_eq!(t[0], SExpression::monomial(-3, vec![1], int(1)));
        assert_eq!(t[1].homogeneous_degree(), Some(2));
    }

    #[test]
    fn round_trip_through_degree_four() {
        // substitute t(s) into s(t) and recover each s_i
        let t = s_to_t_inversion(5);
        for i in 1..=4 {
            let back = s_of_t(i).substitute(&SExpression::base_pow, &t);
            assert_eq!(back, SExpression::var(i - 1), "s{i}");
        }
    }

    #[test]
    fn genus_one_examples() {
        let p = p_polynomial(1, &[0], 0).unwrap();
        assert_eq!(p, s_expr(&[(-1, &[1], rat(1, 24))]));
        let p = p_polynomial(1, &[0, 0], 0).unwrap();
        assert_eq!(p, s_expr(&[(-1, &[0, 1], rat(1, 24)), (-2, &[2], rat(-1, 24))]));
    }

    #[test]
    fn genus_two_example() {
        let p = p_polynomial(2, &[], 0).unwrap();
        let want = s_expr(&[
            (-2, &[0, 0, 1], rat(1, 1152)),
            (-3, &[1, 1], rat(-7, 1920)),
            (-4, &[3], rat(1, 360)),
        ]);
        assert_eq!(p, want);
    }

    #[test]
    fn evaluation_examples() {
        let trunc = Truncation::total(1, 4);
        let p = p_polynomial(1, &[0], 0).unwrap();
        let consts: Vec<QSeries<Rational>> =
            vec![QSeries::one(trunc.clone()), QSeries::zero(trunc.clone()), QSeries::zero(trunc.clone())];
        assert!(p_evaluate(&p, &consts).unwrap().is_zero());
        let q = univariate(4, &[int(0), int(1)]);
        let s = vec![QSeries::one(trunc.clone()), q.clone(), QSeries::zero(trunc.clone()), QSeries::zero(trunc.clone())];
        assert_eq!(p_evaluate(&p, &s).unwrap(), q.scale(&rat(1, 24)));
        let p2 = p_polynomial(2, &[], 0).unwrap();
        assert_eq!(p_evaluate(&p2, &s).unwrap(), q.pow(3).scale(&rat(1, 360)));
    }

    #[test]
    fn finiteness_spot_check() {
        // any T-insertion has ψ-exponent ≥ 1, so beyond the dimension nothing survives
        for g in 0..=1u32 {
            for n in 1..=4usize {
                if 2 * g as i64 - 2 + n as i64 <= 0 {
                    continue;
                }
                let dim = 3 * g + n as u32 - 3;
                for extra in 1..=3u32 {
                    let a = {
                        let mut v = vec![0; n];
                        v[0] = dim + extra;
                        v
                    };
                    assert!(bracket_in_t(g, &a, 0).unwrap().is_zero());
                    for ins in 1..=3usize {
                        for e in 1..=3u32 {
                            let mut full = a.clone();
                            full.extend(std::iter::repeat(e).take(ins));
                            assert!(hodge_integral(g, &full, 0).unwrap().is_zero());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn homogeneity_matches_dimension_count() {
        for (g, a, h) in [(1u32, vec![0, 0, 0], 1u32), (2, vec![1, 0], 2), (2, vec![0], 0)] {
            let t = bracket_in_t(g, &a, h).unwrap();
            let want = 3 * g + a.len() as u32 - 3 - a.iter().sum::<u32>() - h;
            assert_eq!(t.homogeneous_degree(), Some(want));
        }
    }
}
