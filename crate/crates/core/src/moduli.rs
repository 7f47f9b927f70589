//! ψ and Hodge intersection numbers on M̄_{g,n}, g ≤ 2.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{QplError, Result};
use crate::scalar::{factorial, int, parse_rat, rat, rat_str, Coeff, Rational};
use crate::target::{Mode, Site};

fn double_factorial(k: i64) -> BigInt {
    let mut r = BigInt::one();
    let mut k = k;
    while k > 1 {
        r *= k;
        k -= 2;
    }
    r
}

fn sorted_desc(a: &[u32]) -> Vec<u32> {
    let mut v = a.to_vec();
    v.sort_unstable_by(|x, y| y.cmp(x));
    v
}

static PSI_MEMO: OnceLock<RwLock<HashMap<(u32, Vec<u32>), Rational>>> = OnceLock::new();

/// ⟨τ_{a_1}…τ_{a_n}⟩_g; zero unless Σa = 3g−3+n.
pub fn psi_integral(g: u32, a: &[u32]) -> Result<Rational> {
    let n = a.len();
    if 2 * g as i64 - 2 + n as i64 <= 0 {
        return Err(QplError::Unstable { g, n });
    }
    Ok(psi_rec(g, &sorted_desc(a)))
}

/// Genus-0 closed form (n−3)!/∏a_i!.
pub fn psi_genus0_closed(a: &[u32]) -> Rational {
    let n = a.len() as i64;
    if a.iter().map(|&x| x as i64).sum::<i64>() != n - 3 {
        return Rational::zero();
    }
    let den = a.iter().fold(BigInt::one(), |acc, &x| acc * factorial(x));
    Rational::new(factorial((n - 3) as u32), den)
}

fn psi_rec(g: u32, a: &[u32]) -> Rational {
    let n = a.len();
    if 2 * g as i64 - 2 + n as i64 <= 0 {
        return Rational::zero();
    }
    if a.iter().map(|&x| x as i64).sum::<i64>() != 3 * g as i64 - 3 + n as i64 {
        return Rational::zero();
    }
    if g == 0 && n == 3 {
        return Rational::one();
    }
    if g == 1 && n == 1 {
        return rat(1, 24);
    }
    let key = (g, a.to_vec());
    let memo = PSI_MEMO.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = memo.read().unwrap().get(&key) {
        return v.clone();
    }
    let v = psi_compute(g, a);
    memo.write().unwrap().insert(key, v.clone());
    v
}

fn psi_compute(g: u32, a: &[u32]) -> Rational {
    // string equation when a τ_0 is present
    if let Some(pos) = a.iter().position(|&x| x == 0) {
        let mut rest = a.to_vec();
        rest.remove(pos);
        let mut tot = Rational::zero();
        for j in 0..rest.len() {
            if rest[j] > 0 {
                let mut r = rest.clone();
                r[j] -= 1;
                tot += psi_rec(g, &sorted_desc(&r));
            }
        }
        return tot;
    }
    // DVV on the first (largest) entry
    let k = a[0] as i64 - 1;
    let s: Vec<u32> = a[1..].to_vec();
    let mut tot = Rational::zero();
    for j in 0..s.len() {
        let mut r = s.clone();
        let aj = r[j] as i64;
        r[j] = (aj + k) as u32;
        let c = Rational::new(double_factorial(2 * k + 2 * aj + 1), double_factorial(2 * aj - 1));
        tot += c * psi_rec(g, &sorted_desc(&r));
    }
    for r in 0..k {
        let t = k - 1 - r;
        let c = Rational::new(double_factorial(2 * r + 1) * double_factorial(2 * t + 1), BigInt::from(2));
        if g >= 1 {
            let mut v = s.clone();
            v.push(r as u32);
            v.push(t as u32);
            tot += &c * psi_rec(g - 1, &sorted_desc(&v));
        }
        let m = s.len();
        for mask in 0u32..(1 << m) {
            let mut left: Vec<u32> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect();
            let mut right: Vec<u32> = (0..m).filter(|i| mask >> i & 1 == 0).map(|i| s[i]).collect();
            left.push(r as u32);
            right.push(t as u32);
            for g1 in 0..=g {
                let x = psi_rec(g1, &sorted_desc(&left));
                if x.is_zero() {
                    continue;
                }
                tot += &c * x * psi_rec(g - g1, &sorted_desc(&right));
            }
        }
    }
    tot / Rational::from_integer(double_factorial(2 * k + 3))
}

/// ∫ λ₁ψ^a from Mumford's 12λ₁ = κ₁ − Σψ_i + δ.
pub fn lambda1_mumford(g: u32, a: &[u32]) -> Rational {
    let n = a.len();
    if a.iter().map(|&x| x as i64).sum::<i64>() + 1 != 3 * g as i64 - 3 + n as i64 {
        return Rational::zero();
    }
    let mut with2 = a.to_vec();
    with2.push(2);
    let mut tot = psi_rec(g, &sorted_desc(&with2));
    for j in 0..n {
        let mut r = a.to_vec();
        r[j] += 1;
        tot -= psi_rec(g, &sorted_desc(&r));
    }
    let half = rat(1, 2);
    if g >= 1 {
        let mut r = a.to_vec();
        r.extend([0, 0]);
        tot += &half * psi_rec(g - 1, &sorted_desc(&r));
    }
    for h in 0..=g {
        for mask in 0u32..(1 << n) {
            let mut left: Vec<u32> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| a[i]).collect();
            let mut right: Vec<u32> = (0..n).filter(|i| mask >> i & 1 == 0).map(|i| a[i]).collect();
            if 2 * h as i64 - 1 + left.len() as i64 <= 0 || 2 * (g - h) as i64 - 1 + right.len() as i64 <= 0 {
                continue;
            }
            left.push(0);
            right.push(0);
            tot += &half * psi_rec(h, &sorted_desc(&left)) * psi_rec(g - h, &sorted_desc(&right));
        }
    }
    tot / int(12)
}

/// ∫ λ_g ψ^a = binom(2g−3+n; a)·b_g, for g = 1, 2.
pub fn lambda_top(g: u32, a: &[u32]) -> Rational {
    let n = a.len() as i64;
    let total = 2 * g as i64 - 3 + n;
    if a.iter().map(|&x| x as i64).sum::<i64>() != total || total < 0 {
        return Rational::zero();
    }
    let b = match g {
        1 => rat(1, 24),
        2 => rat(7, 5760),
        _ => panic!("λ_g evaluation only for g ≤ 2"),
    };
    let den = a.iter().fold(BigInt::one(), |acc, &x| acc * factorial(x));
    Rational::new(factorial(total as u32), den) * b
}

/// ∫ λ_gλ_{g−1}ψ^a for g = 2. With every a_i ≥ 1 this is
/// (2g−3+n)!|B_{2g}| / (2^{2g−1}(2g)!∏(2a_i−1)!!); zero exponents are first
/// removed with the string equation.
pub fn lambda_top_pair(g: u32, a: &[u32]) -> Rational {
    assert_eq!(g, 2, "only the genus-2 pairing is used");
    let n = a.len() as i64;
    if a.iter().map(|&x| x as i64).sum::<i64>() != g as i64 - 2 + n {
        return Rational::zero();
    }
    if let Some(pos) = a.iter().position(|&x| x == 0) {
        let mut rest = a.to_vec();
        rest.remove(pos);
        let mut tot = Rational::zero();
        for k in 0..rest.len() {
            if rest[k] > 0 {
                let mut b = rest.clone();
                b[k] -= 1;
                tot += lambda_top_pair(g, &b);
            }
        }
        return tot;
    }
    let b4 = rat(1, 30);
    let den = a.iter().fold(BigInt::one(), |acc, &x| acc * double_factorial(2 * x as i64 - 1));
    Rational::new(factorial((2 * g as i64 - 3 + n) as u32), den) * b4 / (int(8) * int(24))
}

/// ∫ λ₁^j ψ^a from first principles (generator for the shipped table).
pub fn hodge_from_formulas(g: u32, a: &[u32], j: u32) -> Rational {
    let n = a.len() as i64;
    if a.iter().map(|&x| x as i64).sum::<i64>() + j as i64 != 3 * g as i64 - 3 + n {
        return Rational::zero();
    }
    match (g, j) {
        (_, 0) => psi_rec(g, &sorted_desc(a)),
        (0, _) => Rational::zero(),
        (_, 1) => lambda1_mumford(g, a),
        (1, _) => Rational::zero(),
        (2, 2) => int(2) * lambda_top(2, a),
        (2, 3) => int(2) * lambda_top_pair(2, a),
        _ => Rational::zero(),
    }
}

pub const TABLE_MAX_N: usize = 6;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HodgeEntry {
    pub g: u32,
    pub lambda1: u32,
    pub psi: Vec<u32>,
    pub value: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HodgeTableFile {
    pub schema: u32,
    pub description: String,
    pub checksum: String,
    pub entries: Vec<HodgeEntry>,
}

fn partitions(total: u32, parts: usize, max: u32) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=max.min(total)).rev() {
        for mut rest in partitions(total - first, parts - 1, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All entries with g ∈ {1,2}, 1 ≤ j ≤ g-dependent top, stable n ≤ TABLE_MAX_N.
pub fn generate_hodge_entries() -> Vec<HodgeEntry> {
    let mut out = Vec::new();
    for g in 1..=2u32 {
        let jmax = if g == 1 { 1 } else { 3 };
        for n in 0..=TABLE_MAX_N {
            if 2 * g as i64 - 2 + n as i64 <= 0 {
                continue;
            }
            for j in 1..=jmax {
                let dim = 3 * g as i64 - 3 + n as i64 - j as i64;
                if dim < 0 {
                    continue;
                }
                for a in partitions(dim as u32, n, dim as u32) {
                    let v = hodge_from_formulas(g, &a, j);
                    out.push(HodgeEntry { g, lambda1: j, psi: a, value: rat_str(&v) });
                }
            }
        }
    }
    out
}

pub fn table_checksum(entries: &[HodgeEntry]) -> String {
    let body = serde_json::to_string(entries).expect("entries serialize");
    hex::encode(Sha256::digest(body.as_bytes()))
}

pub fn generate_hodge_table() -> HodgeTableFile {
    let entries = generate_hodge_entries();
    HodgeTableFile {
        schema: 1,
        description: "integrals of lambda_1^j psi^a over Mbar_{g,n}, g<=2, n<=6; psi sorted descending".into(),
        checksum: table_checksum(&entries),
        entries,
    }
}

const SHIPPED_TABLE: &str = include_str!("../data/hodge_table.json");

type HodgeMap = HashMap<(u32, u32, Vec<u32>), Rational>;

static TABLE: OnceLock<std::result::Result<HodgeMap, String>> = OnceLock::new();

pub fn parse_hodge_table(text: &str) -> Result<HodgeMap> {
    let file: HodgeTableFile =
        serde_json::from_str(text).map_err(|e| QplError::Data(format!("hodge table: {e}")))?;
    let sum = table_checksum(&file.entries);
    if sum != file.checksum {
        return Err(QplError::Data(format!("hodge table checksum mismatch: {sum} vs {}", file.checksum)));
    }
    let mut map = HashMap::new();
    for e in file.entries {
        map.insert((e.g, e.lambda1, sorted_desc(&e.psi)), parse_rat(&e.value)?);
    }
    Ok(map)
}

fn table() -> Result<&'static HodgeMap> {
    TABLE
        .get_or_init(|| parse_hodge_table(SHIPPED_TABLE).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| QplError::Data(e.clone()))
}

/// ∫ λ₁^j ψ^a, with λ₂ already rewritten as λ₁²/2.
pub fn hodge_integral(g: u32, a: &[u32], j: u32) -> Result<Rational> {
    let n = a.len();
    if 2 * g as i64 - 2 + n as i64 <= 0 {
        return Err(QplError::Unstable { g, n });
    }
    if g > 2 {
        return Err(QplError::OutOfRange(format!("Hodge integrals for g={g}")));
    }
    if a.iter().map(|&x| x as i64).sum::<i64>() + j as i64 != 3 * g as i64 - 3 + n as i64 {
        return Ok(Rational::zero());
    }
    if j == 0 {
        return psi_integral(g, a);
    }
    if g == 0 || (g == 1 && j >= 2) || j >= 4 {
        return Ok(Rational::zero());
    }
    hodge_lookup(g, &sorted_desc(a), j)
}

fn hodge_lookup(g: u32, a: &[u32], j: u32) -> Result<Rational> {
    if a.len() <= TABLE_MAX_N {
        return table()?
            .get(&(g, j, a.to_vec()))
            .cloned()
            .ok_or_else(|| QplError::Data(format!("missing table entry g={g} j={j} psi={a:?}")));
    }
    let n = a.len() as i64;
    if let Some(pos) = a.iter().position(|&x| x == 0) {
        let mut rest = a.to_vec();
        rest.remove(pos);
        let mut tot = Rational::zero();
        for i in 0..rest.len() {
            if rest[i] > 0 {
                let mut r = rest.clone();
                r[i] -= 1;
                tot += hodge_lookup(g, &sorted_desc(&r), j)?;
            }
        }
        return Ok(tot);
    }
    if let Some(pos) = a.iter().position(|&x| x == 1) {
        let mut rest = a.to_vec();
        rest.remove(pos);
        return Ok(int(2 * g as i64 - 2 + n - 1) * hodge_lookup(g, &rest, j)?);
    }
    Err(QplError::TableRange(format!("g={g} j={j} psi={a:?}")))
}

/// Ĥ = ∏_k ∏_j (1 − c_j/w_k) with w_k = 2σ_kλ_k, as coefficients of λ₁^j.
///
/// Genus 1: ∏_k(1 − λ₁/w_k), λ₁² = 0. Genus 2: ∏_k(1 − λ₁/w_k + λ₂/w_k²)
/// with λ₂ = λ₁²/2 and λ₁⁴ = 0.
pub fn vertex_hodge_expand<M: Mode>(mode: &M, g: u32, site: &Site) -> Vec<M::C> {
    let top = match g {
        0 => 0,
        1 => 1,
        2 => 3,
        _ => panic!("vertex genus above 2"),
    };
    let mut acc = vec![M::C::zero(); top + 1];
    acc[0] = M::C::one();
    for k in 0..mode.n() {
        let inv = mode.weight(site, k).scale(&int(2)).try_inv().expect("weight is a unit");
        let mut f = vec![M::C::zero(); top + 1];
        f[0] = M::C::one();
        if top >= 1 {
            f[1] = inv.neg_ref();
        }
        if top >= 2 {
            f[2] = inv.mul_ref(&inv).scale(&rat(1, 2));
        }
        let mut next = vec![M::C::zero(); top + 1];
        for (a, x) in acc.iter().enumerate() {
            for (b, y) in f.iter().enumerate() {
                if a + b <= top {
                    next[a + b].add_assign_ref(&x.mul_ref(y));
                }
            }
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::{FixedPoint, Symbolic};

    #[test]
    fn psi_anchors() {
        assert_eq!(psi_integral(0, &[0, 0, 0]).unwrap(), int(1));
        assert_eq!(psi_integral(0, &[1, 1, 0, 0, 0]).unwrap(), int(2));
        assert_eq!(psi_integral(1, &[1]).unwrap(), rat(1, 24));
        assert_eq!(psi_integral(2, &[4]).unwrap(), rat(1, 1152));
        assert_eq!(psi_integral(1, &[1, 1]).unwrap(), rat(1, 24));
        assert!(psi_integral(0, &[0, 0]).is_err());
        assert_eq!(psi_integral(1, &[2]).unwrap(), int(0));
    }

    #[test]
    fn genus0_recursion_matches_closed_form() {
        for n in 3..=8usize {
            for a in partitions((n - 3) as u32, n, (n - 3) as u32) {
                assert_eq!(psi_rec(0, &a), psi_genus0_closed(&a), "{a:?}");
            }
        }
    }

    #[test]
    fn lambda2_lambda1_values() {
        // ∫_{M̄_{2,1}} ψλ₂λ₁ = |B₄|/(2³·3!!·4) and the string equation on zero exponents
        assert_eq!(lambda_top_pair(2, &[1]), rat(1, 2880));
        assert_eq!(lambda_top_pair(2, &[]), rat(1, 5760));
        assert_eq!(lambda_top_pair(2, &[3, 0, 0]), lambda_top_pair(2, &[2, 0]));
        assert_eq!(lambda_top_pair(2, &[2, 0]), lambda_top_pair(2, &[1]));
    }

    #[test]
    fn hodge_anchors() {
        assert_eq!(hodge_integral(1, &[0], 1).unwrap(), rat(1, 24));
        assert_eq!(hodge_integral(2, &[], 3).unwrap(), rat(1, 2880));
        // ⟨τ₂λ₂⟩₂ = ½⟨τ₂λ₁²⟩₂
        assert_eq!(hodge_integral(2, &[2], 2).unwrap() / int(2), rat(7, 5760));
        assert_eq!(hodge_integral(2, &[3], 1).unwrap(), rat(1, 480));
        assert_eq!(hodge_integral(1, &[0], 2).unwrap(), int(0));
    }

    #[test]
    fn genus1_mumford_matches_lambda_g() {
        for n in 1..=5usize {
            for a in partitions((n - 1) as u32, n, (n - 1) as u32) {
                assert_eq!(lambda1_mumford(1, &a), lambda_top(1, &a), "{a:?}");
            }
        }
    }

    #[test]
    fn shipped_table_matches_generator_and_checksum() {
        let file: HodgeTableFile = serde_json::from_str(SHIPPED_TABLE).unwrap();
        assert_eq!(file.entries, generate_hodge_entries());
        assert_eq!(file.checksum, table_checksum(&file.entries));
        let mut tampered = file.clone();
        tampered.entries[0].value = "7/1".into();
        assert!(parse_hodge_table(&serde_json::to_string(&tampered).unwrap()).is_err());
    }

    #[test]
    fn beyond_table_uses_string_and_dilaton() {
        // n = 8 reduces to table entries
        let a = [1, 1, 0, 0, 0, 0, 0, 0];
        let direct = hodge_from_formulas(1, &a, 1);
        assert_eq!(hodge_integral(1, &a, 1).unwrap(), direct);
        let a = [2, 2, 0, 0, 0, 0, 0];
        assert_eq!(hodge_integral(2, &a, 1).unwrap(), hodge_from_formulas(2, &a, 1));
    }

    #[test]
    fn vertex_hodge_genus1_single_factor() {
        let m = Symbolic { n: 1 };
        let site = Site { point: FixedPoint::from_index(1, 0), slot: 3 };
        let h = vertex_hodge_expand(&m, 1, &site);
        assert_eq!(h[0], crate::sign_ring::SignPoly::one());
        let want = crate::sign_ring::SignPoly::gen(crate::sign_ring::SignGen::new(0, 3)).scale(&rat(-1, 2));
        assert_eq!(h[1], want);
        assert_eq!(vertex_hodge_expand(&m, 0, &site).len(), 1);
    }
}
