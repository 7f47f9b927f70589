//! Local unit brackets s_i^p from the vanishing of global genus-0 correlators.
//!
//! Unknown s_{k−3}^p enters ⟨φ_{p₀}, 1, …, 1⟩_{0,k} only through the
//! single-vertex graph with all b = 1, with coefficient
//! e_p^{−1}·R̃_0(φ_{p₀})|_p·R̃_0(1)|_p^{k−1}. The q⁰ part of that matrix is
//! diag(e_p^{−1}), so each step is a Neumann iteration in q-degree.

use num_traits::{One, Zero};

use crate::engine::{unit_leg, BracketTable, Engine, Leg};
use crate::error::{QplError, Result};
use crate::qseries::QSeries;
use crate::report::Report;
use crate::scalar::{Coeff, Rational};
use crate::sign_ring::{interpolate, SignPoly, TypeTag};
use crate::target::{all_points, phi_basis, FixedPoint, Mode, Site};

fn phi_leg<M: Mode>(mode: &M, p: FixedPoint) -> Leg<M::C> {
    Leg { k: 0, class: phi_basis(mode, &Site::at(p)) }
}

/// Solves A·u = b for series matrices with A(0) diagonal and invertible.
pub fn solve_series_system<C: Coeff>(a: &[Vec<QSeries<C>>], b: &[QSeries<C>]) -> Result<Vec<QSeries<C>>> {
    let n = b.len();
    let trunc = b[0].truncation().clone();
    let zero_deg = crate::qseries::Multidegree::zero(trunc.n);
    let mut dinv = Vec::with_capacity(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && !a[i][j].coeff(&zero_deg).is_zero() {
                return Err(QplError::Singular(format!("q⁰ coupling between unknowns {i} and {j}")));
            }
        }
        dinv.push(a[i][i].coeff(&zero_deg).try_inv().ok_or_else(|| QplError::Singular(format!("q⁰ pivot {i} is not a unit")))?);
    }
    // N = A − A(0)
    let off: Vec<Vec<QSeries<C>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut s = a[i][j].clone();
                    s.set(zero_deg, C::zero());
                    s
                })
                .collect()
        })
        .collect();
    let mut u: Vec<QSeries<C>> = b.iter().zip(&dinv).map(|(bi, di)| bi.mul_coeff(di)).collect();
    for _ in 0..=trunc.total {
        let next: Vec<QSeries<C>> = (0..n)
            .map(|i| {
                let mut r = b[i].clone();
                for j in 0..n {
                    r = r.sub(&off[i][j].mul(&u[j]));
                }
                r.mul_coeff(&dinv[i])
            })
            .collect();
        if next == u {
            break;
        }
        u = next;
    }
    Ok(u)
}

/// Fills s_0..s_depth for every fixed point. The engine's R-depth must cover
/// genus-0 graphs with depth+3 legs.
pub fn bootstrap<C: Coeff, M: Mode<C = C, Out = C>>(engine: &Engine<'_, M>, depth: usize) -> Result<BracketTable<C>> {
    let mode = engine.mode;
    let n = mode.n();
    let pts = all_points(n);
    if engine.k_max() < crate::engine::required_depth(0, depth + 3) {
        return Err(QplError::Depth(format!("R-depth {} too small for bracket depth {depth}", engine.k_max())));
    }
    let mut table = BracketTable::zeros(n, pts.iter().map(|p| p.index()), depth, &engine.trunc);
    engine.set_brackets(table.clone());
    for k in 3..=depth + 3 {
        let mut rhs = Vec::with_capacity(pts.len());
        for &p0 in &pts {
            let legs = vec![(phi_leg(mode, p0), 1), (unit_leg(n), (k - 1) as u32)];
            let mut r = engine.total_series(0, &legs)?;
            if k == 3 {
                let e = mode.euler(&Site::at(p0)).try_inv().expect("Euler class is a unit");
                r = r.sub(&QSeries::constant(engine.trunc.clone(), e));
            }
            rhs.push(r.neg());
        }
        let mut a = Vec::with_capacity(pts.len());
        for &p0 in &pts {
            let phi = phi_basis(mode, &Site::at(p0));
            let row: Vec<QSeries<C>> = pts
                .iter()
                .map(|&p| -> Result<QSeries<C>> {
                    let site = Site::at(p);
                    let ld = engine.local_data(&site)?;
                    let einv = mode.euler(&site).try_inv().expect("Euler class is a unit");
                    Ok(ld.r_class(&phi, 0).mul(&ld.rt[&0][0].pow((k - 1) as u32)).mul_coeff(&einv))
                })
                .collect::<Result<_>>()?;
            a.push(row);
        }
        let u = solve_series_system(&a, &rhs).map_err(|e| QplError::Singular(format!("bracket step k={k}: {e}")))?;
        for (p, up) in pts.iter().zip(u) {
            table.entries.get_mut(&p.index()).unwrap()[k - 3] = up;
        }
        engine.set_brackets(table.clone());
    }
    Ok(table)
}

/// Equations not used by the bootstrap: ⟨φ_{p₀}, φ_{p₁}, 1^{k−2}⟩_0 = δ_{k3}δ_{p₀p₁}/e_{p₀}
/// and ⟨1^k⟩_0 = 0, for 3 ≤ k ≤ max_legs.
pub fn overdetermination_residuals<C: Coeff, M: Mode<C = C, Out = C>>(engine: &Engine<'_, M>, max_legs: usize) -> Result<Report> {
    let mode = engine.mode;
    let n = mode.n();
    let pts = all_points(n);
    let mut rep = Report::new("local brackets satisfy the unused genus-0 vanishing equations");
    for k in 3..=max_legs {
        let r = engine.total_series(0, &[(unit_leg(n), k as u32)])?;
        rep.check(r.is_zero(), || format!("<1^{k}>_0 = {r:?}"));
        for (i, &p0) in pts.iter().enumerate() {
            for &p1 in &pts[i..] {
                let mut legs = if p0 == p1 {
                    vec![(phi_leg(mode, p0), 2)]
                } else {
                    vec![(phi_leg(mode, p0), 1), (phi_leg(mode, p1), 1)]
                };
                if k > 2 {
                    legs.push((unit_leg(n), (k - 2) as u32));
                }
                let mut r = engine.total_series(0, &legs)?;
                if k == 3 && p0 == p1 {
                    let e = mode.euler(&Site::at(p0)).try_inv().expect("unit");
                    r = r.sub(&QSeries::constant(engine.trunc.clone(), e));
                }
                rep.check(r.is_zero(), || format!("<phi_{p0:?}, phi_{p1:?}, 1^{}>_0 residual {r:?}", k - 2));
            }
        }
    }
    Ok(rep)
}

/// Multilinear interpolation of a numeric table into slot-0 sign generators.
pub fn symbolic_table(numeric: &BracketTable<Rational>) -> BracketTable<SignPoly> {
    let n = numeric.n;
    let first = &numeric.entries.values().next().expect("nonempty table")[0];
    let trunc = first.truncation().clone();
    let mut out = Vec::with_capacity(numeric.depth + 1);
    for i in 0..=numeric.depth {
        let mut s = QSeries::zero(trunc.clone());
        for d in trunc.degrees() {
            let c = interpolate(n, 0, |signs| numeric.entries[&FixedPoint::from_signs(signs).index()][i].coeff(&d));
            s.set(d, c);
        }
        out.push(s);
    }
    BracketTable { n, depth: numeric.depth, entries: [(0, out)].into_iter().collect() }
}

/// Checks the symbolic table: specializations match the numeric table, s₀(0) = 1
/// sign-free, s_i(0) = 0 for i ≥ 1, and each coefficient of s_i has type (0̄; i).
pub fn symmetry_check(symbolic: &BracketTable<SignPoly>, numeric: &BracketTable<Rational>) -> Report {
    let n = numeric.n;
    let mut rep = Report::new("local brackets are single sign-ring elements of type (0;i)");
    let s = &symbolic.entries[&0];
    let trunc = s[0].truncation().clone();
    let zero = crate::qseries::Multidegree::zero(n);
    rep.check(s[0].coeff(&zero) == SignPoly::one(), || "s0 does not start with 1".into());
    for (i, si) in s.iter().enumerate() {
        if i > 0 {
            rep.check(si.coeff(&zero).is_zero(), || format!("s{i}(0) != 0"));
        }
        for d in trunc.degrees() {
            let c = si.coeff(&d);
            rep.check(c.has_type(&TypeTag::zero(n, i as u32)), || format!("s{i} at q^{:?} has no type (0;{i}): {c:?}", d.to_vec()));
            for p in all_points(n) {
                let v = c.evaluate(|g| p.sign(g.factor));
                let want = numeric.entries[&p.index()][i].coeff(&d);
                rep.check(v == want, || format!("s{i} at {p:?}, q^{:?}: {v} vs {want}", d.to_vec()));
            }
        }
    }
    rep
}

/// Sanity values: s_i(0) = δ_{i0} at every fixed point.
pub fn initial_conditions<C: Coeff>(table: &BracketTable<C>) -> Report {
    let mut rep = Report::new("s_i(0) = delta_{i0}");
    for (key, s) in &table.entries {
        for (i, si) in s.iter().enumerate() {
            let c0 = si.constant_term();
            let want = if i == 0 { C::one() } else { C::zero() };
            rep.check(c0 == want, || format!("point {key}: s{i}(0) = {c0:?}"));
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{color_insertions, required_depth, EdgeSign, Insertion};
    use crate::qseries::{Multidegree, Truncation};
    use crate::scalar::int;
    use crate::target::Numeric;

    #[test]
    fn p1_bootstrap_and_residuals() {
        let mode = Numeric { n: 1 };
        let trunc = Truncation::total(1, 3);
        let depth = 2;
        let engine = Engine::new(&mode, trunc.clone(), EdgeSign::Proof, required_depth(0, depth + 3), BracketTable::zeros(1, [], 0, &trunc));
        let table = bootstrap(&engine, depth).unwrap();
        assert!(initial_conditions(&table).passed);
        let rep = overdetermination_residuals(&engine, 5).unwrap();
        assert!(rep.passed, "{:?}", rep.details);
    }

    #[test]
    fn n11_is_one() {
        let mode = Numeric { n: 2 };
        let trunc = Truncation::per_variable(&[1, 1]);
        let engine = Engine::new(&mode, trunc.clone(), EdgeSign::Proof, required_depth(0, 3), BracketTable::zeros(2, [], 0, &trunc));
        bootstrap(&engine, 0).unwrap();
        let pt = Insertion::point(2);
        let legs = color_insertions(2, &[pt, pt, pt]);
        let s = engine.total_series(0, &legs).unwrap();
        assert_eq!(s.coeff(&Multidegree::from_slice(&[1, 1])), int(1));
    }
}
