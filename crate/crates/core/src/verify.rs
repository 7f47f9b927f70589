//! Audits of the localization sum: sign-ring types of every term, vanishing of
//! total and per-graph sums, and λ-independence of numerical invariants.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::brackets::symbolic_table;
use crate::engine::{color_insertions, vertex_exponents, BracketTable, Insertion};
use crate::error::Result;
use crate::graphs::enumerate_colored;
use crate::pipeline::{engine_for, lambda_series, numeric_brackets, numeric_terms, sum_terms, symbolic_terms, Job};
use crate::qseries::QSeries;
use crate::report::Report;
use crate::scalar::{rat_str, Rational};
use crate::sign_ring::{SignPoly, TypeTag};
use crate::target::{Mode, Symbolic};

fn series_has_type(s: &QSeries<SignPoly>, tag: &TypeTag) -> bool {
    s.terms().all(|(_, c)| c.has_type(tag))
}

/// Expected type of the full contribution: (g − 1 + Σ_k c_{·,k}; 3g − 3 + m − Σk).
pub fn contribution_type(job: &Job) -> TypeTag {
    let a = (0..job.n)
        .map(|i| job.genus as i32 - 1 + job.insertions.iter().map(|x| x.c(i) as i32).sum::<i32>())
        .collect();
    let k: i64 = job.insertions.iter().map(|x| x.k as i64).sum();
    let b = 3 * job.genus as i64 - 3 + job.m() as i64 - k;
    TypeTag::new(a, b.max(0) as u32)
}

/// Symbolic audit of every nonvanishing (Γ, 𝖠, 𝖡): vertex, edge and leg factors
/// carry their types, the types add up to the contribution type, and the
/// product has it. When the job meets both vanishing conditions, each term's
/// sum over vertex signs is also checked to be zero.
pub fn type_audit(job: &Job, numeric: &BracketTable<Rational>) -> Result<Report> {
    job.validate()?;
    let n = job.n;
    let mode = Symbolic { n };
    let engine = engine_for(&mode, job, symbolic_table(numeric));
    let legs = color_insertions::<SignPoly>(n, &job.insertions);
    let colors: Vec<Insertion> = job.insertions.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mult: Vec<u32> = legs.iter().map(|l| l.1).collect();
    let want = contribution_type(job);
    let vanishing = job.parity_condition() && job.dimension_condition();
    let mut rep = Report::new(format!("every localization term has type {want:?}"));
    let mut terms = 0usize;
    for graph in enumerate_colored(job.genus, &mult)? {
        let nv = graph.num_vertices();
        let sites = mode.assignments(nv).remove(0);
        let label = graph.describe();
        engine.for_each_term(&graph, &legs, &sites, |p| {
            terms += 1;
            let mut total = TypeTag::zero(n, 0);
            let mut product = QSeries::one(job.trunc.clone());
            for v in 0..nv {
                let exps = vertex_exponents(p.layout, v, &p.choice[v], &legs);
                let dim = 3 * graph.genus[v] as i64 - 3 + graph.valence(v) as i64;
                let slack = dim - exps.iter().map(|&e| e as i64).sum::<i64>();
                let tag = TypeTag::uniform(n, graph.genus[v] as i32 - 1, slack.max(0) as u32);
                rep.check(series_has_type(&p.vertices[v], &tag), || format!("{label}: vertex {v} exps {exps:?} lacks type {tag:?}"));
                total = total.add(&tag);
                product = product.mul(&p.vertices[v]);
            }
            for (e, &(v, w)) in p.layout.edges.iter().enumerate() {
                let pv = p.layout.flags[v].iter().position(|&f| f == (e, 0)).expect("flag");
                let pw = p.layout.flags[w].iter().position(|&f| f == (e, 1)).expect("flag");
                let (k, l) = (p.choice[v].flag_exps[pv] + 1, p.choice[w].flag_exps[pw] + 1);
                let tag = TypeTag::uniform(n, 1, k + l - 1);
                rep.check(series_has_type(&p.edges[e], &tag), || format!("{label}: edge {e} (k,l)=({k},{l}) lacks type {tag:?}"));
                total = total.add(&tag);
                product = product.mul(&p.edges[e]);
            }
            let mut li = 0;
            for v in 0..nv {
                for (j, &c) in p.layout.legs[v].iter().enumerate() {
                    let b = p.choice[v].leg_exps[j] + 1;
                    let tag = TypeTag::new((0..n).map(|i| colors[c].c(i) as i32).collect(), b - 1);
                    let (_, val) = &p.legs[li];
                    rep.check(series_has_type(val, &tag), || format!("{label}: leg {li} b={b} lacks type {tag:?}"));
                    total = total.add(&tag);
                    product = product.mul(val);
                    li += 1;
                }
            }
            rep.check(total == want, || format!("{label}: factor types add to {total:?}"));
            rep.check(series_has_type(&product, &want), || format!("{label}: product lacks type {want:?}"));
            if vanishing {
                for (d, c) in product.terms() {
                    match mode.finalize(c, nv) {
                        Ok(s) => rep.check(s == Rational::from_integer(0.into()), || {
                            format!("{label}: term sign-sum at q^{:?} is {}", d.to_vec(), rat_str(&s))
                        }),
                        Err(e) => rep.fail(format!("{label}: {e}")),
                    }
                }
            }
        })?;
    }
    rep.note(format!("{terms} terms audited"));
    Ok(rep)
}

/// Outcome of a vanishing check.
#[derive(Clone, Debug, Serialize)]
pub struct VanishingOutcome {
    pub parity_condition: bool,
    pub dimension_condition: bool,
    /// Nonzero coefficients of the total series, "d: value".
    pub nonzero: Vec<String>,
    pub report: Report,
}

/// Computes the series numerically and per graph in both the numeric and the
/// symbolic sign sum. When both conditions hold, the total and every graph's
/// sum must vanish; otherwise the series is only reported.
pub fn vanishing_verify(job: &Job) -> Result<VanishingOutcome> {
    job.validate()?;
    let parity = job.parity_condition();
    let dimension = job.dimension_condition();
    let table = numeric_brackets(job.n, &job.trunc, job.sign, job.bracket_depth())?;
    let numeric = numeric_terms(job, table.clone())?;
    let symbolic = symbolic_terms(job, &table)?;
    let total = sum_terms(&job.trunc, &numeric);
    let spec: Vec<String> = job.insertions.iter().map(|x| x.spec(job.n)).collect();
    let mut rep = Report::new(format!("genus {} series with insertions {} vanishes (n={})", job.genus, spec.join(";"), job.n));
    rep.note(format!("condition (i) parity: {parity}; condition (ii) dimension: {dimension}"));
    for (a, b) in numeric.iter().zip(&symbolic) {
        rep.check(a.graph == b.graph && a.series == b.series, || {
            format!("{}: numeric and symbolic sign sums differ", a.graph.describe())
        });
    }
    let nonzero: Vec<String> = total.terms().map(|(d, c)| format!("{:?}: {}", d.to_vec(), rat_str(c))).collect();
    if parity && dimension {
        rep.check(total.is_zero(), || format!("total series is nonzero: {}", nonzero.join(", ")));
        for t in &numeric {
            rep.check(t.series.is_zero(), || format!("{} sums to {:?}", t.graph.describe(), t.series));
        }
        rep.note(format!("{} graphs, each sign sum zero", numeric.len()));
    } else {
        rep.note("conditions fail; series reported, not asserted".to_string());
        rep.note(format!("nonzero coefficients: {}", if nonzero.is_empty() { "none".into() } else { nonzero.join(", ") }));
    }
    Ok(VanishingOutcome { parity_condition: parity, dimension_condition: dimension, nonzero, report: rep })
}

/// A vdim-zero coefficient computed with λ kept.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaFreeValue {
    pub d: Vec<u32>,
    pub value: String,
}

/// Every vdim-zero coefficient in LambdaLaurent mode must be a pure rational.
/// Also compared against the numeric (λ = 1) run.
pub fn lambda_independence_check(job: &Job) -> Result<(Report, Vec<LambdaFreeValue>)> {
    job.validate()?;
    let series = lambda_series(job)?;
    let numeric = crate::pipeline::numeric_series(job)?;
    let mut rep = Report::new("vdim-zero coefficients are independent of the equivariant parameters");
    let mut values = Vec::new();
    for d in job.trunc.degrees() {
        if !job.vdim_zero(&d) {
            continue;
        }
        let c = series.coeff(&d);
        let pure = c.terms().all(|(e, _)| e.iter().all(|&x| x == 0));
        rep.check(pure, || format!("q^{:?}: coefficient {:?} depends on λ", d.to_vec(), c));
        let v = c.constant_term();
        rep.check(v == numeric.coeff(&d), || format!("q^{:?}: λ-run {} vs numeric {}", d.to_vec(), rat_str(&v), rat_str(&numeric.coeff(&d))));
        values.push(LambdaFreeValue { d: d.to_vec(), value: rat_str(&v) });
    }
    rep.note(format!("{} vdim-zero coefficients checked", values.len()));
    Ok((rep, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EdgeSign;
    use crate::qseries::Truncation;
    use crate::scalar::rat;

    fn job(n: usize, g: u32, ins: &str, cap: u32) -> Job {
        Job::new(n, g, Insertion::parse_list(ins, n).unwrap(), Truncation::total(n, cap), EdgeSign::Proof)
    }

    #[test]
    fn contribution_type_of_h1h2() {
        assert_eq!(contribution_type(&job(2, 1, "0:11", 1)), TypeTag::new(vec![1, 1], 1));
    }

    #[test]
    fn audit_genus1_h1h2() {
        let j = job(2, 1, "0:11", 2);
        let table = numeric_brackets(2, &j.trunc, j.sign, j.bracket_depth()).unwrap();
        let rep = type_audit(&j, &table).unwrap();
        assert!(rep.passed, "{:?}", rep.details);
    }

    #[test]
    fn vanishing_genus1_h1h2() {
        let out = vanishing_verify(&job(2, 1, "0:11", 3)).unwrap();
        assert!(out.parity_condition && out.dimension_condition);
        assert!(out.report.passed, "{:?}", out.report.details);
    }

    #[test]
    fn p1_genus1_fails_conditions_and_is_nonzero() {
        let out = vanishing_verify(&job(1, 1, "0:1", 2)).unwrap();
        assert!(out.parity_condition && !out.dimension_condition);
        assert!(out.report.passed);
        assert!(!out.nonzero.is_empty());
    }

    #[test]
    fn p1_genus1_degree_zero_is_minus_one_over_24() {
        // ⟨H⟩_{1,0} = −(1/24)∫H·c₀(T)
        let (rep, vals) = lambda_independence_check(&job(1, 1, "0:1", 1)).unwrap();
        assert!(rep.passed, "{:?}", rep.details);
        assert_eq!(vals[0].d, vec![0]);
        assert_eq!(vals[0].value, crate::scalar::rat_str(&rat(-1, 24)));
    }
}
