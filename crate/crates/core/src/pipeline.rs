//! End-to-end jobs: bootstrap the local brackets, then sum the graphs.

use crate::brackets::{bootstrap, symbolic_table};
use crate::engine::{color_insertions, required_depth, vdim, BracketTable, EdgeSign, Engine, GraphTerm, Insertion};
use crate::error::{QplError, Result};
use crate::laurent::LaurentPoly;
use crate::qseries::{Multidegree, QSeries, Truncation};
use crate::scalar::{Coeff, Rational};
use crate::target::{Lambda, Mode, Numeric, Symbolic};

pub const MAX_GENUS: u32 = 2;
pub const MAX_N: usize = 4;
pub const MAX_CAP: u32 = 8;

/// One invariant computation.
#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub n: usize,
    pub genus: u32,
    pub insertions: Vec<Insertion>,
    pub trunc: Truncation,
    pub sign: EdgeSign,
}

impl Job {
    pub fn new(n: usize, genus: u32, insertions: Vec<Insertion>, trunc: Truncation, sign: EdgeSign) -> Self {
        Job { n, genus, insertions, trunc, sign }
    }

    pub fn m(&self) -> usize {
        self.insertions.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_N {
            return Err(QplError::OutOfRange(format!("n = {} (supported 1..={MAX_N})", self.n)));
        }
        if self.genus > MAX_GENUS {
            return Err(QplError::OutOfRange(format!("genus {} (supported ≤ {MAX_GENUS})", self.genus)));
        }
        if self.trunc.n != self.n {
            return Err(QplError::FactorMismatch(self.trunc.n, self.n));
        }
        let cap = (0..self.n).map(|i| self.trunc.var_cap(i)).max().unwrap_or(0);
        if cap > MAX_CAP {
            return Err(QplError::OutOfRange(format!("degree cap {cap} (supported ≤ {MAX_CAP})")));
        }
        if 2 * self.genus as i64 - 2 + self.m() as i64 <= 0 {
            return Err(QplError::Unstable { g: self.genus, n: self.m() });
        }
        for ins in &self.insertions {
            if ins.mask >> self.n != 0 {
                return Err(QplError::OutOfRange(format!("insertion {} uses a factor beyond n = {}", ins.spec(self.n), self.n)));
            }
        }
        Ok(())
    }

    /// Largest s-index any vertex can ask for.
    pub fn bracket_depth(&self) -> usize {
        (3 * self.genus as i64 - 3 + self.m() as i64).max(0) as usize
    }

    /// R̃-depth for both the bootstrap and the main sum.
    pub fn k_max(&self) -> usize {
        required_depth(self.genus, self.m()).max(required_depth(0, self.bracket_depth() + 3))
    }

    /// True when the q^d coefficient is a number rather than a class.
    pub fn vdim_zero(&self, d: &Multidegree) -> bool {
        vdim(self.genus, self.n, self.m(), d) == crate::engine::insertion_degree(&self.insertions)
    }

    /// Condition (i): g − 1 + Σ_k c_{i,k} odd for every factor i.
    pub fn parity_condition(&self) -> bool {
        (0..self.n).all(|i| {
            let c: i64 = self.insertions.iter().map(|x| x.c(i) as i64).sum();
            (self.genus as i64 - 1 + c).rem_euclid(2) == 1
        })
    }

    /// Condition (ii): 3g − 3 + m − Σk < n.
    pub fn dimension_condition(&self) -> bool {
        let k: i64 = self.insertions.iter().map(|x| x.k as i64).sum();
        3 * self.genus as i64 - 3 + self.m() as i64 - k < self.n as i64
    }
}

fn empty_table<C: Coeff>(job: &Job) -> BracketTable<C> {
    BracketTable::zeros(job.n, [], 0, &job.trunc)
}

/// Numeric bracket table s_0..s_depth at every fixed point.
pub fn numeric_brackets(n: usize, trunc: &Truncation, sign: EdgeSign, depth: usize) -> Result<BracketTable<Rational>> {
    let mode = Numeric { n };
    let engine = Engine::new(&mode, trunc.clone(), sign, required_depth(0, depth + 3), BracketTable::zeros(n, [], 0, trunc));
    bootstrap(&engine, depth)
}

/// Per-graph terms and total in plain rationals.
pub fn numeric_terms(job: &Job, table: BracketTable<Rational>) -> Result<Vec<GraphTerm<Rational>>> {
    job.validate()?;
    let mode = Numeric { n: job.n };
    let engine = Engine::new(&mode, job.trunc.clone(), job.sign, job.k_max(), table);
    engine.graph_terms(job.genus, &color_insertions(job.n, &job.insertions))
}

/// Per-graph terms with each graph summed symbolically over its vertex signs.
pub fn symbolic_terms(job: &Job, numeric: &BracketTable<Rational>) -> Result<Vec<GraphTerm<Rational>>> {
    job.validate()?;
    let mode = Symbolic { n: job.n };
    let engine = Engine::new(&mode, job.trunc.clone(), job.sign, job.k_max(), symbolic_table(numeric));
    engine.graph_terms(job.genus, &color_insertions(job.n, &job.insertions))
}

/// The series with the equivariant parameters kept; brackets bootstrapped in the same ring.
pub fn lambda_series(job: &Job) -> Result<QSeries<LaurentPoly>> {
    job.validate()?;
    let mode = Lambda { n: job.n };
    let engine = Engine::new(&mode, job.trunc.clone(), job.sign, job.k_max(), empty_table(job));
    bootstrap(&engine, job.bracket_depth())?;
    engine.total_series(job.genus, &color_insertions(job.n, &job.insertions))
}

pub fn sum_terms<O: Coeff>(trunc: &Truncation, terms: &[GraphTerm<O>]) -> QSeries<O> {
    terms.iter().fold(QSeries::zero(trunc.clone()), |acc, t| acc.add(&t.series))
}

/// Numeric series of a job, bootstrapping its own brackets.
pub fn numeric_series(job: &Job) -> Result<QSeries<Rational>> {
    job.validate()?;
    let table = numeric_brackets(job.n, &job.trunc, job.sign, job.bracket_depth())?;
    Ok(sum_terms(&job.trunc, &numeric_terms(job, table)?))
}

/// Keeps only the R̃-depth and brackets a mode needs; exposed for the audits.
pub fn engine_for<'a, M: Mode>(mode: &'a M, job: &Job, table: BracketTable<M::C>) -> Engine<'a, M> {
    Engine::new(mode, job.trunc.clone(), job.sign, job.k_max(), table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn conditions() {
        let n2 = Job::new(2, 1, vec![Insertion::new(0, 0b11)], Truncation::total(2, 1), EdgeSign::Proof);
        assert!(n2.parity_condition() && n2.dimension_condition());
        let n1 = Job::new(1, 1, vec![Insertion::new(0, 1)], Truncation::total(1, 1), EdgeSign::Proof);
        assert!(n1.parity_condition() && !n1.dimension_condition());
        let g2 = Job::new(2, 2, vec![Insertion::new(3, 0)], Truncation::total(2, 1), EdgeSign::Proof);
        assert!(g2.parity_condition() && g2.dimension_condition());
    }

    #[test]
    fn validation() {
        let bad = Job::new(5, 0, vec![Insertion::new(0, 0); 3], Truncation::total(5, 1), EdgeSign::Proof);
        assert!(matches!(bad.validate(), Err(QplError::OutOfRange(_))));
        let unstable = Job::new(1, 0, vec![Insertion::new(0, 0); 2], Truncation::total(1, 1), EdgeSign::Proof);
        assert!(matches!(unstable.validate(), Err(QplError::Unstable { .. })));
    }

    #[test]
    fn pt_pt_one_smoke() {
        // dimension forces every d ≠ 0 coefficient to vanish; d = 0 gives ∫pt·pt = 0 too
        let pt = Insertion::point(2);
        let job = Job::new(2, 0, vec![pt, pt, Insertion::new(0, 0)], Truncation::total(2, 2), EdgeSign::Proof);
        let s = numeric_series(&job).unwrap();
        assert!(s.is_zero(), "{s:?}");
        let job = Job::new(2, 0, vec![pt, Insertion::new(0, 0), Insertion::new(0, 0)], Truncation::total(2, 2), EdgeSign::Proof);
        let s = numeric_series(&job).unwrap();
        assert_eq!(s.coeff(&Multidegree::zero(2)), int(1));
        assert_eq!(s.terms().count(), 1);
    }
}
