//! Exact torus-equivariant localization for Gromov–Witten invariants of (P¹)ⁿ.
//!
//! Series live over a pluggable exact coefficient ring ([`scalar::Coeff`]):
//! plain rationals, Laurent polynomials in the equivariant parameters, or the
//! multilinear sign algebra used for symbolic audits.

pub mod asymptotics;
pub mod brackets;
pub mod cache;
pub mod engine;
pub mod error;
pub mod genus0;
pub mod graphs;
pub mod laurent;
pub mod moduli;
pub mod oracle;
pub mod pipeline;
pub mod qseries;
pub mod report;
pub mod scalar;
pub mod sign_ring;
pub mod suites;
pub mod target;
pub mod universal;
pub mod verify;
pub mod xyseries;
pub mod zseries;

/// Largest number of P¹ factors any series type can carry.
pub const MAX_FACTORS: usize = 6;

pub use error::{QplError, Result};
pub use laurent::LaurentPoly;
pub use qseries::{Multidegree, QSeries, Truncation};
pub use scalar::{Coeff, Rational};
pub use sign_ring::{SignGen, SignMonomial, SignPoly, TypeTag};

pub type NumericSeries = QSeries<Rational>;
pub type LambdaSeries = QSeries<LaurentPoly>;
pub type SignSeries = QSeries<SignPoly>;
