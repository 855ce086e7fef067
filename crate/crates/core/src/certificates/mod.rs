//! Possibilistic certificates, the polynomial inequalities they imply, and
//! the relaxation of those inequalities under weakly correlated sources.

mod cover;
mod inequality;
mod relax;

use thiserror::Error;

use crate::scenario::ScenarioError;

pub use cover::{
    extract_certificate, minimum_cover, CertifiedEvent, CoverProof, PossibilisticCertificate,
    EXACT_COVER_MAX,
};
pub use inequality::{to_inequality, PolynomialInequality, Provenance};
pub use relax::{
    check_relaxed_locality_invariance, encode_local_relaxed, relax, relax_symbolic, ExponentRule,
    InvarianceReport, RelaxationParams, RelaxedInequality,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertificateError {
    #[error("valuation {0} is not AI-expressible")]
    NotAiExpressible(String),
    #[error("consequents leave {0} uncovered")]
    CoverFails(String),
    #[error("no ⊘ constraint touches the violated event")]
    NoCandidates,
    #[error("inequality carries no certificate provenance")]
    NoProvenance,
    #[error("relaxation parameters need 0 < eps1 <= 1 <= eps2, got eps1 = {eps1}, eps2 = {eps2}")]
    BadParams { eps1: String, eps2: String },
    #[error("distribution has outcome counts {found:?}, inequality expects {expected:?}")]
    ScenarioMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sat(#[from] crate::sat::SatError),
}
