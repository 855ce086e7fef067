//! Scenarios, joint-outcome indexing, distributions, patterns and monomials.

mod graph;
mod monomial;
mod shape;
mod table;

use thiserror::Error;

pub use graph::{ObserverDescription, Scenario, ScenarioDescription};
pub use monomial::{evaluate_monomial, evaluate_monomial_possibility, Monomial, Valuation};
pub use shape::{outcome_char, outcome_digit, Projector, Shape};
pub use table::{
    check_subset, collapse, collapse_scalar, enumerate_patterns, marginalize, realizations_random,
    realizations_sample, Distribution, Pattern, Possibility, Semiring, ENUMERATION_CAP_BITS,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("scenario has no observers")]
    NoObservers,
    #[error("observer {0} has no incident source")]
    OrphanObserver(String),
    #[error("observer {observer} has {outcomes} outcomes, at least 2 required")]
    TooFewOutcomes { observer: String, outcomes: usize },
    #[error("duplicate edge {src} -> {observer}")]
    DuplicateEdge { src: String, observer: String },
    #[error("edge references source index {0} which does not exist")]
    DanglingSource(usize),
    #[error("edge references observer index {0} which does not exist")]
    DanglingObserver(usize),
    #[error("unknown source {0:?}")]
    UnknownSource(String),
    #[error("unknown observer {0:?}")]
    UnknownObserver(String),
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("empty observer subset")]
    EmptySubset,
    #[error("observer subset {0:?} is not a subset of the scenario observers")]
    InvalidSubset(Vec<usize>),
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("negative probability at [{0}]")]
    NegativeEntry(String),
    #[error("entries sum to {0}, not 1")]
    NotNormalized(String),
    #[error("pattern has no possible event")]
    EmptyPattern,
    #[error("weight at [{0}] does not match the pattern support")]
    WeightSupportMismatch(String),
    #[error("joint space of {joint} outcomes exceeds the enumeration cap of {cap}")]
    EnumerationCap { joint: usize, cap: usize },
    #[error("cannot parse {0:?}")]
    BadLiteral(String),
    #[error("outcome {outcome} out of range for observer {observer}")]
    OutcomeOutOfRange { observer: String, outcome: usize },
    #[error("a monomial needs at least one valuation")]
    EmptyMonomial,
}
