//! Satisfiability encodings of locality and inflation compatibility, with
//! an in-crate CDCL solver.

mod cnf;
mod dimacs;
mod inflation;
mod local;
mod solver;
mod worlds;

use thiserror::Error;

pub use cnf::{CnfInstance, Lit};
pub use dimacs::{export_dimacs, import_dimacs};
pub use inflation::{
    encode_inflation, factorizations, subgraph_equalities, EncodingOptions, Factorization,
    InflationEncoder, SubgraphEquality, INDEPENDENCE_MAX_OBSERVERS,
};
pub use local::{
    decode_and_verify_local, encode_local, encode_local_over, LocalLayout, ResponseTables,
};
pub use solver::{solve, Budget, SolveResult, Solver, Stats};
pub use worlds::{
    encode_diagonal, encode_worlds, possible_worlds_decide, DeterministicWorld, WorldsVerdict,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("pattern has shape {found:?} but the scenario has {expected:?}")]
    DimensionMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("source alphabet sizes {0:?} do not give one positive size per source")]
    BadAlphabets(Vec<usize>),
    #[error("model has {found} variables, the encoding needs {expected}")]
    ModelLength { expected: usize, found: usize },
    #[error("decoded model generates {generated} instead of {expected}")]
    ModelMismatch { expected: String, generated: String },
    #[error("DIMACS line {line}: {message}")]
    Dimacs { line: usize, message: String },
}
