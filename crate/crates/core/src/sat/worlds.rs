//! Possible worlds: deterministic responses on shared source alphabets.
//!
//! Any local model can be cut down to one hidden tuple per supported outcome,
//! so sources with one value per element of the support and responses pinned
//! on the diagonal (every source naming the same outcome) lose nothing. Once
//! `k` reaches the support size the search is therefore conclusive.

use serde::{Deserialize, Serialize};

use crate::scenario::{Pattern, Scenario, Shape};

use super::cnf::{CnfInstance, Lit};
use super::local::{check_alphabets, check_shape, ResponseTables};
use super::solver::{solve, Budget, SolveResult};
use super::SatError;

/// `functions[j][t]` is the outcome of observer `j` on input `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicWorld {
    pub alphabets: Vec<usize>,
    pub functions: Vec<Vec<usize>>,
}

impl DeterministicWorld {
    pub fn to_tables(&self, scenario: &Scenario) -> ResponseTables {
        ResponseTables {
            alphabets: self.alphabets.clone(),
            tables: self
                .functions
                .iter()
                .enumerate()
                .map(|(j, f)| {
                    f.iter()
                        .map(|&o| (0..scenario.outcomes()[j]).map(|x| x == o).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn generate(&self, scenario: &Scenario) -> Pattern {
        self.to_tables(scenario).generate(scenario)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WorldsVerdict {
    Local(DeterministicWorld),
    /// No world at this cardinality; `conclusive` when the cardinality
    /// reached the support size, so that no larger one can help.
    NotLocal {
        conclusive: bool,
    },
    Budget,
}

impl WorldsVerdict {
    pub fn is_local(&self) -> bool {
        matches!(self, WorldsVerdict::Local(_))
    }
}

struct Cells {
    inputs: Vec<Shape>,
    starts: Vec<Lit>,
    outcomes: Vec<usize>,
}

impl Cells {
    fn new(scenario: &Scenario, alphabets: &[usize], cnf: &mut CnfInstance) -> Self {
        let inputs: Vec<Shape> = (0..scenario.observer_count())
            .map(|j| {
                Shape::new(
                    scenario
                        .sources_of(j)
                        .iter()
                        .map(|&s| alphabets[s])
                        .collect(),
                )
            })
            .collect();
        let mut starts = Vec::new();
        for (j, shape) in inputs.iter().enumerate() {
            starts.push(cnf.num_vars() as Lit + 1);
            let d = scenario.outcomes()[j];
            for t in 0..shape.len() {
                let vars: Vec<Lit> = (0..d)
                    .map(|o| {
                        cnf.new_named_var(format!(
                            "f_{}({})={}",
                            scenario.observer_name(j),
                            shape.label(t),
                            crate::scenario::outcome_char(o)
                        ))
                    })
                    .collect();
                cnf.add_clause(vars.iter().copied());
                for a in 0..d {
                    for b in a + 1..d {
                        cnf.add_clause([-vars[a], -vars[b]]);
                    }
                }
            }
        }
        Cells {
            inputs,
            starts,
            outcomes: scenario.outcomes().to_vec(),
        }
    }

    fn var(&self, j: usize, t: usize, o: usize) -> Lit {
        self.starts[j] + (t * self.outcomes[j] + o) as Lit
    }

    fn decode(&self, model: &[bool], alphabets: &[usize]) -> DeterministicWorld {
        let functions = self
            .inputs
            .iter()
            .enumerate()
            .map(|(j, shape)| {
                (0..shape.len())
                    .map(|t| {
                        (0..self.outcomes[j])
                            .find(|&o| model[self.var(j, t, o) as usize - 1])
                            .expect("exactly one outcome")
                    })
                    .collect()
            })
            .collect();
        DeterministicWorld {
            alphabets: alphabets.to_vec(),
            functions,
        }
    }
}

/// Input index of each observer for every hidden tuple.
fn hidden_inputs(scenario: &Scenario, alphabets: &[usize], cells: &Cells) -> Vec<Vec<usize>> {
    let hidden = Shape::new(alphabets.to_vec());
    (0..hidden.len())
        .map(|h| {
            let lambda = hidden.decode(h);
            (0..scenario.observer_count())
                .map(|j| {
                    let d: Vec<usize> = scenario.sources_of(j).iter().map(|&s| lambda[s]).collect();
                    cells.inputs[j].encode(&d)
                })
                .collect()
        })
        .collect()
}

/// Deterministic worlds with every source alphabet of size `k`: every
/// hidden tuple lands in the support and every supported outcome is hit.
pub fn encode_worlds(
    scenario: &Scenario,
    pattern: &Pattern,
    k: usize,
) -> Result<CnfInstance, SatError> {
    check_shape(scenario, pattern)?;
    let alphabets = vec![k; scenario.source_count()];
    check_alphabets(scenario, &alphabets)?;
    let mut cnf = CnfInstance::new();
    let cells = Cells::new(scenario, &alphabets, &mut cnf);
    let shape = scenario.shape();
    let hidden = hidden_inputs(scenario, &alphabets, &cells);
    let n = scenario.observer_count();
    for x in 0..shape.len() {
        let digits = shape.decode(x);
        if pattern.is_ok(x) {
            let mut hits = Vec::new();
            for idx in &hidden {
                let y = cnf.new_var();
                for j in 0..n {
                    cnf.add_clause([-y, cells.var(j, idx[j], digits[j])]);
                }
                hits.push(y);
            }
            cnf.add_clause(hits);
        } else {
            for idx in &hidden {
                cnf.add_clause((0..n).map(|j| -cells.var(j, idx[j], digits[j])));
            }
        }
    }
    Ok(cnf)
}

/// Diagonal worlds: one source value per supported outcome, responses fixed
/// on the diagonal, every hidden tuple inside the support. Satisfiable iff
/// the pattern is local at all.
pub fn encode_diagonal(scenario: &Scenario, pattern: &Pattern) -> Result<CnfInstance, SatError> {
    check_shape(scenario, pattern)?;
    let support = pattern.support();
    let k = support.len().max(1);
    let alphabets = vec![k; scenario.source_count()];
    let mut cnf = CnfInstance::new();
    let cells = Cells::new(scenario, &alphabets, &mut cnf);
    if support.is_empty() {
        cnf.add_clause([]);
        return Ok(cnf);
    }
    let shape = scenario.shape();
    for (j, input) in cells.inputs.iter().enumerate() {
        let arity = input.arity();
        for (w, &x) in support.iter().enumerate() {
            let t = input.encode(&vec![w; arity]);
            cnf.add_clause([cells.var(j, t, shape.digit(x, j))]);
        }
    }
    let hidden = hidden_inputs(scenario, &alphabets, &cells);
    let n = scenario.observer_count();
    for x in (0..shape.len()).filter(|&x| !pattern.is_ok(x)) {
        let digits = shape.decode(x);
        for idx in &hidden {
            cnf.add_clause((0..n).map(|j| -cells.var(j, idx[j], digits[j])));
        }
    }
    Ok(cnf)
}

/// Looks for a deterministic world of source cardinality `k` generating the
/// pattern. From `k` equal to the support size on, the diagonal search is
/// used and a negative answer is conclusive.
pub fn possible_worlds_decide(
    scenario: &Scenario,
    pattern: &Pattern,
    k: usize,
    budget: Budget,
) -> Result<WorldsVerdict, SatError> {
    check_shape(scenario, pattern)?;
    if k == 0 {
        return Err(SatError::BadAlphabets(vec![0; scenario.source_count()]));
    }
    let support = pattern.support().len();
    let conclusive = k >= support;
    let (cnf, alphabets) = if conclusive {
        (
            encode_diagonal(scenario, pattern)?,
            vec![support.max(1); scenario.source_count()],
        )
    } else {
        (
            encode_worlds(scenario, pattern, k)?,
            vec![k; scenario.source_count()],
        )
    };
    match solve(&cnf, budget) {
        SolveResult::Sat(model) => {
            let mut scratch = CnfInstance::new();
            let cells = Cells::new(scenario, &alphabets, &mut scratch);
            let world = cells.decode(&model, &alphabets);
            let generated = world.generate(scenario);
            if &generated != pattern {
                return Err(SatError::ModelMismatch {
                    expected: pattern.to_literal(),
                    generated: generated.to_literal(),
                });
            }
            Ok(WorldsVerdict::Local(world))
        }
        SolveResult::Unsat => Ok(WorldsVerdict::NotLocal { conclusive }),
        SolveResult::Budget => Ok(WorldsVerdict::Budget),
    }
}
