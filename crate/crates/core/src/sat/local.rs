//! Local models with finite source alphabets: response tables, their CNF
//! encoding, and decoding with verification.

use serde::{Deserialize, Serialize};

use crate::scenario::{outcome_char, Pattern, Possibility, Scenario, Shape};

use super::cnf::{CnfInstance, Lit};
use super::SatError;

/// Nondeterministic responses: `tables[j][t][o]` says whether observer `j`
/// may output `o` when its incident sources (in `sources_of(j)` order) take
/// the values encoded by `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseTables {
    pub alphabets: Vec<usize>,
    pub tables: Vec<Vec<Vec<bool>>>,
}

/// Shape of the incident source values of each observer.
fn input_shapes(scenario: &Scenario, alphabets: &[usize]) -> Vec<Shape> {
    (0..scenario.observer_count())
        .map(|j| {
            Shape::new(
                scenario
                    .sources_of(j)
                    .iter()
                    .map(|&s| alphabets[s])
                    .collect(),
            )
        })
        .collect()
}

/// For each hidden tuple, the input index seen by each observer.
fn input_indices(scenario: &Scenario, alphabets: &[usize]) -> Vec<Vec<usize>> {
    let hidden = Shape::new(alphabets.to_vec());
    let inputs = input_shapes(scenario, alphabets);
    (0..hidden.len())
        .map(|h| {
            let lambda = hidden.decode(h);
            (0..scenario.observer_count())
                .map(|j| {
                    let digits: Vec<usize> =
                        scenario.sources_of(j).iter().map(|&s| lambda[s]).collect();
                    inputs[j].encode(&digits)
                })
                .collect()
        })
        .collect()
}

pub(crate) fn check_alphabets(scenario: &Scenario, alphabets: &[usize]) -> Result<(), SatError> {
    if alphabets.len() != scenario.source_count() || alphabets.contains(&0) {
        return Err(SatError::BadAlphabets(alphabets.to_vec()));
    }
    Ok(())
}

pub(crate) fn check_shape(scenario: &Scenario, pattern: &Pattern) -> Result<(), SatError> {
    if pattern.shape() != scenario.shape() {
        return Err(SatError::DimensionMismatch {
            expected: scenario.outcomes().to_vec(),
            found: pattern.shape().radices().to_vec(),
        });
    }
    Ok(())
}

impl ResponseTables {
    /// Tables where every observer answers `outcomes[j]` whatever it receives.
    pub fn constant(scenario: &Scenario, alphabets: &[usize], outcomes: &[usize]) -> Self {
        let inputs = input_shapes(scenario, alphabets);
        let tables = (0..scenario.observer_count())
            .map(|j| {
                let row: Vec<bool> = (0..scenario.outcomes()[j])
                    .map(|o| o == outcomes[j])
                    .collect();
                vec![row; inputs[j].len()]
            })
            .collect();
        ResponseTables {
            alphabets: alphabets.to_vec(),
            tables,
        }
    }

    /// Every input has at least one possible outcome.
    pub fn is_total(&self) -> bool {
        self.tables
            .iter()
            .flatten()
            .all(|row| row.iter().any(|&b| b))
    }

    pub fn is_deterministic(&self) -> bool {
        self.tables
            .iter()
            .flatten()
            .all(|row| row.iter().filter(|&&b| b).count() == 1)
    }

    /// The pattern these tables generate: the union over hidden tuples of
    /// the products of the observers' possible outcomes.
    pub fn generate(&self, scenario: &Scenario) -> Pattern {
        let shape = scenario.shape().clone();
        let mut out = Pattern::empty(shape.clone());
        let indices = input_indices(scenario, &self.alphabets);
        let n = scenario.observer_count();
        for idx in &indices {
            let choices: Vec<Vec<usize>> = (0..n)
                .map(|j| {
                    self.tables[j][idx[j]]
                        .iter()
                        .enumerate()
                        .filter(|(_, &b)| b)
                        .map(|(o, _)| o)
                        .collect()
                })
                .collect();
            if choices.iter().any(Vec::is_empty) {
                continue;
            }
            let counts: Vec<usize> = choices.iter().map(Vec::len).collect();
            let total: usize = counts.iter().product();
            let mut digits = vec![0; n];
            for combo in 0..total {
                let mut c = combo;
                for j in (0..n).rev() {
                    digits[j] = choices[j][c % counts[j]];
                    c /= counts[j];
                }
                out.set(shape.encode(&digits), Possibility::Ok);
            }
        }
        out
    }

    /// One line per observer and input, e.g. `A(10): 0 1`.
    pub fn render(&self, scenario: &Scenario) -> String {
        let inputs = input_shapes(scenario, &self.alphabets);
        let mut lines = Vec::new();
        for (j, table) in self.tables.iter().enumerate() {
            for (t, row) in table.iter().enumerate() {
                let outs: Vec<String> = row
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(o, _)| outcome_char(o).to_string())
                    .collect();
                lines.push(format!(
                    "{}({}): {}",
                    scenario.observer_name(j),
                    inputs[j].label(t),
                    outs.join(" ")
                ));
            }
        }
        lines.join("\n")
    }
}

/// Variable layout of the local encoding.
#[derive(Debug, Clone)]
pub struct LocalLayout {
    alphabets: Vec<usize>,
    inputs: Vec<Shape>,
    outcomes: Vec<usize>,
    /// First variable of each observer's table.
    starts: Vec<Lit>,
    table_vars: u32,
}

impl LocalLayout {
    pub fn new(scenario: &Scenario, alphabets: &[usize]) -> Self {
        let inputs = input_shapes(scenario, alphabets);
        let mut starts = Vec::new();
        let mut next: Lit = 1;
        for (j, shape) in inputs.iter().enumerate() {
            starts.push(next);
            next += (shape.len() * scenario.outcomes()[j]) as Lit;
        }
        LocalLayout {
            alphabets: alphabets.to_vec(),
            inputs,
            outcomes: scenario.outcomes().to_vec(),
            starts,
            table_vars: (next - 1) as u32,
        }
    }

    /// Variable of "observer `j` may output `o` on input `t`".
    pub fn var(&self, j: usize, t: usize, o: usize) -> Lit {
        self.starts[j] + (t * self.outcomes[j] + o) as Lit
    }

    pub fn table_vars(&self) -> u32 {
        self.table_vars
    }
}

/// Satisfiable iff the pattern is generated by response tables over the
/// given source alphabets. ⊘ outcomes forbid every hidden tuple from
/// producing them; each ✓ outcome needs some hidden tuple, chosen through
/// one auxiliary variable per (outcome, hidden tuple).
pub fn encode_local(
    scenario: &Scenario,
    pattern: &Pattern,
    alphabets: &[usize],
) -> Result<CnfInstance, SatError> {
    check_alphabets(scenario, alphabets)?;
    let hidden: usize = alphabets.iter().product();
    encode_local_over(scenario, pattern, alphabets, &vec![Possibility::Ok; hidden])
}

/// [`encode_local`] with the joint source distribution given by its pattern
/// over hidden tuples: only possible tuples may witness ✓ outcomes or are
/// barred from ⊘ ones.
pub fn encode_local_over(
    scenario: &Scenario,
    pattern: &Pattern,
    alphabets: &[usize],
    hidden_support: &[Possibility],
) -> Result<CnfInstance, SatError> {
    check_shape(scenario, pattern)?;
    check_alphabets(scenario, alphabets)?;
    let expected: usize = alphabets.iter().product();
    if hidden_support.len() != expected {
        return Err(SatError::ModelLength {
            expected,
            found: hidden_support.len(),
        });
    }
    let layout = LocalLayout::new(scenario, alphabets);
    let mut cnf = CnfInstance::with_vars(layout.table_vars);
    let n = scenario.observer_count();
    for j in 0..n {
        for t in 0..layout.inputs[j].len() {
            for o in 0..scenario.outcomes()[j] {
                cnf.set_name(
                    layout.var(j, t, o) as u32,
                    format!(
                        "P_{}({}|{})",
                        scenario.observer_name(j),
                        outcome_char(o),
                        layout.inputs[j].label(t)
                    ),
                );
            }
            cnf.add_clause((0..scenario.outcomes()[j]).map(|o| layout.var(j, t, o)));
        }
    }
    let shape = scenario.shape();
    let indices = input_indices(scenario, alphabets);
    let hidden = Shape::new(alphabets.to_vec());
    for x in 0..shape.len() {
        let digits = shape.decode(x);
        if pattern.is_ok(x) {
            let mut witnesses = Vec::with_capacity(indices.len());
            for (h, idx) in indices.iter().enumerate() {
                if !hidden_support[h].is_ok() {
                    continue;
                }
                let y = cnf.new_named_var(format!("W({}|{})", shape.label(x), hidden.label(h)));
                for j in 0..n {
                    cnf.add_clause([-y, layout.var(j, idx[j], digits[j])]);
                }
                witnesses.push(y);
            }
            cnf.add_clause(witnesses);
        } else {
            for (idx, _) in indices
                .iter()
                .zip(hidden_support)
                .filter(|(_, h)| h.is_ok())
            {
                cnf.add_clause((0..n).map(|j| -layout.var(j, idx[j], digits[j])));
            }
        }
    }
    Ok(cnf)
}

/// Reads the response tables out of a model of [`encode_local`] and checks
/// by brute force that they generate the pattern.
pub fn decode_and_verify_local(
    scenario: &Scenario,
    model: &[bool],
    pattern: &Pattern,
    alphabets: &[usize],
) -> Result<ResponseTables, SatError> {
    check_shape(scenario, pattern)?;
    check_alphabets(scenario, alphabets)?;
    let layout = LocalLayout::new(scenario, alphabets);
    if model.len() < layout.table_vars as usize {
        return Err(SatError::ModelLength {
            expected: layout.table_vars as usize,
            found: model.len(),
        });
    }
    let tables = (0..scenario.observer_count())
        .map(|j| {
            (0..layout.inputs[j].len())
                .map(|t| {
                    (0..scenario.outcomes()[j])
                        .map(|o| model[layout.var(j, t, o) as usize - 1])
                        .collect()
                })
                .collect()
        })
        .collect();
    let tables = ResponseTables {
        alphabets: layout.alphabets.clone(),
        tables,
    };
    let generated = tables.generate(scenario);
    if !tables.is_total() || &generated != pattern {
        return Err(SatError::ModelMismatch {
            expected: pattern.to_literal(),
            generated: generated.to_literal(),
        });
    }
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::{solve, Budget, SolveResult};

    fn tri() -> Scenario {
        Scenario::triangle()
    }

    fn pat(text: &str) -> Pattern {
        Pattern::parse(tri().shape(), text).unwrap()
    }

    fn local(p: &Pattern, k: usize) -> Option<ResponseTables> {
        let cnf = encode_local(&tri(), p, &[k; 3]).unwrap();
        match solve(&cnf, Budget::unlimited()) {
            SolveResult::Sat(m) => Some(decode_and_verify_local(&tri(), &m, p, &[k; 3]).unwrap()),
            SolveResult::Unsat => None,
            SolveResult::Budget => unreachable!(),
        }
    }

    #[test]
    fn full_pattern_local_with_trivial_sources() {
        let full = Pattern::full(tri().shape().clone());
        assert!(local(&full, 1).is_some());
    }

    #[test]
    fn deterministic_pattern_has_constant_tables() {
        let t = local(&pat("[111]"), 1).unwrap();
        assert_eq!(t, ResponseTables::constant(&tri(), &[1, 1, 1], &[1, 1, 1]));
        assert!(t.is_deterministic());
    }

    #[test]
    fn ghz_not_local_at_two() {
        assert!(local(&pat("[000]+[111]"), 2).is_none());
    }

    #[test]
    fn p1_local_at_two() {
        let p = pat("[000]+[001]+[010]+[100]");
        let t = local(&p, 2).unwrap();
        assert_eq!(t.generate(&tri()), p);
    }

    #[test]
    fn mismatched_model_rejected() {
        let p = pat("[000]");
        let cnf = encode_local(&tri(), &p, &[1; 3]).unwrap();
        let mut model = vec![true; cnf.num_vars() as usize];
        model[0] = true;
        assert!(matches!(
            decode_and_verify_local(&tri(), &model, &p, &[1; 3]),
            Err(SatError::ModelMismatch { .. })
        ));
    }

    #[test]
    fn bad_alphabets() {
        let p = pat("[000]");
        assert!(encode_local(&tri(), &p, &[1, 0, 1]).is_err());
        assert!(encode_local(&tri(), &p, &[1, 1]).is_err());
    }

    #[test]
    fn generate_unions_products() {
        // A outputs 0 or 1 freely, B and C fixed at 0
        let mut t = ResponseTables::constant(&tri(), &[1; 3], &[0, 0, 0]);
        t.tables[0][0] = vec![true, true];
        assert_eq!(t.generate(&tri()), pat("[000]+[100]"));
    }
}
