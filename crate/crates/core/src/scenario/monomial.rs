//! Valuations (partial outcome assignments) and monomials (products of
//! valuation probabilities).

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::graph::Scenario;
use super::shape::outcome_char;
use super::table::{Distribution, Pattern, Possibility};
use super::ScenarioError;

/// Outcomes assigned to a nonempty set of observers, kept sorted by observer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Valuation {
    observers: Vec<usize>,
    outcomes: Vec<usize>,
}

impl Valuation {
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, ScenarioError> {
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(ScenarioError::EmptySubset);
        }
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(ScenarioError::InvalidSubset(
                pairs.iter().map(|p| p.0).collect(),
            ));
        }
        let (observers, outcomes) = pairs.into_iter().unzip();
        Ok(Valuation {
            observers,
            outcomes,
        })
    }

    /// Valuation checked against a scenario's observer count and outcome ranges.
    pub fn checked(
        scenario: &Scenario,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, ScenarioError> {
        let v = Valuation::new(pairs)?;
        for (&o, &x) in v.observers.iter().zip(&v.outcomes) {
            if o >= scenario.observer_count() {
                return Err(ScenarioError::DanglingObserver(o));
            }
            if x >= scenario.outcomes()[o] {
                return Err(ScenarioError::OutcomeOutOfRange {
                    observer: scenario.observer_name(o).to_string(),
                    outcome: x,
                });
            }
        }
        Ok(v)
    }

    /// Parses `"AC=01"` or `"P_AC(01)"`.
    pub fn parse(scenario: &Scenario, text: &str) -> Result<Self, ScenarioError> {
        let bad = || ScenarioError::BadLiteral(text.to_string());
        let text = text.trim();
        let (names, outs) = match text.strip_prefix("P_").and_then(|t| t.strip_suffix(')')) {
            Some(inner) => inner.split_once('(').ok_or_else(bad)?,
            None => text.split_once('=').ok_or_else(bad)?,
        };
        let names: Vec<char> = names.trim().chars().collect();
        let outs: Vec<char> = outs.trim().chars().collect();
        if names.len() != outs.len() {
            return Err(bad());
        }
        let mut pairs = Vec::new();
        for (n, o) in names.iter().zip(&outs) {
            let obs = scenario.observer_index(&n.to_string()).ok_or_else(bad)?;
            let out = super::shape::outcome_digit(*o).ok_or_else(bad)?;
            pairs.push((obs, out));
        }
        Valuation::checked(scenario, pairs)
    }

    pub fn observers(&self) -> &[usize] {
        &self.observers
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.observers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observers.is_empty()
    }

    pub fn outcome_of(&self, observer: usize) -> Option<usize> {
        self.observers
            .iter()
            .position(|&o| o == observer)
            .map(|k| self.outcomes[k])
    }

    /// Probability of this valuation under a distribution.
    pub fn probability(&self, p: &Distribution) -> Result<BigRational, ScenarioError> {
        let m = p.marginalize(&self.observers)?;
        let idx = m.shape().encode(&self.outcomes);
        Ok(m.get(idx).clone())
    }

    /// Possibility of this valuation under a pattern.
    pub fn possibility(&self, p: &Pattern) -> Result<Possibility, ScenarioError> {
        let m = p.marginalize(&self.observers)?;
        let idx = m.shape().encode(&self.outcomes);
        Ok(m.get(idx))
    }

    /// `P_AC(01)`.
    pub fn render(&self, scenario: &Scenario) -> String {
        format!(
            "P_{}({})",
            scenario.observers_label(&self.observers),
            self.outcomes
                .iter()
                .map(|&x| outcome_char(x))
                .collect::<String>()
        )
    }

    /// Sort key: larger sets first, then observers, then outcomes.
    fn key_cmp(&self, other: &Self) -> Ordering {
        other
            .len()
            .cmp(&self.len())
            .then_with(|| self.observers.cmp(&other.observers))
            .then_with(|| self.outcomes.cmp(&other.outcomes))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A product of valuation probabilities, factors kept in normal order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial {
    factors: Vec<Valuation>,
}

impl Monomial {
    pub fn new(mut factors: Vec<Valuation>) -> Result<Self, ScenarioError> {
        if factors.is_empty() {
            return Err(ScenarioError::EmptyMonomial);
        }
        factors.sort();
        Ok(Monomial { factors })
    }

    /// Parses space-separated factors, `"P_AC(11) P_B(0)"`.
    pub fn parse(scenario: &Scenario, text: &str) -> Result<Self, ScenarioError> {
        let factors = text
            .split_whitespace()
            .map(|v| Valuation::parse(scenario, v))
            .collect::<Result<Vec<_>, _>>()?;
        Monomial::new(factors)
    }

    pub fn single(v: Valuation) -> Self {
        Monomial { factors: vec![v] }
    }

    pub fn factors(&self) -> &[Valuation] {
        &self.factors
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn render(&self, scenario: &Scenario) -> String {
        self.factors
            .iter()
            .map(|v| v.render(scenario))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.factors.cmp(&other.factors))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let obs: Vec<String> = self.observers.iter().map(|o| o.to_string()).collect();
        let out: String = self.outcomes.iter().map(|&x| outcome_char(x)).collect();
        write!(f, "P_{{{}}}({out})", obs.join(","))
    }
}

/// Product over factors of the marginal probability of each valuation.
pub fn evaluate_monomial(p: &Distribution, m: &Monomial) -> Result<BigRational, ScenarioError> {
    let mut acc = BigRational::one();
    for v in &m.factors {
        acc *= v.probability(p)?;
    }
    Ok(acc)
}

/// Possibilistic value of a monomial.
pub fn evaluate_monomial_possibility(
    p: &Pattern,
    m: &Monomial,
) -> Result<Possibility, ScenarioError> {
    for v in &m.factors {
        if !v.possibility(p)?.is_ok() {
            return Ok(Possibility::Nope);
        }
    }
    Ok(Possibility::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::table::realizations_sample;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn ghz_product_monomial() {
        let tri = Scenario::triangle();
        let ghz = Pattern::parse(tri.shape(), "[000]+[111]").unwrap();
        let d = realizations_sample(&ghz, None).unwrap();
        let m = Monomial::new(vec![
            Valuation::parse(&tri, "C=1").unwrap(),
            Valuation::parse(&tri, "A=0").unwrap(),
        ])
        .unwrap();
        assert_eq!(m.render(&tri), "P_A(0) P_C(1)");
        assert_eq!(evaluate_monomial(&d, &m).unwrap(), r(1, 4));
        assert_eq!(
            evaluate_monomial_possibility(&ghz, &m).unwrap(),
            Possibility::Ok
        );
    }

    #[test]
    fn full_valuation_is_joint_entry() {
        let tri = Scenario::triangle();
        let d = Distribution::from_weights(tri.shape().clone(), (1..=8).map(|k| r(k, 1)).collect())
            .unwrap();
        let m = Monomial::single(Valuation::parse(&tri, "ABC=101").unwrap());
        assert_eq!(evaluate_monomial(&d, &m).unwrap(), r(6, 36));
    }

    #[test]
    fn uniform_pair_product() {
        let tri = Scenario::triangle();
        let u = Distribution::uniform(tri.shape().clone());
        let m = Monomial::new(vec![
            Valuation::parse(&tri, "AB=10").unwrap(),
            Valuation::parse(&tri, "AB=01").unwrap(),
        ])
        .unwrap();
        assert_eq!(m.render(&tri), "P_AB(01) P_AB(10)");
        assert_eq!(evaluate_monomial(&u, &m).unwrap(), r(1, 16));
    }

    #[test]
    fn factor_order() {
        let tri = Scenario::triangle();
        let m = Monomial::new(vec![
            Valuation::parse(&tri, "A=0").unwrap(),
            Valuation::parse(&tri, "AC=11").unwrap(),
        ])
        .unwrap();
        assert_eq!(m.render(&tri), "P_AC(11) P_A(0)");
    }

    #[test]
    fn out_of_range_outcome() {
        let tri = Scenario::triangle();
        assert!(matches!(
            Valuation::checked(&tri, [(0, 2)]),
            Err(ScenarioError::OutcomeOutOfRange { .. })
        ));
        assert_eq!(
            Monomial::new(vec![]).unwrap_err(),
            ScenarioError::EmptyMonomial
        );
    }
}
