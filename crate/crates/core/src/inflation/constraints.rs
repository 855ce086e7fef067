//! Marginal constraints linking an inflation's joint vector to base monomials.

use std::collections::HashMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scenario::{outcome_char, Distribution, Monomial, Pattern, Possibility};

use super::ai::{AiSet, AiStructure};
use super::Inflation;

/// Outcomes assigned to observer copies of an inflation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InflationValuation {
    /// Observer copies, increasing.
    pub observers: Vec<usize>,
    pub outcomes: Vec<usize>,
}

impl InflationValuation {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        let (observers, outcomes) = pairs.into_iter().unzip();
        InflationValuation {
            observers,
            outcomes,
        }
    }

    pub fn mask(&self) -> u32 {
        self.observers.iter().fold(0, |m, &o| m | 1 << o)
    }

    pub fn outcome_of(&self, observer: usize) -> Option<usize> {
        self.observers
            .iter()
            .position(|&o| o == observer)
            .map(|k| self.outcomes[k])
    }

    /// Restriction to the observers in `mask`.
    pub fn restrict(&self, mask: u32) -> InflationValuation {
        let pairs = self
            .observers
            .iter()
            .zip(&self.outcomes)
            .filter(|(&o, _)| mask >> o & 1 == 1)
            .map(|(&o, &x)| (o, x))
            .collect();
        InflationValuation::new(pairs)
    }

    /// Whether a joint index of the inflation agrees with this valuation.
    pub fn matches(&self, inf: &Inflation, index: usize) -> bool {
        self.observers
            .iter()
            .zip(&self.outcomes)
            .all(|(&o, &x)| inf.shape().digit(index, o) == x)
    }

    /// Joint indices of the inflation agreeing with this valuation.
    pub fn index_set(&self, inf: &Inflation) -> Vec<usize> {
        (0..inf.joint_len())
            .filter(|&i| self.matches(inf, i))
            .collect()
    }

    /// `P_{A1 C1}(01)`.
    pub fn render(&self, inf: &Inflation) -> String {
        let names: Vec<String> = self
            .observers
            .iter()
            .map(|&o| inf.observer_name(o))
            .collect();
        let outs: String = self.outcomes.iter().map(|&x| outcome_char(x)).collect();
        format!("P_{{{}}}({outs})", names.join(" "))
    }

    /// The base monomial, when the observer set is AI-expressible.
    pub fn monomial(&self, inf: &Inflation, ai: &AiStructure) -> Option<Monomial> {
        let set = ai.set(inf, self.mask())?;
        Some(set.monomial(&self.outcomes))
    }
}

/// Right-hand side of a marginal constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rhs {
    Possibility(Possibility),
    Probability(BigRational),
}

impl fmt::Display for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rhs::Possibility(p) => write!(f, "{p}"),
            Rhs::Probability(q) => write!(f, "{q}"),
        }
    }
}

/// Marginal of the inflation over one valuation of a maximal AI set, equated
/// with the base monomial's value on the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    /// Index into [`AiStructure::maximal`].
    pub set: usize,
    pub valuation: InflationValuation,
    pub monomial: Monomial,
    pub rhs: Rhs,
}

impl Constraint {
    pub fn render(&self, inf: &Inflation) -> String {
        format!("{} = {}", self.valuation.render(inf), self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub constraints: Vec<Constraint>,
}

impl ConstraintSystem {
    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter()
    }
}

/// Values of base monomials on some input, with per-subset marginals cached.
pub trait MonomialValues {
    fn value(&mut self, m: &Monomial) -> Rhs;
}

/// Possibilistic evaluation with cached marginal patterns.
pub struct PatternValues<'a> {
    pattern: &'a Pattern,
    cache: HashMap<Vec<usize>, Pattern>,
}

impl<'a> PatternValues<'a> {
    pub fn new(pattern: &'a Pattern) -> Self {
        PatternValues {
            pattern,
            cache: HashMap::new(),
        }
    }

    pub fn possibility(&mut self, m: &Monomial) -> Possibility {
        for v in m.factors() {
            let pattern = self.pattern;
            let marg = self
                .cache
                .entry(v.observers().to_vec())
                .or_insert_with(|| pattern.marginalize(v.observers()).expect("valid observers"));
            if !marg.is_ok(marg.shape().encode(v.outcomes())) {
                return Possibility::Nope;
            }
        }
        Possibility::Ok
    }
}

impl MonomialValues for PatternValues<'_> {
    fn value(&mut self, m: &Monomial) -> Rhs {
        Rhs::Possibility(self.possibility(m))
    }
}

/// Exact evaluation with cached marginal distributions.
pub struct DistributionValues<'a> {
    dist: &'a Distribution,
    cache: HashMap<Vec<usize>, Distribution>,
}

impl<'a> DistributionValues<'a> {
    pub fn new(dist: &'a Distribution) -> Self {
        DistributionValues {
            dist,
            cache: HashMap::new(),
        }
    }

    pub fn probability(&mut self, m: &Monomial) -> BigRational {
        let mut acc = BigRational::one();
        for v in m.factors() {
            let dist = self.dist;
            let marg = self
                .cache
                .entry(v.observers().to_vec())
                .or_insert_with(|| dist.marginalize(v.observers()).expect("valid observers"));
            acc *= marg.get(marg.shape().encode(v.outcomes()));
            if acc.is_zero() {
                break;
            }
        }
        acc
    }
}

impl MonomialValues for DistributionValues<'_> {
    fn value(&mut self, m: &Monomial) -> Rhs {
        Rhs::Probability(self.probability(m))
    }
}

/// Outcome tuples of an AI set, in joint-index order of its sub-shape.
pub fn set_valuations(inf: &Inflation, set: &AiSet) -> impl Iterator<Item = Vec<usize>> {
    let sub = inf.shape().project_shape(&set.observers);
    (0..sub.len()).map(move |k| sub.decode(k))
}

/// One constraint per maximal AI set and outcome assignment, ordered by set
/// then by assignment.
pub fn constraint_system<V: MonomialValues>(
    inf: &Inflation,
    ai: &AiStructure,
    values: &mut V,
) -> ConstraintSystem {
    let mut constraints = Vec::new();
    for (si, set) in ai.maximal().iter().enumerate() {
        for outcomes in set_valuations(inf, set) {
            let monomial = set.monomial(&outcomes);
            let rhs = values.value(&monomial);
            constraints.push(Constraint {
                set: si,
                valuation: InflationValuation {
                    observers: set.observers.clone(),
                    outcomes,
                },
                monomial,
                rhs,
            });
        }
    }
    ConstraintSystem { constraints }
}
