//! Two-phase possibilistic refutation over an inflation, and the
//! factorization test for observers that share no source.
//!
//! Phase 1 marks every inflation event covered by a ⊘ constraint. Phase 2
//! looks for a ✓ constraint all of whose events were marked.

use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::inflation::{AiStructure, Inflation, InflationValuation};
use crate::scenario::{Monomial, Pattern, Projector, Scenario, Shape};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PossibilityError {
    #[error("observers {0} and {1} share a source")]
    PairSharesSource(String, String),
    #[error("pattern has {found} entries, the scenario expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// A valuation of an AI set together with its base monomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    /// Index into the maximal AI sets.
    pub set: usize,
    pub valuation: InflationValuation,
    pub monomial: Monomial,
}

/// A ✓ constraint whose events are all ruled out by ⊘ constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contradiction {
    pub violated: Event,
    /// Every ⊘ constraint whose event set meets the violated one, in
    /// constraint order.
    pub covering: Vec<Event>,
}

impl Contradiction {
    pub fn render(&self, inf: &Inflation) -> String {
        let cover: Vec<String> = self
            .covering
            .iter()
            .map(|e| format!("{} = NOPE", e.valuation.render(inf)))
            .collect();
        format!(
            "{} = OK contradicted by {}",
            self.violated.valuation.render(inf),
            cover.join(", ")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refutation {
    Consistent,
    Contradiction(Contradiction),
}

impl Refutation {
    pub fn is_contradiction(&self) -> bool {
        matches!(self, Refutation::Contradiction(_))
    }
}

/// Factor of a precomputed monomial: a base subset id and the index of the
/// valuation within that subset's marginal.
#[derive(Debug, Clone, Copy)]
struct FactorRef {
    subset: usize,
    index: usize,
}

/// Per-inflation data reused across patterns.
#[derive(Debug, Clone)]
pub struct Refuter {
    inflation: Inflation,
    ai: AiStructure,
    projectors: Vec<Projector>,
    sub_shapes: Vec<Shape>,
    subsets: Vec<Vec<usize>>,
    factors: Vec<Vec<Vec<FactorRef>>>,
}

impl Refuter {
    pub fn new(inflation: &Inflation) -> Self {
        Refuter::with_ai(inflation, AiStructure::new(inflation))
    }

    pub fn with_ai(inflation: &Inflation, ai: AiStructure) -> Self {
        let shape = inflation.shape();
        let base_shape = inflation.base().shape();
        let mut subsets: Vec<Vec<usize>> = Vec::new();
        let mut projectors = Vec::new();
        let mut sub_shapes = Vec::new();
        let mut factors = Vec::new();
        for set in ai.maximal() {
            projectors.push(Projector::new(shape, &set.observers));
            let sub = shape.project_shape(&set.observers);
            let mut per_val = Vec::with_capacity(sub.len());
            for k in 0..sub.len() {
                let m = set.monomial(&sub.decode(k));
                let refs = m
                    .factors()
                    .iter()
                    .map(|v| {
                        let subset = match subsets.iter().position(|s| s == v.observers()) {
                            Some(i) => i,
                            None => {
                                subsets.push(v.observers().to_vec());
                                subsets.len() - 1
                            }
                        };
                        let index = base_shape.project_shape(v.observers()).encode(v.outcomes());
                        FactorRef { subset, index }
                    })
                    .collect();
                per_val.push(refs);
            }
            sub_shapes.push(sub);
            factors.push(per_val);
        }
        Refuter {
            inflation: inflation.clone(),
            ai,
            projectors,
            sub_shapes,
            subsets,
            factors,
        }
    }

    pub fn inflation(&self) -> &Inflation {
        &self.inflation
    }

    pub fn ai(&self) -> &AiStructure {
        &self.ai
    }

    /// ✓/⊘ right-hand sides, one vector per maximal set.
    pub fn right_hand_sides(&self, pattern: &Pattern) -> Vec<FixedBitSet> {
        let margs: Vec<Pattern> = self
            .subsets
            .iter()
            .map(|s| pattern.marginalize(s).expect("base observers"))
            .collect();
        self.factors
            .iter()
            .map(|per_val| {
                let mut ok = FixedBitSet::with_capacity(per_val.len());
                for (k, refs) in per_val.iter().enumerate() {
                    ok.set(k, refs.iter().all(|f| margs[f.subset].is_ok(f.index)));
                }
                ok
            })
            .collect()
    }

    /// Phase 1: events ruled out by some ⊘ constraint.
    pub fn phase_one(&self, rhs: &[FixedBitSet]) -> FixedBitSet {
        self.phase_one_ordered(rhs, &(0..rhs.len()).collect::<Vec<_>>())
    }

    /// Phase 1 visiting the sets in a given order.
    pub fn phase_one_ordered(&self, rhs: &[FixedBitSet], order: &[usize]) -> FixedBitSet {
        let n = self.inflation.joint_len();
        let mut nope = FixedBitSet::with_capacity(n);
        let words = nope.as_mut_slice();
        for &si in order {
            let proj = &self.projectors[si];
            let ok = &rhs[si];
            if ok.is_full() {
                continue;
            }
            for (w, word) in words.iter_mut().enumerate() {
                let base = w * usize::BITS as usize;
                let mut acc = 0usize;
                for b in 0..(usize::BITS as usize).min(n.saturating_sub(base)) {
                    if !ok.contains(proj.project(base + b)) {
                        acc |= 1 << b;
                    }
                }
                *word |= acc;
            }
        }
        nope
    }

    pub fn refute(&self, pattern: &Pattern) -> Refutation {
        let rhs = self.right_hand_sides(pattern);
        let nope = self.phase_one(&rhs);
        self.phase_two(&rhs, &nope)
    }

    /// Phase 2: the first ✓ constraint with no surviving event.
    pub fn phase_two(&self, rhs: &[FixedBitSet], nope: &FixedBitSet) -> Refutation {
        let n = self.inflation.joint_len();
        let alive: Vec<usize> = (0..n).filter(|&x| !nope.contains(x)).collect();
        for (si, ok) in rhs.iter().enumerate() {
            let mut supported = FixedBitSet::with_capacity(ok.len());
            let proj = &self.projectors[si];
            for &x in &alive {
                supported.insert(proj.project(x));
            }
            if let Some(k) = ok.ones().find(|&k| !supported.contains(k)) {
                return Refutation::Contradiction(self.contradiction(rhs, si, k));
            }
        }
        Refutation::Consistent
    }

    fn event(&self, si: usize, k: usize) -> Event {
        let set = &self.ai.maximal()[si];
        let outcomes = self.sub_shapes[si].decode(k);
        Event {
            set: si,
            monomial: set.monomial(&outcomes),
            valuation: InflationValuation {
                observers: set.observers.clone(),
                outcomes,
            },
        }
    }

    fn contradiction(&self, rhs: &[FixedBitSet], si: usize, k: usize) -> Contradiction {
        let proj = &self.projectors[si];
        let events: Vec<usize> = (0..self.inflation.joint_len())
            .filter(|&x| proj.project(x) == k)
            .collect();
        let mut covering = Vec::new();
        for (sj, ok) in rhs.iter().enumerate() {
            let mut touched = FixedBitSet::with_capacity(ok.len());
            for &x in &events {
                let kj = self.projectors[sj].project(x);
                if !ok.contains(kj) {
                    touched.insert(kj);
                }
            }
            covering.extend(touched.ones().map(|kj| self.event(sj, kj)));
        }
        Contradiction {
            violated: self.event(si, k),
            covering,
        }
    }
}

/// Runs both phases of the refutation for one pattern.
pub fn propagate_and_refute(refuter: &Refuter, pattern: &Pattern) -> Refutation {
    refuter.refute(pattern)
}

/// A failed factorization: `P_XY(xy) ≠ P_X(x) P_Y(y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationFailure {
    pub pair: (usize, usize),
    pub outcomes: (usize, usize),
}

impl fmt::Display for FactorizationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "observers {} and {} at outcomes ({}, {})",
            self.pair.0, self.pair.1, self.outcomes.0, self.outcomes.1
        )
    }
}

/// Observer pairs sharing no source, in increasing order.
pub fn independent_pairs(scenario: &Scenario) -> Vec<(usize, usize)> {
    let n = scenario.observer_count();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if !scenario.share_source(a, b) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Checks that the pattern factorizes on each pair of source-disjoint
/// observers; returns the first failure.
pub fn check_factorization(
    scenario: &Scenario,
    pattern: &Pattern,
    pairs: &[(usize, usize)],
) -> Result<Option<FactorizationFailure>, PossibilityError> {
    if pattern.len() != scenario.joint_len() {
        return Err(PossibilityError::DimensionMismatch {
            expected: scenario.joint_len(),
            found: pattern.len(),
        });
    }
    for &(a, b) in pairs {
        if scenario.share_source(a, b) {
            return Err(PossibilityError::PairSharesSource(
                scenario.observer_name(a).into(),
                scenario.observer_name(b).into(),
            ));
        }
    }
    for &(a, b) in pairs {
        let pab = pattern.marginalize(&[a, b]).expect("valid pair");
        let pa = pattern.marginalize(&[a]).expect("valid observer");
        let pb = pattern.marginalize(&[b]).expect("valid observer");
        let nb = scenario.outcomes()[b];
        for x in 0..scenario.outcomes()[a] {
            for y in 0..nb {
                if pab.is_ok(x * nb + y) != (pa.is_ok(x) && pb.is_ok(y)) {
                    return Ok(Some(FactorizationFailure {
                        pair: (a, b),
                        outcomes: (x, y),
                    }));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inflation::{make_cut, make_ring};

    #[test]
    fn ghz_cut_contradiction() {
        let tri = Scenario::triangle();
        let cut = make_cut(&tri).unwrap();
        let r = Refuter::new(&cut);
        let ghz = Pattern::parse(tri.shape(), "[000]+[111]").unwrap();
        let Refutation::Contradiction(c) = r.refute(&ghz) else {
            panic!("GHZ must be refuted by the cut inflation");
        };
        assert_eq!(c.violated.valuation.render(&cut), "P_{A1 C1}(01)");
        let cover: Vec<String> = c
            .covering
            .iter()
            .map(|e| e.valuation.render(&cut))
            .collect();
        assert_eq!(cover, vec!["P_{A1 B1}(01)", "P_{B1 C1}(01)"]);
    }

    #[test]
    fn full_pattern_consistent() {
        let tri = Scenario::triangle();
        let r = Refuter::new(&make_ring(&tri, 6).unwrap());
        assert_eq!(
            r.refute(&Pattern::full(tri.shape().clone())),
            Refutation::Consistent
        );
    }

    #[test]
    fn factorization_examples() {
        let sq = Scenario::square();
        let pairs = independent_pairs(&sq);
        assert_eq!(pairs, vec![(0, 2), (1, 3)]);
        let full = Pattern::full(sq.shape().clone());
        assert_eq!(check_factorization(&sq, &full, &pairs).unwrap(), None);
        let p = Pattern::parse(sq.shape(), "[0000]+[1111]").unwrap();
        let fail = check_factorization(&sq, &p, &pairs).unwrap().unwrap();
        assert_eq!(fail.pair, (0, 2));
        assert_eq!(fail.outcomes, (0, 1));
        assert!(matches!(
            check_factorization(&sq, &full, &[(0, 1)]),
            Err(PossibilityError::PairSharesSource(..))
        ));
    }
}
