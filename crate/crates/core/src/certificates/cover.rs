//! Certificates "if T happens, one of the E_i happens" and their extraction
//! from contradictions as a minimum set cover.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;

use crate::inflation::{AiStructure, Inflation, InflationValuation, PatternValues};
use crate::possibility::Contradiction;
use crate::scenario::{Monomial, Pattern, Shape};

use super::CertificateError;

/// Above this many candidate sets the cover is found greedily.
pub const EXACT_COVER_MAX: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedEvent {
    pub valuation: InflationValuation,
    pub monomial: Monomial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossibilisticCertificate {
    pub inflation: String,
    pub antecedent: CertifiedEvent,
    pub consequents: Vec<CertifiedEvent>,
}

/// Every outcome assignment of the involved observers that extends the
/// antecedent, with the first consequent it satisfies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverProof {
    pub observers: Vec<usize>,
    pub rows: Vec<(Vec<usize>, usize)>,
}

impl CoverProof {
    pub fn render(&self, inf: &Inflation) -> Vec<String> {
        self.rows
            .iter()
            .map(|(outs, e)| {
                let v = InflationValuation {
                    observers: self.observers.clone(),
                    outcomes: outs.clone(),
                };
                format!("{} in E{}", v.render(inf), e + 1)
            })
            .collect()
    }
}

/// Assignments of the observers in `involved` agreeing with `t`, and for each
/// candidate the assignments it contains.
struct Universe {
    observers: Vec<usize>,
    free: Vec<usize>,
    shape: Shape,
    t: InflationValuation,
}

impl Universe {
    fn new(inf: &Inflation, t: &InflationValuation, others: &[&InflationValuation]) -> Self {
        let mask = others.iter().fold(t.mask(), |m, v| m | v.mask());
        let observers: Vec<usize> = (0..inf.observer_count())
            .filter(|&o| mask >> o & 1 == 1)
            .collect();
        let free: Vec<usize> = observers
            .iter()
            .copied()
            .filter(|&o| t.outcome_of(o).is_none())
            .collect();
        let shape = inf.shape().project_shape(&free);
        Universe {
            observers,
            free,
            shape,
            t: t.clone(),
        }
    }

    fn len(&self) -> usize {
        self.shape.len()
    }

    fn assignment(&self, u: usize) -> Vec<usize> {
        let digits = self.shape.decode(u);
        self.observers
            .iter()
            .map(|&o| match self.t.outcome_of(o) {
                Some(x) => x,
                None => {
                    digits[self
                        .free
                        .iter()
                        .position(|&f| f == o)
                        .expect("free observer")]
                }
            })
            .collect()
    }

    fn members(&self, e: &InflationValuation) -> FixedBitSet {
        let mut set = FixedBitSet::with_capacity(self.len());
        let pos: Vec<usize> = e
            .observers
            .iter()
            .map(|o| self.observers.binary_search(o).expect("involved observer"))
            .collect();
        for u in 0..self.len() {
            let a = self.assignment(u);
            if pos.iter().zip(&e.outcomes).all(|(&p, &x)| a[p] == x) {
                set.insert(u);
            }
        }
        set
    }
}

/// Smallest family of `sets` covering `0..universe`: exhaustive by size for
/// up to [`EXACT_COVER_MAX`] sets, greedy with pruning above. Among covers of
/// equal size the lexicographically first is returned.
pub fn minimum_cover(universe: usize, sets: &[FixedBitSet]) -> Option<Vec<usize>> {
    let mut all = FixedBitSet::with_capacity(universe);
    for s in sets {
        all.union_with(s);
    }
    if all.count_ones(..) < universe {
        return None;
    }
    if universe == 0 {
        return Some(Vec::new());
    }
    if sets.len() <= EXACT_COVER_MAX {
        for k in 1..=sets.len() {
            let mut combo: Vec<usize> = (0..k).collect();
            loop {
                let mut u = FixedBitSet::with_capacity(universe);
                for &i in &combo {
                    u.union_with(&sets[i]);
                }
                if u.count_ones(..) == universe {
                    return Some(combo);
                }
                // next combination in lexicographic order
                let Some(i) = (0..k).rev().find(|&i| combo[i] < sets.len() - k + i) else {
                    break;
                };
                combo[i] += 1;
                for j in i + 1..k {
                    combo[j] = combo[j - 1] + 1;
                }
            }
        }
        unreachable!("the full family covers");
    }
    let mut chosen = Vec::new();
    let mut covered = FixedBitSet::with_capacity(universe);
    while covered.count_ones(..) < universe {
        let best = (0..sets.len())
            .max_by_key(|&i| (sets[i].difference(&covered).count(), std::cmp::Reverse(i)))
            .expect("nonempty family");
        covered.union_with(&sets[best]);
        chosen.push(best);
    }
    // drop sets made redundant by later picks
    let mut k = 0;
    while k < chosen.len() {
        let mut rest = FixedBitSet::with_capacity(universe);
        for (j, &i) in chosen.iter().enumerate() {
            if j != k {
                rest.union_with(&sets[i]);
            }
        }
        if rest.count_ones(..) == universe {
            chosen.remove(k);
        } else {
            k += 1;
        }
    }
    chosen.sort_unstable();
    Some(chosen)
}

impl PossibilisticCertificate {
    /// Builds and checks a certificate from inflation valuations.
    pub fn new(
        inf: &Inflation,
        ai: &AiStructure,
        antecedent: InflationValuation,
        consequents: Vec<InflationValuation>,
    ) -> Result<Self, CertificateError> {
        let event = |v: InflationValuation| {
            let monomial = v
                .monomial(inf, ai)
                .ok_or_else(|| CertificateError::NotAiExpressible(v.render(inf)))?;
            Ok::<_, CertificateError>(CertifiedEvent {
                valuation: v,
                monomial,
            })
        };
        let cert = PossibilisticCertificate {
            inflation: inf.name().to_string(),
            antecedent: event(antecedent)?,
            consequents: consequents
                .into_iter()
                .map(event)
                .collect::<Result<_, _>>()?,
        };
        cert.verify(inf)?;
        Ok(cert)
    }

    /// Checks that every assignment extending the antecedent meets some
    /// consequent.
    pub fn verify(&self, inf: &Inflation) -> Result<CoverProof, CertificateError> {
        let others: Vec<&InflationValuation> =
            self.consequents.iter().map(|e| &e.valuation).collect();
        let universe = Universe::new(inf, &self.antecedent.valuation, &others);
        let members: Vec<FixedBitSet> = others.iter().map(|e| universe.members(e)).collect();
        let mut rows = Vec::with_capacity(universe.len());
        for u in 0..universe.len() {
            let a = universe.assignment(u);
            match members.iter().position(|m| m.contains(u)) {
                Some(e) => rows.push((a, e)),
                None => {
                    let v = InflationValuation {
                        observers: universe.observers.clone(),
                        outcomes: a,
                    };
                    return Err(CertificateError::CoverFails(v.render(inf)));
                }
            }
        }
        Ok(CoverProof {
            observers: universe.observers,
            rows,
        })
    }

    pub fn render(&self, inf: &Inflation) -> String {
        let es: Vec<String> = self
            .consequents
            .iter()
            .map(|e| e.valuation.render(inf))
            .collect();
        format!(
            "{} => {}",
            self.antecedent.valuation.render(inf),
            es.join(" or ")
        )
    }
}

/// ⊘ restrictions of the covering events to AI-expressible subsets that keep
/// every observer in `keep`, minimal among themselves, sorted.
fn minimal_nope_restrictions(
    contradiction: &Contradiction,
    keep: u32,
    inf: &Inflation,
    ai: &AiStructure,
    pattern: &Pattern,
) -> Vec<CertifiedEvent> {
    let mut values = PatternValues::new(pattern);
    let mut nope: BTreeMap<InflationValuation, Monomial> = BTreeMap::new();
    let mut seen: BTreeSet<InflationValuation> = BTreeSet::new();
    for e in &contradiction.covering {
        let full = e.valuation.mask();
        let kept = full & keep;
        // submasks of the event's set that keep the antecedent's observers
        let mut extra = full & !keep;
        loop {
            let sub = kept | extra;
            let v = e.valuation.restrict(sub);
            if sub != 0 && ai.contains(sub) && seen.insert(v.clone()) {
                let m = v.monomial(inf, ai).expect("AI-expressible subset");
                if !values.possibility(&m).is_ok() {
                    nope.insert(v, m);
                }
            }
            if extra == 0 {
                break;
            }
            extra = (extra - 1) & full & !keep;
        }
    }
    let keys: Vec<InflationValuation> = nope.keys().cloned().collect();
    nope.into_iter()
        .filter(|(v, _)| {
            !keys
                .iter()
                .any(|w| w != v && w.mask() & !v.mask() == 0 && v.restrict(w.mask()) == *w)
        })
        .map(|(valuation, monomial)| CertifiedEvent {
            valuation,
            monomial,
        })
        .collect()
}

/// The violated ✓ event as antecedent, and a minimum family of ⊘ events
/// covering it as consequents. Candidates are the contradicting ⊘ events and
/// their ⊘ restrictions to smaller AI-expressible sets that drop only
/// observers outside the antecedent.
pub fn extract_certificate(
    contradiction: &Contradiction,
    inf: &Inflation,
    pattern: &Pattern,
) -> Result<PossibilisticCertificate, CertificateError> {
    if contradiction.covering.is_empty() {
        return Err(CertificateError::NoCandidates);
    }
    let ai = AiStructure::new(inf);
    let t = &contradiction.violated.valuation;
    let candidates = minimal_nope_restrictions(contradiction, t.mask(), inf, &ai, pattern);
    let vals: Vec<&InflationValuation> = candidates.iter().map(|e| &e.valuation).collect();
    let universe = Universe::new(inf, t, &vals);
    let sets: Vec<FixedBitSet> = vals.iter().map(|e| universe.members(e)).collect();
    let chosen = minimum_cover(universe.len(), &sets)
        .ok_or_else(|| CertificateError::CoverFails(t.render(inf)))?;
    let cert = PossibilisticCertificate {
        inflation: inf.name().to_string(),
        antecedent: CertifiedEvent {
            valuation: t.clone(),
            monomial: contradiction.violated.monomial.clone(),
        },
        consequents: chosen.iter().map(|&i| candidates[i].clone()).collect(),
    };
    cert.verify(inf)?;
    Ok(cert)
}
