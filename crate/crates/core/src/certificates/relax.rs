//! Inequalities and local patterns when source independence only holds up to
//! multiplicative factors: `eps1 * prod <= joint <= eps2 * prod`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::sat::{encode_local_over, solve, Budget, CnfInstance, SolveResult};
use crate::scenario::{collapse_scalar, Monomial, Pattern, Scenario, Shape};

use super::{CertificateError, PolynomialInequality, Provenance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelaxationParams {
    eps1: BigRational,
    eps2: BigRational,
}

impl RelaxationParams {
    pub fn new(eps1: BigRational, eps2: BigRational) -> Result<Self, CertificateError> {
        let one = BigRational::one();
        if eps1 <= BigRational::zero() || eps1 > one || eps2 < one {
            return Err(CertificateError::BadParams {
                eps1: eps1.to_string(),
                eps2: eps2.to_string(),
            });
        }
        Ok(RelaxationParams { eps1, eps2 })
    }

    pub fn exact() -> Self {
        RelaxationParams {
            eps1: BigRational::one(),
            eps2: BigRational::one(),
        }
    }

    pub fn eps1(&self) -> &BigRational {
        &self.eps1
    }

    pub fn eps2(&self) -> &BigRational {
        &self.eps2
    }
}

/// Exponent of the eps factor attached to each monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExponentRule {
    /// The monomial's degree, its number of independent factors.
    #[default]
    Degree,
    /// One exponent for every monomial, e.g. the number of source copies.
    Uniform(u32),
}

impl ExponentRule {
    fn exponent(self, m: &Monomial) -> u32 {
        match self {
            ExponentRule::Degree => m.degree() as u32,
            ExponentRule::Uniform(n) => n,
        }
    }
}

/// `eps1^a M_T <= sum_i eps2^b_i M_Ei`, kept symbolic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelaxedInequality {
    scenario: Scenario,
    pub antecedent: (Monomial, u32),
    /// Consequent monomials with multiplicity, grouped by exponent.
    pub consequents: BTreeMap<u32, BTreeMap<Monomial, usize>>,
}

fn superscript(n: u32) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).expect("decimal digit") as usize])
        .collect()
}

fn power(symbol: &str, n: u32) -> String {
    match n {
        0 => String::new(),
        1 => format!("{symbol} "),
        _ => format!("({symbol}){} ", superscript(n)),
    }
}

impl RelaxedInequality {
    /// `(ε₁)² P_A(0) P_C(1) ⩽ ε₂ [P_AB(01) + P_BC(01)]`.
    pub fn render(&self) -> String {
        let (t, a) = &self.antecedent;
        let mut out = format!("{}{} ⩽ ", power("ε₁", *a), t.render(&self.scenario));
        let groups: Vec<String> = self
            .consequents
            .iter()
            .map(|(&b, ms)| {
                let terms: Vec<String> = ms
                    .iter()
                    .map(|(m, &k)| {
                        let r = m.render(&self.scenario);
                        if k == 1 {
                            r
                        } else {
                            format!("{k} {r}")
                        }
                    })
                    .collect();
                format!("{}[{}]", power("ε₂", b), terms.join(" + "))
            })
            .collect();
        let _ = write!(
            out,
            "{}",
            if groups.is_empty() {
                "0".to_string()
            } else {
                groups.join(" + ")
            }
        );
        out
    }

    pub fn instantiate(&self, params: &RelaxationParams) -> PolynomialInequality {
        let mut ineq = PolynomialInequality::new(&self.scenario);
        let mut consequents = Vec::new();
        for (&b, ms) in &self.consequents {
            let scale: BigRational = Pow::pow(params.eps2.clone(), b);
            for (m, &k) in ms {
                ineq.add_term(&scale * BigRational::from_integer(k.into()), m.clone());
                consequents.extend(std::iter::repeat(m.clone()).take(k));
            }
        }
        let (t, a) = &self.antecedent;
        ineq.add_term(-Pow::pow(params.eps1.clone(), *a), t.clone());
        ineq.with_provenance(Provenance {
            antecedent: t.clone(),
            consequents,
        })
    }
}

pub fn relax_symbolic(
    ineq: &PolynomialInequality,
    rule: ExponentRule,
) -> Result<RelaxedInequality, CertificateError> {
    let prov = ineq.provenance().ok_or(CertificateError::NoProvenance)?;
    let mut consequents: BTreeMap<u32, BTreeMap<Monomial, usize>> = BTreeMap::new();
    for m in &prov.consequents {
        *consequents
            .entry(rule.exponent(m))
            .or_default()
            .entry(m.clone())
            .or_default() += 1;
    }
    Ok(RelaxedInequality {
        scenario: ineq.scenario().clone(),
        antecedent: (prov.antecedent.clone(), rule.exponent(&prov.antecedent)),
        consequents,
    })
}

/// The certificate inequality valid when sources are only approximately
/// independent.
pub fn relax(
    ineq: &PolynomialInequality,
    params: &RelaxationParams,
    rule: ExponentRule,
) -> Result<PolynomialInequality, CertificateError> {
    Ok(relax_symbolic(ineq, rule)?.instantiate(params))
}

/// Local encoding where the hidden tuples follow a correlated distribution
/// bounded below by `eps1` times a full-support product: the hidden support
/// is read off the possibilistic collapse of that bound.
pub fn encode_local_relaxed(
    scenario: &Scenario,
    pattern: &Pattern,
    alphabets: &[usize],
    params: &RelaxationParams,
) -> Result<CnfInstance, CertificateError> {
    if alphabets.contains(&0) {
        return Err(crate::sat::SatError::BadAlphabets(alphabets.to_vec()).into());
    }
    let hidden = Shape::new(alphabets.to_vec());
    let uniform: BigRational = alphabets
        .iter()
        .map(|&k| BigRational::new(1.into(), (k as i64).into()))
        .product();
    let support: Vec<_> = (0..hidden.len())
        .map(|_| collapse_scalar(&(params.eps1() * &uniform)))
        .collect();
    Ok(encode_local_over(scenario, pattern, alphabets, &support)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvarianceReport {
    pub plain_hash: String,
    pub relaxed_hash: String,
    pub identical: bool,
    /// `None` when the budget ran out.
    pub local: Option<bool>,
}

/// Builds the plain and the relaxed local encodings, compares them, and
/// solves the relaxed one.
pub fn check_relaxed_locality_invariance(
    scenario: &Scenario,
    pattern: &Pattern,
    alphabets: &[usize],
    params: &RelaxationParams,
    budget: Budget,
) -> Result<InvarianceReport, CertificateError> {
    let plain = crate::sat::encode_local(scenario, pattern, alphabets)?;
    let relaxed = encode_local_relaxed(scenario, pattern, alphabets, params)?;
    let local = match solve(&relaxed, budget) {
        SolveResult::Sat(_) => Some(true),
        SolveResult::Unsat => Some(false),
        SolveResult::Budget => None,
    };
    let (plain_hash, relaxed_hash) = (plain.hash(), relaxed.hash());
    Ok(InvarianceReport {
        identical: plain_hash == relaxed_hash && plain.clauses() == relaxed.clauses(),
        plain_hash,
        relaxed_hash,
        local,
    })
}
