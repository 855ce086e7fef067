//! Rational combinations of base monomials, read as `I(P) >= 0`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scenario::{evaluate_monomial, Distribution, Monomial, Scenario};

use super::{CertificateError, PossibilisticCertificate};

/// Which monomials came from the antecedent and which from the consequents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub antecedent: Monomial,
    /// One entry per consequent, repeats kept.
    pub consequents: Vec<Monomial>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialInequality {
    scenario: Scenario,
    constant: BigRational,
    terms: BTreeMap<Monomial, BigRational>,
    provenance: Option<Provenance>,
}

impl PolynomialInequality {
    pub fn new(scenario: &Scenario) -> Self {
        PolynomialInequality {
            scenario: scenario.clone(),
            constant: BigRational::zero(),
            terms: BTreeMap::new(),
            provenance: None,
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn add_term(&mut self, coefficient: BigRational, monomial: Monomial) {
        let entry = self
            .terms
            .entry(monomial.clone())
            .or_insert_with(BigRational::zero);
        *entry += coefficient;
        if entry.is_zero() {
            self.terms.remove(&monomial);
        }
    }

    pub fn add_constant(&mut self, c: BigRational) {
        self.constant += c;
    }

    pub fn constant(&self) -> &BigRational {
        &self.constant
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigRational> {
        &self.terms
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.terms.is_empty()
    }

    /// Exact value on a distribution of the base scenario.
    pub fn evaluate(&self, p: &Distribution) -> Result<BigRational, CertificateError> {
        if p.shape() != self.scenario.shape() {
            return Err(CertificateError::ScenarioMismatch {
                expected: self.scenario.outcomes().to_vec(),
                found: p.shape().radices().to_vec(),
            });
        }
        let mut acc = self.constant.clone();
        for (m, c) in &self.terms {
            acc += c * evaluate_monomial(p, m)?;
        }
        Ok(acc)
    }

    /// The same inequality scaled by a positive factor so that all
    /// coefficients are coprime integers.
    pub fn integral(&self) -> Self {
        let coeffs = || std::iter::once(&self.constant).chain(self.terms.values());
        let lcm = coeffs().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let gcd = coeffs()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .fold(BigInt::zero(), |g, n| g.gcd(&n));
        if gcd.is_zero() {
            return self.clone();
        }
        let scale = BigRational::new(lcm, gcd);
        let mut out = self.clone();
        out.constant *= &scale;
        for c in out.terms.values_mut() {
            *c *= &scale;
        }
        out
    }

    /// Positive terms, then negative ones, each ordered by degree and then
    /// by valuations: `P_AB(01) + P_BC(01) - P_A(0) P_C(1) >= 0`.
    pub fn render(&self) -> String {
        let mut items: Vec<(BigRational, Option<&Monomial>)> = Vec::new();
        if !self.constant.is_zero() {
            items.push((self.constant.clone(), None));
        }
        items.extend(self.terms.iter().map(|(m, c)| (c.clone(), Some(m))));
        // stable: keeps monomial order within each sign
        items.sort_by_key(|(c, _)| c.is_negative());
        if items.is_empty() {
            return "0 >= 0".to_string();
        }
        let mut out = String::new();
        for (k, (c, m)) in items.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if k == 0 {
                if c.is_negative() {
                    out.push_str("- ");
                }
            } else {
                let _ = write!(out, " {sign} ");
            }
            let a = c.abs();
            match m {
                None => out.push_str(&a.to_string()),
                Some(m) if a.is_one() => out.push_str(&m.render(&self.scenario)),
                Some(m) => {
                    let _ = write!(out, "{a} {}", m.render(&self.scenario));
                }
            }
        }
        out.push_str(" >= 0");
        out
    }
}

/// Union bound: `sum_i M_Ei - M_T >= 0`.
pub fn to_inequality(cert: &PossibilisticCertificate, scenario: &Scenario) -> PolynomialInequality {
    let mut ineq = PolynomialInequality::new(scenario);
    for e in &cert.consequents {
        ineq.add_term(BigRational::one(), e.monomial.clone());
    }
    ineq.add_term(-BigRational::one(), cert.antecedent.monomial.clone());
    ineq.with_provenance(Provenance {
        antecedent: cert.antecedent.monomial.clone(),
        consequents: cert
            .consequents
            .iter()
            .map(|e| e.monomial.clone())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> Scenario {
        Scenario::triangle()
    }

    fn mono(text: &str) -> Monomial {
        Monomial::parse(&tri(), text).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn cut() -> PolynomialInequality {
        let mut i = PolynomialInequality::new(&tri());
        i.add_term(-r(1, 1), mono("P_A(0) P_C(1)"));
        i.add_term(r(1, 1), mono("P_BC(01)"));
        i.add_term(r(1, 1), mono("P_AB(01)"));
        i
    }

    #[test]
    fn render_orders_signs_then_monomials() {
        assert_eq!(cut().render(), "P_AB(01) + P_BC(01) - P_A(0) P_C(1) >= 0");
    }

    #[test]
    fn cut_on_uniform() {
        let u = Distribution::uniform(tri().shape().clone());
        assert_eq!(cut().evaluate(&u).unwrap(), r(1, 4));
        assert_eq!(cut().degree(), 2);
    }

    #[test]
    fn cancelling_terms_vanish() {
        let mut i = cut();
        i.add_term(r(1, 1), mono("P_A(0) P_C(1)"));
        assert_eq!(i.terms().len(), 2);
    }

    #[test]
    fn integral_scaling() {
        let mut i = PolynomialInequality::new(&tri());
        i.add_term(r(2, 3), mono("P_A(0)"));
        i.add_term(r(-4, 9), mono("P_B(1)"));
        i.add_constant(r(1, 3));
        assert_eq!(i.integral().render(), "3 + 6 P_A(0) - 4 P_B(1) >= 0");
    }

    #[test]
    fn scenario_mismatch() {
        let u = Distribution::uniform(Scenario::square().shape().clone());
        assert!(matches!(
            cut().evaluate(&u),
            Err(CertificateError::ScenarioMismatch { .. })
        ));
    }
}
