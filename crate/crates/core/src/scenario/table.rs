//! Distributions, patterns and the semiring-generic marginalization.

use std::fmt;

use fixedbitset::FixedBitSet;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use super::shape::Shape;
use super::ScenarioError;

/// An element of the possibility semiring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Possibility {
    /// ⊘
    Nope,
    /// ✓
    Ok,
}

impl Possibility {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Possibility::Ok
        } else {
            Possibility::Nope
        }
    }

    pub fn is_ok(self) -> bool {
        self == Possibility::Ok
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Possibility::Nope => "NOPE",
            Possibility::Ok => "OK",
        }
    }
}

impl fmt::Display for Possibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Commutative semiring used for marginal sums and monomial products.
pub trait Semiring: Clone {
    fn nil() -> Self;
    fn unit() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
}

impl Semiring for Possibility {
    fn nil() -> Self {
        Possibility::Nope
    }
    fn unit() -> Self {
        Possibility::Ok
    }
    fn plus(&self, other: &Self) -> Self {
        Possibility::from_bool(self.is_ok() || other.is_ok())
    }
    fn times(&self, other: &Self) -> Self {
        Possibility::from_bool(self.is_ok() && other.is_ok())
    }
}

impl Semiring for BigRational {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
}

impl Semiring for f64 {
    fn nil() -> Self {
        0.0
    }
    fn unit() -> Self {
        1.0
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
}

/// The morphism from nonnegative reals to possibilities.
pub fn collapse_scalar(x: &BigRational) -> Possibility {
    Possibility::from_bool(x.is_positive())
}

/// Checks that `positions` is a nonempty list of distinct valid positions.
pub fn check_subset(shape: &Shape, positions: &[usize]) -> Result<(), ScenarioError> {
    if positions.is_empty() {
        return Err(ScenarioError::EmptySubset);
    }
    let mut seen = vec![false; shape.arity()];
    for &p in positions {
        if p >= shape.arity() || seen[p] {
            return Err(ScenarioError::InvalidSubset(positions.to_vec()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Sums `values` over every position not in `positions`; the result is
/// indexed by the sub-tuple at `positions`, in the given order.
pub fn marginalize<S: Semiring>(
    shape: &Shape,
    values: &[S],
    positions: &[usize],
) -> Result<Vec<S>, ScenarioError> {
    check_subset(shape, positions)?;
    if values.len() != shape.len() {
        return Err(ScenarioError::LengthMismatch {
            expected: shape.len(),
            found: values.len(),
        });
    }
    let sub = shape.project_shape(positions);
    let mut out = vec![S::nil(); sub.len()];
    for (i, v) in values.iter().enumerate() {
        let k = shape.project(i, positions);
        out[k] = out[k].plus(v);
    }
    Ok(out)
}

/// A probability vector over joint outcomes, with exact rational entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    shape: Shape,
    values: Vec<BigRational>,
}

impl Distribution {
    pub fn new(shape: Shape, values: Vec<BigRational>) -> Result<Self, ScenarioError> {
        if values.len() != shape.len() {
            return Err(ScenarioError::LengthMismatch {
                expected: shape.len(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| v.is_negative()) {
            return Err(ScenarioError::NegativeEntry(shape.label(i)));
        }
        let total: BigRational = values.iter().sum();
        if !total.is_one() {
            return Err(ScenarioError::NotNormalized(total.to_string()));
        }
        Ok(Distribution { shape, values })
    }

    /// Builds a distribution from nonnegative weights, dividing by their sum.
    pub fn from_weights(shape: Shape, weights: Vec<BigRational>) -> Result<Self, ScenarioError> {
        let total: BigRational = weights.iter().sum();
        if !total.is_positive() {
            return Err(ScenarioError::NotNormalized(total.to_string()));
        }
        let values = weights.into_iter().map(|w| w / &total).collect();
        Distribution::new(shape, values)
    }

    pub fn uniform(shape: Shape) -> Self {
        let p = BigRational::new(1.into(), shape.len().into());
        let values = vec![p; shape.len()];
        Distribution { shape, values }
    }

    /// Point mass on a single joint outcome.
    pub fn point(shape: Shape, index: usize) -> Self {
        let mut values = vec![BigRational::zero(); shape.len()];
        values[index] = BigRational::one();
        Distribution { shape, values }
    }

    /// Product of independent per-position marginals.
    pub fn product(marginals: &[Vec<BigRational>]) -> Result<Self, ScenarioError> {
        let shape = Shape::new(marginals.iter().map(Vec::len).collect());
        let values = (0..shape.len())
            .map(|i| {
                marginals
                    .iter()
                    .enumerate()
                    .map(|(p, m)| m[shape.digit(i, p)].clone())
                    .product()
            })
            .collect();
        Distribution::new(shape, values)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn get(&self, index: usize) -> &BigRational {
        &self.values[index]
    }

    pub fn marginalize(&self, positions: &[usize]) -> Result<Distribution, ScenarioError> {
        let values = marginalize(&self.shape, &self.values, positions)?;
        Ok(Distribution {
            shape: self.shape.project_shape(positions),
            values,
        })
    }

    /// Entrywise collapse to a pattern.
    pub fn collapse(&self) -> Pattern {
        let mut bits = FixedBitSet::with_capacity(self.len());
        for (i, v) in self.values.iter().enumerate() {
            bits.set(i, v.is_positive());
        }
        Pattern {
            shape: self.shape.clone(),
            bits,
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.values
            .iter()
            .map(|v| v.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

/// Free-function form of [`Distribution::collapse`].
pub fn collapse(p: &Distribution) -> Pattern {
    p.collapse()
}

/// One bit per joint outcome: set means ✓.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    shape: Shape,
    bits: FixedBitSet,
}

impl Pattern {
    pub fn empty(shape: Shape) -> Self {
        let bits = FixedBitSet::with_capacity(shape.len());
        Pattern { shape, bits }
    }

    pub fn full(shape: Shape) -> Self {
        let mut p = Pattern::empty(shape);
        p.bits.insert_range(..);
        p
    }

    pub fn from_support(shape: Shape, support: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Pattern::empty(shape);
        for i in support {
            p.bits.insert(i);
        }
        p
    }

    pub fn from_possibilities(
        shape: Shape,
        entries: &[Possibility],
    ) -> Result<Self, ScenarioError> {
        if entries.len() != shape.len() {
            return Err(ScenarioError::LengthMismatch {
                expected: shape.len(),
                found: entries.len(),
            });
        }
        Ok(Pattern::from_support(
            shape,
            entries
                .iter()
                .enumerate()
                .filter(|(_, e)| e.is_ok())
                .map(|(i, _)| i),
        ))
    }

    /// Pattern from an integer code whose most significant of the `N` bits is
    /// joint outcome 0, so that code order equals bitstring order.
    pub fn from_code(shape: Shape, code: u64) -> Self {
        let n = shape.len();
        assert!(n <= 64, "pattern codes need at most 64 joint outcomes");
        Pattern::from_support(shape, (0..n).filter(|&i| code >> (n - 1 - i) & 1 == 1))
    }

    pub fn code(&self) -> Option<u64> {
        let n = self.len();
        if n > 64 {
            return None;
        }
        Some(self.bits.ones().fold(0u64, |acc, i| acc | 1 << (n - 1 - i)))
    }

    /// Parses either a bitstring (`"10000001"`) or a sum of bracketed events
    /// (`"[000]+[111]"`).
    pub fn parse(shape: &Shape, text: &str) -> Result<Self, ScenarioError> {
        let text = text.trim();
        if text.starts_with('[') {
            let mut p = Pattern::empty(shape.clone());
            for term in text.split('+') {
                let term = term.trim();
                let inner = term
                    .strip_prefix('[')
                    .and_then(|t| t.strip_suffix(']'))
                    .ok_or_else(|| ScenarioError::BadLiteral(text.to_string()))?;
                let i = shape
                    .parse_label(inner.trim())
                    .ok_or_else(|| ScenarioError::BadLiteral(text.to_string()))?;
                p.bits.insert(i);
            }
            Ok(p)
        } else {
            if text.len() != shape.len() {
                return Err(ScenarioError::BadLiteral(text.to_string()));
            }
            let mut p = Pattern::empty(shape.clone());
            for (i, c) in text.chars().enumerate() {
                match c {
                    '1' => p.bits.insert(i),
                    '0' => {}
                    _ => return Err(ScenarioError::BadLiteral(text.to_string())),
                }
            }
            Ok(p)
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shape.is_empty()
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    pub fn get(&self, index: usize) -> Possibility {
        Possibility::from_bool(self.bits.contains(index))
    }

    pub fn is_ok(&self, index: usize) -> bool {
        self.bits.contains(index)
    }

    pub fn set(&mut self, index: usize, value: Possibility) {
        self.bits.set(index, value.is_ok());
    }

    /// Joint outcomes marked ✓, increasing.
    pub fn support(&self) -> Vec<usize> {
        self.bits.ones().collect()
    }

    pub fn count_ok(&self) -> usize {
        self.bits.count_ones(..)
    }

    /// At least one ✓ entry.
    pub fn is_normalized(&self) -> bool {
        !self.bits.is_clear()
    }

    pub fn possibilities(&self) -> Vec<Possibility> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    pub fn marginalize(&self, positions: &[usize]) -> Result<Pattern, ScenarioError> {
        check_subset(&self.shape, positions)?;
        let sub = self.shape.project_shape(positions);
        let mut out = Pattern::empty(sub);
        for i in self.bits.ones() {
            out.bits.insert(self.shape.project(i, positions));
        }
        Ok(out)
    }

    pub fn to_bitstring(&self) -> String {
        (0..self.len())
            .map(|i| if self.is_ok(i) { '1' } else { '0' })
            .collect()
    }

    /// Sum-of-events literal, e.g. `"[000]+[111]"`; the all-⊘ pattern is `"0"`.
    pub fn to_literal(&self) -> String {
        if !self.is_normalized() {
            return "0".into();
        }
        self.bits
            .ones()
            .map(|i| format!("[{}]", self.shape.label(i)))
            .collect::<Vec<_>>()
            .join("+")
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

/// A distribution supported exactly on the ✓ entries. Without weights every
/// ✓ entry gets the same mass.
pub fn realizations_sample(
    pattern: &Pattern,
    weights: Option<&[BigRational]>,
) -> Result<Distribution, ScenarioError> {
    if !pattern.is_normalized() {
        return Err(ScenarioError::EmptyPattern);
    }
    let shape = pattern.shape().clone();
    let raw: Vec<BigRational> = match weights {
        None => (0..pattern.len())
            .map(|i| {
                if pattern.is_ok(i) {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            })
            .collect(),
        Some(w) => {
            if w.len() != pattern.len() {
                return Err(ScenarioError::LengthMismatch {
                    expected: pattern.len(),
                    found: w.len(),
                });
            }
            for (i, x) in w.iter().enumerate() {
                if pattern.is_ok(i) != x.is_positive() {
                    return Err(ScenarioError::WeightSupportMismatch(shape.label(i)));
                }
            }
            w.to_vec()
        }
    };
    Distribution::from_weights(shape, raw)
}

/// A realization with random positive integer weights in `1..=max_weight`.
pub fn realizations_random<R: Rng>(
    pattern: &Pattern,
    rng: &mut R,
    max_weight: u32,
) -> Result<Distribution, ScenarioError> {
    let weights: Vec<BigRational> = (0..pattern.len())
        .map(|i| {
            if pattern.is_ok(i) {
                BigRational::from_integer(rng.gen_range(1..=max_weight.max(1)).into())
            } else {
                BigRational::zero()
            }
        })
        .collect();
    realizations_sample(pattern, Some(&weights))
}

/// Default cap on the number of joint outcomes for exhaustive enumeration.
pub const ENUMERATION_CAP_BITS: usize = 24;

/// Every normalized pattern of a shape, in increasing code order.
pub fn enumerate_patterns(
    shape: &Shape,
    cap_bits: usize,
) -> Result<impl Iterator<Item = Pattern> + '_, ScenarioError> {
    let n = shape.len();
    if n > cap_bits.min(63) {
        return Err(ScenarioError::EnumerationCap {
            joint: n,
            cap: cap_bits,
        });
    }
    Ok((1u64..(1u64 << n)).map(move |c| Pattern::from_code(shape.clone(), c)))
}
