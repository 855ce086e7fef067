//! Named patterns and distribution families used throughout: the triangle
//! patterns, GHZ and W families, and square embeddings of Hardy and PR boxes.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::scenario::{Distribution, Pattern, Scenario};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExampleError {
    #[error("parameter {name} = {value} out of range")]
    OutOfRange { name: &'static str, value: String },
    #[error("cannot parse {0:?} as a rational")]
    BadNumber(String),
    #[error("unknown fixture {0:?}")]
    Unknown(String),
}

fn pattern(scenario: &Scenario, literal: &str) -> Pattern {
    Pattern::parse(scenario.shape(), literal).expect("fixture literal")
}

/// `P_ok`, `P_111` and `P1` to `P5`.
pub fn triangle_fixtures() -> Vec<(&'static str, Pattern)> {
    let tri = Scenario::triangle();
    vec![
        ("P_ok", Pattern::full(tri.shape().clone())),
        ("P_111", pattern(&tri, "[111]")),
        ("P1", pattern(&tri, "[000]+[001]+[010]+[100]")),
        ("P2", pattern(&tri, "[011]+[100]")),
        ("P3", pattern(&tri, "[011]+[100]+[111]")),
        ("P4", pattern(&tri, "[011]+[100]+[110]+[111]")),
        ("P5", pattern(&tri, "[001]+[010]+[100]")),
    ]
}

pub fn triangle_fixture(name: &str) -> Option<Pattern> {
    triangle_fixtures()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, p)| p)
}

/// Square pattern where A and B play a bipartite box, C outputs B's input y
/// and D outputs A's input x; `forbidden(a, b, x, y)` lists the zeros.
fn square_embedding(forbidden: impl Fn(usize, usize, usize, usize) -> bool) -> Pattern {
    let sq = Scenario::square();
    let shape = sq.shape().clone();
    let support = (0..shape.len()).filter(|&i| {
        let d = shape.decode(i);
        let (a, b, y, x) = (d[0], d[1], d[2], d[3]);
        !forbidden(a, b, x, y)
    });
    Pattern::from_support(shape.clone(), support.collect::<Vec<_>>())
}

/// Hardy's zeros P(10|10) = P(01|01) = P(00|11) = 0, all else possible.
pub fn hardy_square_pattern() -> Pattern {
    square_embedding(|a, b, x, y| {
        (a, b, x, y) == (1, 0, 1, 0) || (a, b, x, y) == (0, 1, 0, 1) || (a, b, x, y) == (0, 0, 1, 1)
    })
}

/// PR box: a xor b = x y.
pub fn pr_box_square_pattern() -> Pattern {
    square_embedding(|a, b, x, y| a ^ b != x & y)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GhzFamilyPoint {
    x: BigRational,
}

impl GhzFamilyPoint {
    pub fn new(x: BigRational) -> Result<Self, ExampleError> {
        if !x.is_positive() || x >= BigRational::one() {
            return Err(ExampleError::OutOfRange {
                name: "x",
                value: x.to_string(),
            });
        }
        Ok(GhzFamilyPoint { x })
    }

    pub fn x(&self) -> &BigRational {
        &self.x
    }
}

/// `x [000] + (1 - x) [111]`.
pub fn ghz_family(point: &GhzFamilyPoint) -> Distribution {
    let shape = Scenario::triangle().shape().clone();
    let mut w = vec![BigRational::zero(); 8];
    w[0] = point.x.clone();
    w[7] = BigRational::one() - &point.x;
    Distribution::new(shape, w).expect("normalized")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WFamilyPoint {
    mu: BigRational,
    nu: BigRational,
    v: BigRational,
}

impl WFamilyPoint {
    pub fn new(mu: BigRational, nu: BigRational, v: BigRational) -> Result<Self, ExampleError> {
        let one = BigRational::one();
        let bad = |name: &'static str, x: &BigRational| ExampleError::OutOfRange {
            name,
            value: x.to_string(),
        };
        if !mu.is_positive() {
            return Err(bad("mu", &mu));
        }
        if !nu.is_positive() {
            return Err(bad("nu", &nu));
        }
        if &mu + &nu >= one {
            return Err(bad("mu + nu", &(&mu + &nu)));
        }
        if v.is_negative() || v > one {
            return Err(bad("v", &v));
        }
        Ok(WFamilyPoint { mu, nu, v })
    }

    pub fn mu(&self) -> &BigRational {
        &self.mu
    }

    pub fn nu(&self) -> &BigRational {
        &self.nu
    }

    pub fn v(&self) -> &BigRational {
        &self.v
    }

    pub fn with_v(&self, v: BigRational) -> Result<Self, ExampleError> {
        WFamilyPoint::new(self.mu.clone(), self.nu.clone(), v)
    }
}

/// `v (mu [001] + nu [010] + (1 - mu - nu) [100]) + (1 - v) / 8`.
pub fn w_family(point: &WFamilyPoint) -> Distribution {
    let shape = Scenario::triangle().shape().clone();
    let one = BigRational::one();
    let noise = (&one - &point.v) / BigRational::from_integer(8.into());
    let mut w = vec![noise; 8];
    w[1] += &point.v * &point.mu;
    w[2] += &point.v * &point.nu;
    w[4] += &point.v * (&one - &point.mu - &point.nu);
    Distribution::new(shape, w).expect("normalized")
}

/// `(mu, nu)` pairs for the threshold study: the interior of a `k`-step
/// barycentric grid, points at distance 1/100 from each edge (in `mu`, `nu`
/// or `1 - mu - nu`) at the grid's steps, and the centroid.
pub fn w_grid(k: usize) -> Vec<(BigRational, BigRational)> {
    assert!(k >= 2, "grid needs at least two steps");
    let q = |n: usize, d: usize| BigRational::new(n.into(), d.into());
    let eps = q(1, 100);
    let one = BigRational::one();
    let mut points = Vec::new();
    for i in 1..k {
        for j in 1..k - i {
            points.push((q(i, k), q(j, k)));
        }
    }
    for i in 1..k {
        let t = q(i, k);
        let inside = |mu: &BigRational, nu: &BigRational| {
            mu.is_positive() && nu.is_positive() && mu + nu < one
        };
        let near = [
            (eps.clone(), t.clone()),
            (t.clone(), eps.clone()),
            (t.clone(), &one - &t - &eps),
        ];
        for (mu, nu) in near {
            if inside(&mu, &nu) {
                points.push((mu, nu));
            }
        }
    }
    points.push((q(1, 3), q(1, 3)));
    points.sort();
    points.dedup();
    points
}

/// `"1/3"`, `"0.9"` or `"2"` as an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, ExampleError> {
    let bad = || ExampleError::BadNumber(text.to_string());
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: num_bigint::BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: num_bigint::BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, text),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits: num_bigint::BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = num_traits::pow(num_bigint::BigInt::from(10), frac.len());
    let r = BigRational::new(digits, scale);
    Ok(if neg { -r } else { r })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fixture {
    Pattern(Scenario, Pattern),
    Distribution(Scenario, Distribution),
}

impl Fixture {
    pub fn scenario(&self) -> &Scenario {
        match self {
            Fixture::Pattern(s, _) | Fixture::Distribution(s, _) => s,
        }
    }

    pub fn pattern(&self) -> Pattern {
        match self {
            Fixture::Pattern(_, p) => p.clone(),
            Fixture::Distribution(_, d) => d.collapse(),
        }
    }
}

fn parameters(text: &str) -> Result<Vec<(&str, BigRational)>, ExampleError> {
    text.split(',')
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| ExampleError::Unknown(kv.to_string()))?;
            Ok((k.trim(), parse_rational(v)?))
        })
        .collect()
}

fn get(
    params: &[(&str, BigRational)],
    name: &str,
    whole: &str,
) -> Result<BigRational, ExampleError> {
    params
        .iter()
        .find(|(k, _)| *k == name)
        .map(|(_, v)| v.clone())
        .ok_or_else(|| ExampleError::Unknown(whole.to_string()))
}

/// `ghz:x=1/2`, `w:mu=1/3,nu=1/3,v=0.9` (v defaults to 1), `hardy-square`,
/// `pr-square`, or a triangle pattern name.
pub fn fixture(name: &str) -> Result<Fixture, ExampleError> {
    let name = name.trim();
    if let Some(rest) = name.strip_prefix("ghz:") {
        let params = parameters(rest)?;
        let point = GhzFamilyPoint::new(get(&params, "x", name)?)?;
        return Ok(Fixture::Distribution(
            Scenario::triangle(),
            ghz_family(&point),
        ));
    }
    if let Some(rest) = name.strip_prefix("w:") {
        let params = parameters(rest)?;
        let v = get(&params, "v", name).unwrap_or_else(|_| BigRational::one());
        let point = WFamilyPoint::new(get(&params, "mu", name)?, get(&params, "nu", name)?, v)?;
        return Ok(Fixture::Distribution(
            Scenario::triangle(),
            w_family(&point),
        ));
    }
    match name {
        "hardy-square" => Ok(Fixture::Pattern(Scenario::square(), hardy_square_pattern())),
        "pr-square" => Ok(Fixture::Pattern(
            Scenario::square(),
            pr_box_square_pattern(),
        )),
        _ => triangle_fixture(name)
            .map(|p| Fixture::Pattern(Scenario::triangle(), p))
            .ok_or_else(|| ExampleError::Unknown(name.to_string())),
    }
}
