//! Exact-rational feasibility of inflation marginal constraints, with Farkas
//! certificates and visibility thresholds.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::certificates::PolynomialInequality;
use crate::inflation::{constraint_system, AiStructure, DistributionValues, Inflation, Rhs};
use crate::scenario::{Distribution, Monomial, Scenario};

/// Largest joint space accepted as LP variables.
pub const MAX_LP_VARIABLES: usize = 1 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("inflation has {variables} joint outcomes, above the limit of {limit}")]
    TooLarge { variables: usize, limit: usize },
    #[error("distribution has outcome counts {found:?}, inflation base expects {expected:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("Farkas certificate does not verify")]
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpRow {
    /// Sparse `(variable, coefficient)` pairs.
    pub coefficients: Vec<(usize, BigRational)>,
    pub rhs: BigRational,
    pub label: String,
    /// Base monomial whose value is the right-hand side; `None` for the
    /// normalization row.
    pub monomial: Option<Monomial>,
}

/// `A x = b, x >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalLp {
    pub variables: usize,
    pub rows: Vec<LpRow>,
    scenario: Scenario,
}

impl RationalLp {
    pub fn new(variables: usize, rows: Vec<LpRow>, scenario: &Scenario) -> Self {
        for r in &rows {
            assert!(
                r.coefficients.iter().all(|&(j, _)| j < variables),
                "row references undeclared variable"
            );
        }
        RationalLp {
            variables,
            rows,
            scenario: scenario.clone(),
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn row(&self, label: &str) -> Option<&LpRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Exact check of `A x = b` and `x >= 0`.
    pub fn is_feasible_point(&self, x: &[BigRational]) -> bool {
        x.len() == self.variables
            && x.iter().all(|v| !v.is_negative())
            && self.rows.iter().all(|r| {
                let lhs: BigRational = r.coefficients.iter().map(|(j, a)| a * &x[*j]).sum();
                lhs == r.rhs
            })
    }
}

/// Row multipliers `z` with `A^T z >= 0` and `b^T z < 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<BigRational>,
}

impl FarkasCertificate {
    pub fn verify(&self, lp: &RationalLp) -> bool {
        if self.multipliers.len() != lp.rows.len() {
            return false;
        }
        let mut column = vec![BigRational::zero(); lp.variables];
        let mut value = BigRational::zero();
        for (r, z) in lp.rows.iter().zip(&self.multipliers) {
            if z.is_zero() {
                continue;
            }
            for (j, a) in &r.coefficients {
                column[*j] += a * z;
            }
            value += &r.rhs * z;
        }
        value.is_negative() && column.iter().all(|c| !c.is_negative())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Vec<BigRational>),
    Infeasible(FarkasCertificate),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// Joint probabilities of the inflation, normalized, with each maximal
/// AI-expressible marginal equal to its base monomial on `dist`.
pub fn build_ns_lp(inf: &Inflation, dist: &Distribution) -> Result<RationalLp, LpError> {
    let base = inf.base();
    if dist.shape() != base.shape() {
        return Err(LpError::ShapeMismatch {
            expected: base.outcomes().to_vec(),
            found: dist.shape().radices().to_vec(),
        });
    }
    let n = inf.joint_len();
    if n > MAX_LP_VARIABLES {
        return Err(LpError::TooLarge {
            variables: n,
            limit: MAX_LP_VARIABLES,
        });
    }
    let ai = AiStructure::new(inf);
    let system = constraint_system(inf, &ai, &mut DistributionValues::new(dist));
    let mut rows = vec![LpRow {
        coefficients: (0..n).map(|j| (j, BigRational::one())).collect(),
        rhs: BigRational::one(),
        label: "sum".to_string(),
        monomial: None,
    }];
    for c in system.iter() {
        let Rhs::Probability(rhs) = &c.rhs else {
            unreachable!("distribution values are probabilities");
        };
        rows.push(LpRow {
            coefficients: c
                .valuation
                .index_set(inf)
                .into_iter()
                .map(|j| (j, BigRational::one()))
                .collect(),
            rhs: rhs.clone(),
            label: c.valuation.render(inf),
            monomial: Some(c.monomial.clone()),
        });
    }
    Ok(RationalLp::new(n, rows, base))
}

/// Phase-1 simplex tableau over `[A | I | b]` with rows signed so `b >= 0`.
struct Tableau {
    rows: Vec<Vec<BigRational>>,
    /// Reduced costs of every column, then minus the objective.
    cost: Vec<BigRational>,
    basis: Vec<usize>,
    n: usize,
}

impl Tableau {
    fn new(lp: &RationalLp, signs: &[bool]) -> Self {
        let m = lp.rows.len();
        let n = lp.variables;
        let width = n + m + 1;
        let mut rows = Vec::with_capacity(m);
        let mut cost = vec![BigRational::zero(); width];
        for (i, r) in lp.rows.iter().enumerate() {
            let mut row = vec![BigRational::zero(); width];
            for (j, a) in &r.coefficients {
                row[*j] += a;
            }
            row[n + i] = BigRational::one();
            row[width - 1] = r.rhs.clone();
            if signs[i] {
                for (k, v) in row.iter_mut().enumerate() {
                    if k != n + i {
                        *v = -v.clone();
                    }
                }
            }
            for k in (0..n).chain(std::iter::once(width - 1)) {
                cost[k] -= &row[k];
            }
            rows.push(row);
        }
        Tableau {
            rows,
            cost,
            basis: (n..n + m).collect(),
            n,
        }
    }

    fn pivot(&mut self, p: usize, k: usize) {
        let inv = self.rows[p][k].recip();
        let nonzero: Vec<usize> = (0..self.rows[p].len())
            .filter(|&c| !self.rows[p][c].is_zero())
            .collect();
        for &c in &nonzero {
            self.rows[p][c] *= &inv;
        }
        let pivot_row = std::mem::take(&mut self.rows[p]);
        let eliminate = |row: &mut Vec<BigRational>| {
            let f = row[k].clone();
            if f.is_zero() {
                return;
            }
            for &c in &nonzero {
                let delta = &f * &pivot_row[c];
                row[c] -= delta;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != p {
                eliminate(row);
            }
        }
        eliminate(&mut self.cost);
        self.rows[p] = pivot_row;
        self.basis[p] = k;
    }

    /// Bland's rule: lowest entering column, then lowest leaving basis index.
    fn run(&mut self) {
        let rhs = self.cost.len() - 1;
        while let Some(k) = (0..self.n).find(|&k| self.cost[k].is_negative()) {
            let mut best: Option<(BigRational, usize, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[k].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[k];
                let better = match &best {
                    None => true,
                    Some((r, b, _)) => ratio < *r || (ratio == *r && self.basis[i] < *b),
                };
                if better {
                    best = Some((ratio, self.basis[i], i));
                }
            }
            let (_, _, p) = best.expect("phase one is bounded below");
            self.pivot(p, k);
        }
    }
}

/// Exact feasibility of `A x = b, x >= 0`. Both outcomes are re-verified.
pub fn solve_feasibility(lp: &RationalLp) -> Feasibility {
    let signs: Vec<bool> = lp.rows.iter().map(|r| r.rhs.is_negative()).collect();
    let mut t = Tableau::new(lp, &signs);
    t.run();
    let n = lp.variables;
    let rhs = t.cost.len() - 1;
    if t.cost[rhs].is_zero() {
        let mut x = vec![BigRational::zero(); n];
        for (i, &b) in t.basis.iter().enumerate() {
            if b < n {
                x[b] = t.rows[i][rhs].clone();
            }
        }
        assert!(lp.is_feasible_point(&x), "simplex point fails exact check");
        return Feasibility::Feasible(x);
    }
    // duals of the phase-1 objective: y_i = 1 - reduced cost of artificial i
    let multipliers = (0..lp.rows.len())
        .map(|i| {
            let y = BigRational::one() - &t.cost[n + i];
            if signs[i] {
                y
            } else {
                -y
            }
        })
        .collect();
    let cert = FarkasCertificate { multipliers };
    assert!(cert.verify(lp), "Farkas certificate fails exact check");
    Feasibility::Infeasible(cert)
}

/// `sum_i z_i M_i >= 0` with the normalization row as constant: nonnegative
/// wherever the LP is feasible, negative on the input.
pub fn farkas_to_inequality(
    cert: &FarkasCertificate,
    lp: &RationalLp,
) -> Result<PolynomialInequality, LpError> {
    if !cert.verify(lp) {
        return Err(LpError::Unverified);
    }
    let mut ineq = PolynomialInequality::new(lp.scenario());
    for (r, z) in lp.rows.iter().zip(&cert.multipliers) {
        if z.is_zero() {
            continue;
        }
        match &r.monomial {
            Some(m) => ineq.add_term(z.clone(), m.clone()),
            None => ineq.add_constant(z * &r.rhs),
        }
    }
    Ok(ineq.integral())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Probe {
    pub v: BigRational,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Threshold {
    /// `feasible < infeasible`, both probed; `v_star` is their midpoint.
    Bracketed {
        v_star: BigRational,
        feasible: BigRational,
        infeasible: BigRational,
        probes: Vec<Probe>,
    },
    AlwaysFeasible,
    AlwaysInfeasible,
}

impl Threshold {
    pub fn v_star(&self) -> Option<&BigRational> {
        match self {
            Threshold::Bracketed { v_star, .. } => Some(v_star),
            _ => None,
        }
    }
}

/// Bisects `v` in `[0, 1]` for the feasibility boundary of `family(v)`
/// against the inflation, until the bracket is at most `2 * tolerance` wide.
pub fn visibility_bisection<F>(
    family: F,
    inf: &Inflation,
    tolerance: &BigRational,
) -> Result<Threshold, LpError>
where
    F: Fn(&BigRational) -> Distribution,
{
    assert!(tolerance.is_positive(), "tolerance must be positive");
    let mut probes = Vec::new();
    let mut probe = |v: &BigRational| -> Result<bool, LpError> {
        let feasible = solve_feasibility(&build_ns_lp(inf, &family(v))?).is_feasible();
        probes.push(Probe {
            v: v.clone(),
            feasible,
        });
        Ok(feasible)
    };
    let (mut lo, mut hi) = (BigRational::zero(), BigRational::one());
    if probe(&hi)? {
        return Ok(Threshold::AlwaysFeasible);
    }
    if !probe(&lo)? {
        return Ok(Threshold::AlwaysInfeasible);
    }
    let two = BigRational::from_integer(2.into());
    while &hi - &lo > &two * tolerance {
        let mid = (&lo + &hi) / &two;
        if probe(&mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        debug_assert!(lo < hi);
    }
    Ok(Threshold::Bracketed {
        v_star: (&lo + &hi) / &two,
        feasible: lo,
        infeasible: hi,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inflation::make_cut;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn tri() -> Scenario {
        Scenario::triangle()
    }

    fn ghz(x: BigRational) -> Distribution {
        let mut w = vec![r(0, 1); 8];
        w[7] = BigRational::one() - &x;
        w[0] = x;
        Distribution::new(tri().shape().clone(), w).unwrap()
    }

    #[test]
    fn ring_six_has_64_variables() {
        let inf = Inflation::named(&tri(), "ring:6").unwrap();
        let lp = build_ns_lp(&inf, &ghz(r(1, 2))).unwrap();
        assert_eq!(lp.variables, 64);
    }

    #[test]
    fn cut_ghz_row_and_certificate() {
        let cut = make_cut(&tri()).unwrap();
        let lp = build_ns_lp(&cut, &ghz(r(1, 2))).unwrap();
        assert_eq!(lp.row("P_{A1 C1}(01)").unwrap().rhs, r(1, 4));
        let Feasibility::Infeasible(cert) = solve_feasibility(&lp) else {
            panic!("GHZ is not compatible with the cut");
        };
        let ineq = farkas_to_inequality(&cert, &lp).unwrap();
        assert!(ineq.evaluate(&ghz(r(1, 2))).unwrap().is_negative());
        assert!(!ineq
            .evaluate(&Distribution::uniform(tri().shape().clone()))
            .unwrap()
            .is_negative());
    }

    #[test]
    fn uniform_feasible_on_ring() {
        let inf = Inflation::named(&tri(), "ring:6").unwrap();
        let lp = build_ns_lp(&inf, &Distribution::uniform(tri().shape().clone())).unwrap();
        assert!(solve_feasibility(&lp).is_feasible());
    }

    #[test]
    fn unverified_certificate_rejected() {
        let cut = make_cut(&tri()).unwrap();
        let lp = build_ns_lp(&cut, &ghz(r(1, 2))).unwrap();
        let bogus = FarkasCertificate {
            multipliers: vec![r(0, 1); lp.rows.len()],
        };
        assert_eq!(farkas_to_inequality(&bogus, &lp), Err(LpError::Unverified));
    }

    #[test]
    fn negative_rhs_rows_handled() {
        // x0 + x1 = 1, -x0 = -1/3
        let rows = vec![
            LpRow {
                coefficients: vec![(0, r(1, 1)), (1, r(1, 1))],
                rhs: r(1, 1),
                label: "a".into(),
                monomial: None,
            },
            LpRow {
                coefficients: vec![(0, r(-1, 1))],
                rhs: r(-1, 3),
                label: "b".into(),
                monomial: None,
            },
        ];
        let lp = RationalLp::new(2, rows.clone(), &tri());
        assert_eq!(
            solve_feasibility(&lp),
            Feasibility::Feasible(vec![r(1, 3), r(2, 3)])
        );
        let mut bad = rows;
        bad[1].rhs = r(-2, 1);
        let lp = RationalLp::new(2, bad, &tri());
        assert!(!solve_feasibility(&lp).is_feasible());
    }

    #[test]
    fn ghz_threshold_on_cut_is_bracketed() {
        // mixing GHZ with uniform noise: feasible at 0, infeasible at 1
        let cut = make_cut(&tri()).unwrap();
        let family = |v: &BigRational| {
            let g = ghz(r(1, 2));
            let w = g
                .values()
                .iter()
                .map(|p| v * p + (BigRational::one() - v) * r(1, 8))
                .collect();
            Distribution::new(tri().shape().clone(), w).unwrap()
        };
        let t = visibility_bisection(family, &cut, &r(1, 100)).unwrap();
        let Threshold::Bracketed {
            feasible,
            infeasible,
            ..
        } = t
        else {
            panic!("expected a bracket");
        };
        assert!(feasible < infeasible && &infeasible - &feasible <= r(1, 50));
    }
}
