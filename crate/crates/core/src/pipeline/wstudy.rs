//! Visibility thresholds of the noisy W family over a grid of `(mu, nu)`.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::examples::{w_family, w_grid, WFamilyPoint};
use crate::inflation::Inflation;
use crate::lp::{visibility_bisection, Threshold};
use crate::scenario::Scenario;

use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WStudyRow {
    pub mu: BigRational,
    pub nu: BigRational,
    pub threshold: Threshold,
}

impl WStudyRow {
    /// `v*`, with 1 for always feasible and 0 for never.
    pub fn v_star(&self) -> BigRational {
        match &self.threshold {
            Threshold::Bracketed { v_star, .. } => v_star.clone(),
            Threshold::AlwaysFeasible => BigRational::one(),
            Threshold::AlwaysInfeasible => BigRational::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WStudy {
    pub inflation: String,
    pub rows: Vec<WStudyRow>,
}

fn decimal(r: &BigRational) -> String {
    format!("{:.6}", r.to_f64().unwrap_or(f64::NAN))
}

impl WStudy {
    /// The point with the smallest `v*`: below it the whole grid is feasible.
    pub fn min(&self) -> Option<&WStudyRow> {
        self.rows.iter().min_by(|a, b| a.v_star().cmp(&b.v_star()))
    }

    pub fn max(&self) -> Option<&WStudyRow> {
        self.rows.iter().max_by(|a, b| a.v_star().cmp(&b.v_star()))
    }

    /// `mu,nu,v_star,v_star_decimal`, one line per point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mu,nu,v_star,v_star_decimal\n");
        for r in &self.rows {
            let v = r.v_star();
            let _ = writeln!(out, "{},{},{},{}", r.mu, r.nu, v, decimal(&v));
        }
        out
    }

    pub fn render_extremes(&self) -> String {
        let line = |name: &str, r: Option<&WStudyRow>| match r {
            Some(r) => format!(
                "{name} v* = {} at mu = {}, nu = {}\n",
                decimal(&r.v_star()),
                r.mu,
                r.nu
            ),
            None => format!("{name} v* undefined\n"),
        };
        line("min", self.min()) + &line("max", self.max())
    }
}

/// Bisects `v*` at every point of `w_grid(k)` against the 6-ring.
pub fn w_study(k: usize, tolerance: &BigRational, jobs: usize) -> Result<WStudy, PipelineError> {
    if k < 2 || tolerance <= &BigRational::zero() {
        return Err(PipelineError::InvalidStage(format!(
            "grid {k} with tolerance {tolerance}"
        )));
    }
    let inf = Inflation::named(&Scenario::triangle(), "ring:6")?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;
    let rows = pool.install(|| {
        w_grid(k)
            .into_par_iter()
            .map(|(mu, nu)| {
                let base = WFamilyPoint::new(mu.clone(), nu.clone(), BigRational::one())?;
                let family =
                    |v: &BigRational| w_family(&base.with_v(v.clone()).expect("v in [0, 1]"));
                let threshold = visibility_bisection(family, &inf, tolerance)?;
                Ok(WStudyRow { mu, nu, threshold })
            })
            .collect::<Result<Vec<_>, PipelineError>>()
    })?;
    Ok(WStudy {
        inflation: inf.name().to_string(),
        rows,
    })
}
