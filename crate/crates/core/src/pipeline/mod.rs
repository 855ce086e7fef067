//! Orbit-by-orbit classification runs with persisted, resumable records.

mod record;
mod report;
mod stage;
mod wstudy;

use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error;

use crate::certificates::CertificateError;
use crate::examples::ExampleError;
use crate::inflation::InflationError;
use crate::lp::LpError;
use crate::possibility::{
    check_factorization, independent_pairs, PossibilityError, Refutation, Refuter,
};
use crate::sat::{
    decode_and_verify_local, encode_local, possible_worlds_decide, solve, Budget, EncodingOptions,
    InflationEncoder, LocalLayout, SatError, SolveResult, WorldsVerdict,
};
use crate::scenario::{Pattern, Scenario, ScenarioError};
use crate::symmetry::{RelabelingGroup, SymmetryError};

pub use record::{verify_witness, ClassificationRecord, Label, StageVerdict, Verdict};
pub use report::{load_records, Summary, SummaryRow, RECORDS_DIR};
pub use stage::{default_stages, parse_stages, render_stages, Stage};
pub use wstudy::{w_study, WStudy, WStudyRow};

/// Largest joint outcome count whose patterns are enumerated.
pub const MAX_JOINT_OUTCOMES: usize = 24;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid stage spec: {0}")]
    InvalidStage(String),
    #[error("witness for {representative} rejected: {reason}")]
    WitnessRejected {
        representative: String,
        reason: String,
    },
    #[error("output directory holds a run of {found}, not {expected}")]
    RunMismatch { expected: String, found: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    BadRecord { path: PathBuf, message: String },
    #[error("thread pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Inflation(#[from] InflationError),
    #[error(transparent)]
    Possibility(#[from] PossibilityError),
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Certificate(#[from] CertificateError),
    #[error(transparent)]
    Example(#[from] ExampleError),
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub scenario: Scenario,
    pub stages: Vec<Stage>,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    /// Applied to every SAT call.
    pub budget: Budget,
    pub out: Option<PathBuf>,
    pub resume: bool,
    /// Re-check every witness as soon as its record is decided.
    pub verify: bool,
}

impl PipelineConfig {
    /// Default stages for a built-in scenario, no output directory.
    pub fn new(scenario: Scenario) -> Result<Self, PipelineError> {
        let stages = default_stages(&scenario).ok_or_else(|| {
            PipelineError::InvalidStage(format!("no default stages for {}", scenario.name()))
        })?;
        Ok(PipelineConfig {
            scenario,
            stages,
            jobs: 0,
            budget: Budget::unlimited(),
            out: None,
            resume: false,
            verify: true,
        })
    }
}

enum Runner {
    Factorization(Vec<(usize, usize)>),
    Local(usize),
    Refute(Box<Refuter>),
    Family(Box<InflationEncoder>),
    Worlds { from: usize, to: usize },
}

impl Runner {
    fn new(stage: &Stage, scenario: &Scenario) -> Result<Self, PipelineError> {
        Ok(match stage {
            Stage::Factorization => Runner::Factorization(independent_pairs(scenario)),
            Stage::SatLocal(k) => Runner::Local(*k),
            Stage::Ring(_) | Stage::Web(_) | Stage::Spiral => {
                let inf = stage.inflations(scenario)?.pop().expect("one inflation");
                Runner::Refute(Box::new(Refuter::new(&inf)))
            }
            Stage::RingSat(_) => {
                let infs = stage.inflations(scenario)?;
                Runner::Family(Box::new(InflationEncoder::family(
                    &infs,
                    EncodingOptions::default(),
                )))
            }
            Stage::Worlds { from, to } => Runner::Worlds {
                from: *from,
                to: *to,
            },
        })
    }

    fn run(
        &self,
        scenario: &Scenario,
        pattern: &Pattern,
        budget: Budget,
    ) -> Result<Verdict, PipelineError> {
        Ok(match self {
            Runner::Factorization(pairs) => match check_factorization(scenario, pattern, pairs)? {
                Some(f) => Verdict::FactorizationFails {
                    pair: f.pair,
                    outcomes: f.outcomes,
                },
                None => Verdict::Factorizes,
            },
            Runner::Local(k) => {
                let alphabets = vec![*k; scenario.source_count()];
                match solve(&encode_local(scenario, pattern, &alphabets)?, budget) {
                    SolveResult::Sat(model) => {
                        decode_and_verify_local(scenario, &model, pattern, &alphabets)?;
                        let n = LocalLayout::new(scenario, &alphabets).table_vars() as usize;
                        let model = model[..n]
                            .iter()
                            .map(|&b| if b { '1' } else { '0' })
                            .collect();
                        Verdict::Local { k: *k, model }
                    }
                    SolveResult::Unsat => Verdict::NoLocalModel { k: *k },
                    SolveResult::Budget => Verdict::Budget,
                }
            }
            Runner::Refute(refuter) => match refuter.refute(pattern) {
                Refutation::Contradiction(c) => Verdict::Refuted {
                    contradiction: c.render(refuter.inflation()),
                },
                Refutation::Consistent => Verdict::Consistent,
            },
            Runner::Family(encoder) => {
                let cnf = encoder.encode(pattern);
                match solve(&cnf, budget) {
                    SolveResult::Unsat => Verdict::Unsat {
                        cnf_hash: cnf.hash(),
                    },
                    SolveResult::Sat(_) => Verdict::Sat,
                    SolveResult::Budget => Verdict::Budget,
                }
            }
            Runner::Worlds { from, to } => {
                // the diagonal search at the support size is conclusive and
                // usually far cheaper than the smaller cardinalities
                let support = pattern.count_ok().max(*from);
                let ks: Vec<usize> = if support <= *to {
                    vec![support]
                } else {
                    (*from..=*to).collect()
                };
                let mut verdict = Verdict::NoWorld {
                    k: *ks.last().expect("nonempty range"),
                    conclusive: false,
                };
                for k in ks {
                    match possible_worlds_decide(scenario, pattern, k, budget)? {
                        WorldsVerdict::Local(world) => {
                            verdict = Verdict::WorldsLocal { k, world };
                            break;
                        }
                        WorldsVerdict::NotLocal { conclusive: true } => {
                            verdict = Verdict::NoWorld {
                                k,
                                conclusive: true,
                            };
                            break;
                        }
                        WorldsVerdict::NotLocal { conclusive: false } => {}
                        WorldsVerdict::Budget => {
                            verdict = Verdict::Budget;
                            break;
                        }
                    }
                }
                verdict
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct ClassifyOutcome {
    pub records: Vec<ClassificationRecord>,
    pub summary: Summary,
}

/// Runs the stages in order over every orbit that is still undecided.
/// With `resume`, verdicts already on disk are reused, except budget
/// exhaustions, which are retried.
pub fn classify(config: &PipelineConfig) -> Result<ClassifyOutcome, PipelineError> {
    let scenario = &config.scenario;
    let runners = config
        .stages
        .iter()
        .map(|s| Runner::new(s, scenario))
        .collect::<Result<Vec<_>, _>>()?;
    let store = match &config.out {
        Some(dir) => Some(report::Store::open(dir, scenario, config.resume)?),
        None => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;

    let orbits = RelabelingGroup::new(scenario).partition_into_orbits(MAX_JOINT_OUTCOMES, false)?;
    let patterns: Vec<Pattern> = orbits.iter().map(|o| o.representative.clone()).collect();
    let mut records: Vec<ClassificationRecord> = orbits
        .iter()
        .map(|o| ClassificationRecord::new(&o.representative, o.size))
        .collect();
    let cached: Vec<Option<ClassificationRecord>> = match &store {
        Some(s) if config.resume => records
            .iter()
            .map(|r| s.load(r))
            .collect::<Result<_, _>>()?,
        _ => vec![None; records.len()],
    };

    for (stage, runner) in config.stages.iter().zip(&runners) {
        let name = stage.to_string();
        let pending: Vec<usize> = (0..records.len())
            .filter(|&i| !records[i].is_resolved())
            .collect();
        let verdicts: Vec<Verdict> = pool.install(|| {
            pending
                .par_iter()
                .map(|&i| {
                    let reuse = cached[i]
                        .as_ref()
                        .and_then(|c| c.verdict(&name))
                        .filter(|v| **v != Verdict::Budget);
                    match reuse {
                        Some(v) => Ok(v.clone()),
                        None => runner.run(scenario, &patterns[i], config.budget),
                    }
                })
                .collect::<Result<_, PipelineError>>()
        })?;
        for (&i, verdict) in pending.iter().zip(verdicts) {
            records[i].stages.push(StageVerdict {
                stage: name.clone(),
                verdict,
            });
            records[i].relabel()?;
        }
        if config.verify {
            pool.install(|| {
                pending
                    .par_iter()
                    .filter(|&&i| records[i].is_resolved())
                    .try_for_each(|&i| verify_witness(scenario, &records[i]))
            })?;
        }
        if let Some(store) = &store {
            for &i in &pending {
                store.write_record(&records[i])?;
            }
        }
    }

    let summary = Summary::new(scenario, &config.stages, &records);
    if let Some(store) = &store {
        store.write_reports(&summary, &records)?;
    }
    Ok(ClassifyOutcome { records, summary })
}
