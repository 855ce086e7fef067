//! Per-orbit results and their witnesses.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::possibility::{check_factorization, independent_pairs, Refutation, Refuter};
use crate::sat::{
    decode_and_verify_local, possible_worlds_decide, solve, Budget, DeterministicWorld,
    EncodingOptions, InflationEncoder, SolveResult, WorldsVerdict,
};
use crate::scenario::{Pattern, Scenario};

use super::{PipelineError, Stage};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Factorizes,
    FactorizationFails {
        pair: (usize, usize),
        outcomes: (usize, usize),
    },
    /// `model` holds the response-table variables as a bitstring.
    Local {
        k: usize,
        model: String,
    },
    NoLocalModel {
        k: usize,
    },
    Refuted {
        contradiction: String,
    },
    Consistent,
    Unsat {
        cnf_hash: String,
    },
    Sat,
    WorldsLocal {
        k: usize,
        world: DeterministicWorld,
    },
    /// Last cardinality tried.
    NoWorld {
        k: usize,
        conclusive: bool,
    },
    Budget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageVerdict {
    pub stage: String,
    #[serde(flatten)]
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Local {
        k: usize,
    },
    SignalingEnabling {
        stage: String,
    },
    NotLocalNUnknown {
        stage: String,
    },
    /// `stage` is the first stage whose budget ran out, if any.
    Unknown {
        stage: Option<String>,
    },
}

impl Label {
    pub fn kind(&self) -> &'static str {
        match self {
            Label::Local { .. } => "local",
            Label::SignalingEnabling { .. } => "signaling-enabling",
            Label::NotLocalNUnknown { .. } => "not-local-N-unknown",
            Label::Unknown { .. } => "unknown",
        }
    }

    pub fn is_resolved(&self) -> bool {
        !matches!(self, Label::Unknown { .. })
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Local { k } => write!(f, "local@{k}"),
            Label::SignalingEnabling { stage } | Label::NotLocalNUnknown { stage } => {
                write!(f, "{}@{stage}", self.kind())
            }
            Label::Unknown { stage: Some(s) } => write!(f, "unknown@{s}"),
            Label::Unknown { stage: None } => write!(f, "unknown"),
        }
    }
}

/// The label a single stage verdict settles on, if any.
fn decides(stage: &Stage, verdict: &Verdict) -> Option<Label> {
    let name = stage.to_string();
    match verdict {
        Verdict::FactorizationFails { .. } | Verdict::Unsat { .. } => {
            Some(Label::SignalingEnabling { stage: name })
        }
        Verdict::Refuted { .. } if stage.is_nonsignaling() => {
            Some(Label::SignalingEnabling { stage: name })
        }
        Verdict::Refuted { .. } => Some(Label::NotLocalNUnknown { stage: name }),
        Verdict::Local { k, .. } | Verdict::WorldsLocal { k, .. } => Some(Label::Local { k: *k }),
        Verdict::NoWorld {
            conclusive: true, ..
        } => Some(Label::NotLocalNUnknown { stage: name }),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    /// Canonical representative as a bitstring; also the record's file name.
    pub representative: String,
    pub literal: String,
    pub orbit_size: usize,
    /// In stage order, up to the deciding one.
    pub stages: Vec<StageVerdict>,
    pub label: String,
    /// Stage whose verdict is the witness for the label.
    pub witness: Option<String>,
}

impl ClassificationRecord {
    pub fn new(representative: &Pattern, orbit_size: usize) -> Self {
        ClassificationRecord {
            representative: representative.to_bitstring(),
            literal: representative.to_literal(),
            orbit_size,
            stages: Vec::new(),
            label: Label::Unknown { stage: None }.to_string(),
            witness: None,
        }
    }

    pub fn pattern(&self, scenario: &Scenario) -> Result<Pattern, PipelineError> {
        Ok(Pattern::parse(scenario.shape(), &self.representative)?)
    }

    pub fn verdict(&self, stage: &str) -> Option<&Verdict> {
        self.stages
            .iter()
            .find(|s| s.stage == stage)
            .map(|s| &s.verdict)
    }

    pub fn witness_verdict(&self) -> Option<&StageVerdict> {
        let w = self.witness.as_deref()?;
        self.stages.iter().find(|s| s.stage == w)
    }

    /// Label implied by the stage verdicts: the first deciding stage wins.
    pub fn derive_label(&self) -> Result<(Label, Option<String>), PipelineError> {
        let mut budget = None;
        for sv in &self.stages {
            let stage: Stage = sv.stage.parse()?;
            if let Some(label) = decides(&stage, &sv.verdict) {
                return Ok((label, Some(sv.stage.clone())));
            }
            if sv.verdict == Verdict::Budget && budget.is_none() {
                budget = Some(sv.stage.clone());
            }
        }
        Ok((Label::Unknown { stage: budget }, None))
    }

    pub fn relabel(&mut self) -> Result<Label, PipelineError> {
        let (label, witness) = self.derive_label()?;
        self.label = label.to_string();
        self.witness = witness;
        Ok(label)
    }

    pub fn is_resolved(&self) -> bool {
        self.witness.is_some()
    }

    pub fn hit_budget(&self) -> bool {
        self.stages.iter().any(|s| s.verdict == Verdict::Budget)
    }
}

fn rejected(record: &ClassificationRecord, reason: impl Into<String>) -> PipelineError {
    PipelineError::WitnessRejected {
        representative: record.representative.clone(),
        reason: reason.into(),
    }
}

/// Recomputes the witness of a resolved record from scratch.
pub fn verify_witness(
    scenario: &Scenario,
    record: &ClassificationRecord,
) -> Result<(), PipelineError> {
    let Some(sv) = record.witness_verdict() else {
        return if record.witness.is_none() {
            Ok(())
        } else {
            Err(rejected(
                record,
                "witness names a stage that has no verdict",
            ))
        };
    };
    let stage: Stage = sv.stage.parse()?;
    let pattern = record.pattern(scenario)?;
    match &sv.verdict {
        Verdict::Local { k, model } => {
            let bits: Vec<bool> = model.chars().map(|c| c == '1').collect();
            decode_and_verify_local(
                scenario,
                &bits,
                &pattern,
                &vec![*k; scenario.source_count()],
            )?;
        }
        Verdict::WorldsLocal { world, .. } => {
            if world.generate(scenario) != pattern {
                return Err(rejected(record, "world does not generate the pattern"));
            }
        }
        Verdict::FactorizationFails { pair, outcomes } => {
            let failure = check_factorization(scenario, &pattern, &independent_pairs(scenario))?
                .ok_or_else(|| rejected(record, "pattern factorizes"))?;
            if failure.pair != *pair || failure.outcomes != *outcomes {
                return Err(rejected(
                    record,
                    format!("factorization fails at {failure} instead"),
                ));
            }
        }
        Verdict::Refuted { contradiction } => {
            let inf = stage
                .inflations(scenario)?
                .pop()
                .ok_or_else(|| rejected(record, "stage has no inflation"))?;
            match Refuter::new(&inf).refute(&pattern) {
                Refutation::Contradiction(c) if &c.render(&inf) == contradiction => {}
                Refutation::Contradiction(c) => {
                    return Err(rejected(
                        record,
                        format!("different contradiction: {}", c.render(&inf)),
                    ));
                }
                Refutation::Consistent => {
                    return Err(rejected(record, "refuter finds no contradiction"))
                }
            }
        }
        Verdict::Unsat { cnf_hash } => {
            let infs = stage.inflations(scenario)?;
            let cnf = InflationEncoder::family(&infs, EncodingOptions::default()).encode(&pattern);
            if &cnf.hash() != cnf_hash {
                return Err(rejected(record, "encoding hash differs"));
            }
            if solve(&cnf, Budget::unlimited()) != SolveResult::Unsat {
                return Err(rejected(record, "encoding is satisfiable"));
            }
        }
        Verdict::NoWorld {
            k,
            conclusive: true,
        } => match possible_worlds_decide(scenario, &pattern, *k, Budget::unlimited())? {
            WorldsVerdict::NotLocal { conclusive: true } => {}
            other => return Err(rejected(record, format!("worlds search gives {other:?}"))),
        },
        other => {
            return Err(rejected(
                record,
                format!("verdict {other:?} is not a witness"),
            ))
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(stages: &[(&str, Verdict)]) -> ClassificationRecord {
        let p = Pattern::parse(Scenario::triangle().shape(), "[000]+[111]").unwrap();
        let mut r = ClassificationRecord::new(&p, 2);
        r.stages = stages
            .iter()
            .map(|(s, v)| StageVerdict {
                stage: s.to_string(),
                verdict: v.clone(),
            })
            .collect();
        r
    }

    #[test]
    fn first_deciding_stage_wins() {
        let mut r = record(&[
            ("sat-local@2", Verdict::NoLocalModel { k: 2 }),
            ("ring@6", Verdict::Budget),
            (
                "spiral",
                Verdict::Refuted {
                    contradiction: "x".into(),
                },
            ),
        ]);
        assert_eq!(
            r.relabel().unwrap(),
            Label::NotLocalNUnknown {
                stage: "spiral".into()
            }
        );
        assert_eq!(r.label, "not-local-N-unknown@spiral");
        assert!(r.hit_budget());
        r.stages.pop();
        assert_eq!(r.relabel().unwrap().to_string(), "unknown@ring@6");
        assert_eq!(r.witness, None);
    }

    #[test]
    fn ring_refutation_is_signaling() {
        let mut r = record(&[(
            "ring@6",
            Verdict::Refuted {
                contradiction: "x".into(),
            },
        )]);
        assert_eq!(r.relabel().unwrap().kind(), "signaling-enabling");
    }

    #[test]
    fn json_shape() {
        let r = record(&[(
            "ring-sat@6,9",
            Verdict::Unsat {
                cnf_hash: "ab".into(),
            },
        )]);
        let json = serde_json::to_string(&r.stages[0]).unwrap();
        assert_eq!(
            json,
            r#"{"stage":"ring-sat@6,9","verdict":"unsat","cnf_hash":"ab"}"#
        );
        assert_eq!(
            serde_json::from_str::<StageVerdict>(&json).unwrap(),
            r.stages[0]
        );
    }

    #[test]
    fn forged_witness_rejected() {
        let tri = Scenario::triangle();
        let mut r = record(&[(
            "ring@6",
            Verdict::Refuted {
                contradiction: "forged".into(),
            },
        )]);
        r.relabel().unwrap();
        assert!(matches!(
            verify_witness(&tri, &r),
            Err(PipelineError::WitnessRejected { .. })
        ));
    }
}
