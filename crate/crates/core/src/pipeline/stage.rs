//! Classification stages and their textual spec, e.g.
//! `factorization,sat-local@2,ring@8,ring-sat@8,12,web@2,worlds@3..12`.

use std::fmt;
use std::str::FromStr;

use crate::inflation::Inflation;
use crate::scenario::Scenario;

use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stage {
    /// Pairs of source-disjoint observers must factorize.
    Factorization,
    /// Local model with every source alphabet of size `k`.
    SatLocal(usize),
    /// Bit-vector refuter on the nonsignaling `L`-ring.
    Ring(usize),
    /// Joint SAT encoding of several rings.
    RingSat(Vec<usize>),
    /// Refuter on the `n`-web; a contradiction only rules out local models.
    Web(usize),
    Spiral,
    /// Deterministic worlds with cardinalities `from..=to`.
    Worlds {
        from: usize,
        to: usize,
    },
}

impl Stage {
    /// Inflations used by the stage, by name.
    pub fn inflation_names(&self) -> Vec<String> {
        match self {
            Stage::Ring(l) => vec![format!("ring:{l}")],
            Stage::RingSat(ls) => ls.iter().map(|l| format!("ring:{l}")).collect(),
            Stage::Web(n) => vec![format!("web:{n}")],
            Stage::Spiral => vec!["spiral".into()],
            _ => Vec::new(),
        }
    }

    pub fn inflations(&self, scenario: &Scenario) -> Result<Vec<Inflation>, PipelineError> {
        self.inflation_names()
            .iter()
            .map(|n| {
                Inflation::named(scenario, n)
                    .map_err(|e| PipelineError::InvalidStage(format!("{self}: {e}")))
            })
            .collect()
    }

    /// Whether a refutation at this stage rules out nonsignaling models
    /// rather than only local ones.
    pub fn is_nonsignaling(&self) -> bool {
        matches!(
            self,
            Stage::Factorization | Stage::Ring(_) | Stage::RingSat(_)
        )
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Factorization => write!(f, "factorization"),
            Stage::SatLocal(k) => write!(f, "sat-local@{k}"),
            Stage::Ring(l) => write!(f, "ring@{l}"),
            Stage::RingSat(ls) => {
                let ls: Vec<String> = ls.iter().map(usize::to_string).collect();
                write!(f, "ring-sat@{}", ls.join(","))
            }
            Stage::Web(n) => write!(f, "web@{n}"),
            Stage::Spiral => write!(f, "spiral"),
            Stage::Worlds { from, to } => write!(f, "worlds@{from}..{to}"),
        }
    }
}

fn positive(text: &str, whole: &str) -> Result<usize, PipelineError> {
    match text.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(PipelineError::InvalidStage(whole.to_string())),
    }
}

impl FromStr for Stage {
    type Err = PipelineError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim();
        let bad = || PipelineError::InvalidStage(text.to_string());
        let (head, arg) = match text.split_once('@') {
            Some((h, a)) => (h, Some(a)),
            None => (text, None),
        };
        match (head, arg) {
            ("factorization", None) => Ok(Stage::Factorization),
            ("spiral", None) => Ok(Stage::Spiral),
            ("sat-local", Some(k)) => Ok(Stage::SatLocal(positive(k, text)?)),
            ("ring", Some(l)) => Ok(Stage::Ring(positive(l, text)?)),
            ("web", Some(n)) => Ok(Stage::Web(positive(n, text)?)),
            ("ring-sat", Some(ls)) => {
                let ls = ls
                    .split(',')
                    .map(|l| positive(l, text))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Stage::RingSat(ls))
            }
            ("worlds", Some(range)) => {
                let (from, to) = match range.split_once("..") {
                    Some((a, b)) => (positive(a, text)?, positive(b, text)?),
                    None => {
                        let k = positive(range, text)?;
                        (k, k)
                    }
                };
                if from > to {
                    return Err(bad());
                }
                Ok(Stage::Worlds { from, to })
            }
            _ => Err(bad()),
        }
    }
}

/// Comma-separated stages; bare numbers extend the preceding `ring-sat`.
pub fn parse_stages(text: &str) -> Result<Vec<Stage>, PipelineError> {
    let mut out: Vec<Stage> = Vec::new();
    for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if token.chars().all(|c| c.is_ascii_digit()) {
            match out.last_mut() {
                Some(Stage::RingSat(ls)) => ls.push(positive(token, text)?),
                _ => return Err(PipelineError::InvalidStage(token.to_string())),
            }
        } else {
            out.push(token.parse()?);
        }
    }
    if out.is_empty() {
        return Err(PipelineError::InvalidStage(text.to_string()));
    }
    Ok(out)
}

pub fn render_stages(stages: &[Stage]) -> String {
    stages
        .iter()
        .map(Stage::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Stage lists for the built-in scenarios.
pub fn default_stages(scenario: &Scenario) -> Option<Vec<Stage>> {
    let spec = match scenario.name() {
        "triangle" => "sat-local@2,sat-local@6,ring@6,ring@9,ring@12,spiral",
        "square" => "factorization,sat-local@2,sat-local@3,ring@8,ring-sat@8,12,web@2,worlds@3..12",
        _ => return None,
    };
    Some(parse_stages(spec).expect("built-in stage list parses"))
}
