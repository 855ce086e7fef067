//! Text format for user-supplied inflations.
//!
//! ```toml
//! name = "cut"
//! flavor = "nonsignaling"
//! sources = [{ name = "beta2", base = "beta", copy = 2 }, ...]
//! observers = [{ name = "A1", base = "A", copy = [1] }, ...]
//! edges = [["beta2", "A1"], ...]
//! ```

use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;

use super::{Flavor, Inflation, InflationError, ObserverCopy, SourceCopy};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceCopyDescription {
    pub name: String,
    pub base: String,
    pub copy: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObserverCopyDescription {
    pub name: String,
    pub base: String,
    pub copy: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InflationDescription {
    #[serde(default)]
    pub name: String,
    /// `"nonsignaling"` or `"fanout"`.
    pub flavor: String,
    pub sources: Vec<SourceCopyDescription>,
    pub observers: Vec<ObserverCopyDescription>,
    pub edges: Vec<(String, String)>,
}

impl InflationDescription {
    pub fn from_toml(text: &str) -> Result<Self, InflationError> {
        toml::from_str(text).map_err(|e| InflationError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("inflation description serializes")
    }

    pub fn build(&self, base: &Scenario) -> Result<Inflation, InflationError> {
        let flavor = match self.flavor.as_str() {
            "nonsignaling" => Flavor::Nonsignaling,
            "fanout" => Flavor::Fanout,
            other => return Err(InflationError::Parse(format!("unknown flavor {other:?}"))),
        };
        let source = |name: &str| -> Result<SourceCopy, InflationError> {
            let d = self
                .sources
                .iter()
                .find(|s| s.name == name)
                .ok_or_else(|| InflationError::Parse(format!("unknown source copy {name:?}")))?;
            let base_idx = (0..base.source_count())
                .find(|&s| base.source_name(s) == d.base)
                .ok_or_else(|| {
                    InflationError::Parse(format!("unknown base source {:?}", d.base))
                })?;
            Ok(SourceCopy {
                base: base_idx,
                copy: d.copy,
            })
        };
        let observer = |name: &str| -> Result<ObserverCopy, InflationError> {
            let d = self
                .observers
                .iter()
                .find(|o| o.name == name)
                .ok_or_else(|| InflationError::Parse(format!("unknown observer copy {name:?}")))?;
            let base_idx = base.observer_index(&d.base).ok_or_else(|| {
                InflationError::Parse(format!("unknown base observer {:?}", d.base))
            })?;
            Ok(ObserverCopy {
                base: base_idx,
                copy: d.copy.clone(),
            })
        };
        let edges = self
            .edges
            .iter()
            .map(|(s, o)| Ok((source(s)?, observer(o)?)))
            .collect::<Result<Vec<_>, InflationError>>()?;
        let inf = Inflation::new(self.name.clone(), base, flavor, &edges)?;
        let bad = inf.validate();
        if !bad.is_empty() {
            let msgs: Vec<String> = bad.iter().map(|v| v.to_string()).collect();
            return Err(InflationError::Invalid(msgs.join("; ")));
        }
        Ok(inf)
    }
}

impl Inflation {
    pub fn description(&self) -> InflationDescription {
        InflationDescription {
            name: self.name.clone(),
            flavor: match self.flavor {
                Flavor::Nonsignaling => "nonsignaling".into(),
                Flavor::Fanout => "fanout".into(),
            },
            sources: (0..self.source_count())
                .map(|s| SourceCopyDescription {
                    name: self.source_name(s),
                    base: self.base.source_name(self.sources[s].base).to_string(),
                    copy: self.sources[s].copy,
                })
                .collect(),
            observers: (0..self.observer_count())
                .map(|o| ObserverCopyDescription {
                    name: self.observer_name(o),
                    base: self.base.observer_name(self.observers[o].base).to_string(),
                    copy: self.observers[o].copy.clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(s, o)| (self.source_name(s), self.observer_name(o)))
                .collect(),
        }
    }
}
