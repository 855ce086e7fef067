//! Inflations: scenarios built from copies of the base sources and observers.

mod ai;
mod build;
mod constraints;
mod format;
mod iso;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::scenario::{outcome_char, Scenario, ScenarioError, Shape};

pub use ai::{component_masks, AiSet, AiStructure, Component};
pub use constraints::{
    constraint_system, set_valuations, Constraint, ConstraintSystem, DistributionValues,
    InflationValuation, MonomialValues, PatternValues, Rhs,
};
pub use format::{InflationDescription, ObserverCopyDescription, SourceCopyDescription};
pub use iso::{connected_subsets, SubgraphKey};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InflationError {
    #[error("ring length {length} is not a multiple of {period} with at least two periods")]
    InvalidLength { length: usize, period: usize },
    #[error("{inflation} needs a {expected}-shaped scenario")]
    WrongShape { inflation: String, expected: String },
    #[error("inflation would have {count} observer copies, above the cap of {cap}")]
    SizeCap { count: usize, cap: usize },
    #[error("web inflation needs at least one copy per source")]
    ZeroCopies,
    #[error("unknown inflation {0:?}")]
    Unknown(String),
    #[error("cannot parse inflation: {0}")]
    Parse(String),
    #[error("inflation is not valid: {0}")]
    Invalid(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Whether an inflation may feed one source copy to several copies of the
/// same observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    /// No source duplication; constrains the nonsignaling set.
    Nonsignaling,
    /// Source copies may fan out; constrains the local set only.
    Fanout,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceCopy {
    pub base: usize,
    pub copy: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObserverCopy {
    pub base: usize,
    /// Copy index, or the tuple of incident source-copy indices for webs.
    pub copy: Vec<usize>,
}

/// A violated wiring rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The edge does not project to an edge of the base scenario.
    IncompatibleType { source: String, observer: String },
    /// The observer copy lacks a copy of one of its base sources.
    MissingSource {
        observer: String,
        base_source: String,
    },
    /// The observer copy receives several copies of the same base source.
    RepeatedSource {
        observer: String,
        base_source: String,
    },
    /// One source copy feeds several copies of the same base observer.
    Duplication {
        source: String,
        base_observer: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::IncompatibleType { source, observer } => {
                write!(f, "edge {source} -> {observer} has no base counterpart")
            }
            Violation::MissingSource {
                observer,
                base_source,
            } => {
                write!(f, "{observer} receives no copy of {base_source}")
            }
            Violation::RepeatedSource {
                observer,
                base_source,
            } => {
                write!(f, "{observer} receives several copies of {base_source}")
            }
            Violation::Duplication {
                source,
                base_observer,
            } => {
                write!(f, "{source} feeds several copies of {base_observer}")
            }
        }
    }
}

/// Cap on observer copies, so that subset enumeration and joint spaces stay
/// tractable.
pub const MAX_OBSERVER_COPIES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inflation {
    name: String,
    base: Scenario,
    sources: Vec<SourceCopy>,
    observers: Vec<ObserverCopy>,
    /// `(source copy, observer copy)`.
    edges: BTreeSet<(usize, usize)>,
    sources_of: Vec<Vec<usize>>,
    observers_of: Vec<Vec<usize>>,
    flavor: Flavor,
    shape: Shape,
}

impl Inflation {
    /// Assembles an inflation; observer copies are reordered by
    /// `(base observer, copy)` and source copies by `(base source, copy)`.
    pub fn new(
        name: impl Into<String>,
        base: &Scenario,
        flavor: Flavor,
        edges: &[(SourceCopy, ObserverCopy)],
    ) -> Result<Self, InflationError> {
        let mut sources: Vec<SourceCopy> = edges.iter().map(|e| e.0.clone()).collect();
        sources.sort();
        sources.dedup();
        let mut observers: Vec<ObserverCopy> = edges.iter().map(|e| e.1.clone()).collect();
        observers.sort();
        observers.dedup();
        if observers.len() > MAX_OBSERVER_COPIES {
            return Err(InflationError::SizeCap {
                count: observers.len(),
                cap: MAX_OBSERVER_COPIES,
            });
        }
        for s in &sources {
            if s.base >= base.source_count() {
                return Err(ScenarioError::DanglingSource(s.base).into());
            }
        }
        for o in &observers {
            if o.base >= base.observer_count() {
                return Err(ScenarioError::DanglingObserver(o.base).into());
            }
        }
        let mut edge_set = BTreeSet::new();
        for (s, o) in edges {
            let si = sources.binary_search(s).expect("source listed");
            let oi = observers.binary_search(o).expect("observer listed");
            edge_set.insert((si, oi));
        }
        let mut sources_of = vec![Vec::new(); observers.len()];
        let mut observers_of = vec![Vec::new(); sources.len()];
        for &(s, o) in &edge_set {
            sources_of[o].push(s);
            observers_of[s].push(o);
        }
        let shape = Shape::new(observers.iter().map(|o| base.outcomes()[o.base]).collect());
        Ok(Inflation {
            name: name.into(),
            base: base.clone(),
            sources,
            observers,
            edges: edge_set,
            sources_of,
            observers_of,
            flavor,
            shape,
        })
    }

    /// Built-in inflation by name: `cut`, `spiral`, `ring:L`, `web:n`.
    pub fn named(base: &Scenario, name: &str) -> Result<Self, InflationError> {
        let name = name.trim();
        let parse_n = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| InflationError::Unknown(name.to_string()))
        };
        if name == "cut" {
            build::make_cut(base)
        } else if name == "spiral" {
            build::make_spiral(base)
        } else if let Some(l) = name.strip_prefix("ring:") {
            build::make_ring(base, parse_n(l)?)
        } else if let Some(n) = name.strip_prefix("web:") {
            build::make_web(base, parse_n(n)?)
        } else {
            Err(InflationError::Unknown(name.to_string()))
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &Scenario {
        &self.base
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn source_copies(&self) -> &[SourceCopy] {
        &self.sources
    }

    pub fn observer_copies(&self) -> &[ObserverCopy] {
        &self.observers
    }

    pub fn observer_count(&self) -> usize {
        self.observers.len()
    }

    pub fn source_count(&self) -> usize {
        self.sources.len()
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn sources_of(&self, o: usize) -> &[usize] {
        &self.sources_of[o]
    }

    pub fn observers_of(&self, s: usize) -> &[usize] {
        &self.observers_of[s]
    }

    /// Base observer of each observer copy.
    pub fn base_observer(&self, o: usize) -> usize {
        self.observers[o].base
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn joint_len(&self) -> usize {
        self.shape.len()
    }

    pub fn observer_name(&self, o: usize) -> String {
        let c = &self.observers[o];
        let digits: String = c.copy.iter().map(|&k| outcome_char(k)).collect();
        format!("{}{}", self.base.observer_name(c.base), digits)
    }

    pub fn source_name(&self, s: usize) -> String {
        let c = &self.sources[s];
        format!("{}{}", self.base.source_name(c.base), c.copy)
    }

    pub fn observer_index(&self, name: &str) -> Option<usize> {
        (0..self.observer_count()).find(|&o| self.observer_name(o) == name)
    }

    /// For each observer copy, the mask of other copies sharing a source copy
    /// with it.
    pub fn adjacency(&self) -> Vec<u32> {
        let mut adjacent = vec![0u32; self.observer_count()];
        for feeds in &self.observers_of {
            for &a in feeds {
                for &b in feeds {
                    if a != b {
                        adjacent[a] |= 1 << b;
                    }
                }
            }
        }
        adjacent
    }

    /// Checks the wiring rules; duplication is only reported for
    /// nonsignaling inflations unless `as_flavor` says otherwise.
    pub fn violations(&self, as_flavor: Flavor) -> Vec<Violation> {
        let mut out = Vec::new();
        for &(s, o) in &self.edges {
            let (bs, bo) = (self.sources[s].base, self.observers[o].base);
            if !self.base.has_edge(bs, bo) {
                out.push(Violation::IncompatibleType {
                    source: self.source_name(s),
                    observer: self.observer_name(o),
                });
            }
        }
        for o in 0..self.observer_count() {
            let bo = self.observers[o].base;
            for &bs in self.base.sources_of(bo) {
                let n = self.sources_of[o]
                    .iter()
                    .filter(|&&s| self.sources[s].base == bs)
                    .count();
                let base_source = self.base.source_name(bs).to_string();
                if n == 0 {
                    out.push(Violation::MissingSource {
                        observer: self.observer_name(o),
                        base_source,
                    });
                } else if n > 1 {
                    out.push(Violation::RepeatedSource {
                        observer: self.observer_name(o),
                        base_source,
                    });
                }
            }
        }
        if as_flavor == Flavor::Nonsignaling {
            for s in 0..self.source_count() {
                let mut seen = BTreeSet::new();
                for &o in &self.observers_of[s] {
                    let bo = self.observers[o].base;
                    if !seen.insert(bo) {
                        out.push(Violation::Duplication {
                            source: self.source_name(s),
                            base_observer: self.base.observer_name(bo).to_string(),
                        });
                    }
                }
            }
        }
        out
    }

    /// Violations for the inflation's own flavor.
    pub fn validate(&self) -> Vec<Violation> {
        self.violations(self.flavor)
    }

    /// The inflation viewed as a scenario of its own.
    pub fn as_scenario(&self) -> Result<Scenario, InflationError> {
        Ok(Scenario::new(
            self.name.clone(),
            (0..self.source_count())
                .map(|s| self.source_name(s))
                .collect(),
            (0..self.observer_count())
                .map(|o| {
                    (
                        self.observer_name(o),
                        self.base.outcomes()[self.observers[o].base],
                    )
                })
                .collect(),
            self.edges.iter().copied(),
        )?)
    }
}

impl fmt::Display for Inflation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.name)?;
        for o in 0..self.observer_count() {
            let srcs: Vec<String> = self.sources_of[o]
                .iter()
                .map(|&s| self.source_name(s))
                .collect();
            write!(f, " {}({})", self.observer_name(o), srcs.join(","))?;
        }
        Ok(())
    }
}

pub use build::{cycle_order, make_cut, make_ring, make_spiral, make_web};
