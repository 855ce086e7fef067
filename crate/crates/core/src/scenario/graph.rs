use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::shape::Shape;
use super::ScenarioError;

/// Source/observer graph with per-observer outcome counts.
///
/// Sources and observers are addressed by their position (0-based); edges
/// always point from a source to an observer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    name: String,
    sources: Vec<String>,
    observers: Vec<String>,
    outcomes: Vec<usize>,
    edges: BTreeSet<(usize, usize)>,
    sources_of: Vec<Vec<usize>>,
    observers_of: Vec<Vec<usize>>,
    shape: Shape,
}

/// Human-readable scenario description, as read from a TOML file.
///
/// ```toml
/// name = "triangle"
/// sources = ["alpha", "beta", "gamma"]
/// observers = [{ name = "A", outcomes = 2 }, { name = "B", outcomes = 2 }, { name = "C", outcomes = 2 }]
/// edges = [["alpha", "B"], ["alpha", "C"], ["beta", "A"], ["beta", "C"], ["gamma", "A"], ["gamma", "B"]]
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioDescription {
    #[serde(default)]
    pub name: String,
    pub sources: Vec<String>,
    pub observers: Vec<ObserverDescription>,
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObserverDescription {
    pub name: String,
    pub outcomes: usize,
}

impl ScenarioDescription {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario description serializes")
    }
}

impl Scenario {
    /// Builds a scenario from index-based data, checking every invariant.
    pub fn new(
        name: impl Into<String>,
        sources: Vec<String>,
        observers: Vec<(String, usize)>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, ScenarioError> {
        let name = name.into();
        if observers.is_empty() {
            return Err(ScenarioError::NoObservers);
        }
        check_unique(&sources)?;
        let (observer_names, outcomes): (Vec<String>, Vec<usize>) = observers.into_iter().unzip();
        check_unique(&observer_names)?;
        for (o, &n) in observer_names.iter().zip(&outcomes) {
            if n < 2 {
                return Err(ScenarioError::TooFewOutcomes {
                    observer: o.clone(),
                    outcomes: n,
                });
            }
        }
        let mut edge_set = BTreeSet::new();
        for (s, o) in edges {
            if s >= sources.len() {
                return Err(ScenarioError::DanglingSource(s));
            }
            if o >= observer_names.len() {
                return Err(ScenarioError::DanglingObserver(o));
            }
            if !edge_set.insert((s, o)) {
                return Err(ScenarioError::DuplicateEdge {
                    src: sources[s].clone(),
                    observer: observer_names[o].clone(),
                });
            }
        }
        let mut sources_of = vec![Vec::new(); observer_names.len()];
        let mut observers_of = vec![Vec::new(); sources.len()];
        for &(s, o) in &edge_set {
            sources_of[o].push(s);
            observers_of[s].push(o);
        }
        if let Some(o) = sources_of.iter().position(Vec::is_empty) {
            return Err(ScenarioError::OrphanObserver(observer_names[o].clone()));
        }
        let shape = Shape::new(outcomes.clone());
        Ok(Scenario {
            name,
            sources,
            observers: observer_names,
            outcomes,
            edges: edge_set,
            sources_of,
            observers_of,
            shape,
        })
    }

    pub fn from_description(desc: &ScenarioDescription) -> Result<Self, ScenarioError> {
        let lookup = |names: &[String], key: &str| names.iter().position(|n| n == key);
        let observer_names: Vec<String> = desc.observers.iter().map(|o| o.name.clone()).collect();
        let mut edges = Vec::with_capacity(desc.edges.len());
        for (s, o) in &desc.edges {
            let si =
                lookup(&desc.sources, s).ok_or_else(|| ScenarioError::UnknownSource(s.clone()))?;
            let oi = lookup(&observer_names, o)
                .ok_or_else(|| ScenarioError::UnknownObserver(o.clone()))?;
            edges.push((si, oi));
        }
        Scenario::new(
            desc.name.clone(),
            desc.sources.clone(),
            desc.observers
                .iter()
                .map(|o| (o.name.clone(), o.outcomes))
                .collect(),
            edges,
        )
    }

    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        Scenario::from_description(&ScenarioDescription::from_toml(text)?)
    }

    pub fn description(&self) -> ScenarioDescription {
        ScenarioDescription {
            name: self.name.clone(),
            sources: self.sources.clone(),
            observers: self
                .observers
                .iter()
                .zip(&self.outcomes)
                .map(|(n, &k)| ObserverDescription {
                    name: n.clone(),
                    outcomes: k,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(s, o)| (self.sources[s].clone(), self.observers[o].clone()))
                .collect(),
        }
    }

    /// Three binary observers on a triangle of bipartite sources.
    pub fn triangle() -> Self {
        let names = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        Scenario::new(
            "triangle",
            names(&["alpha", "beta", "gamma"]),
            vec![("A".into(), 2), ("B".into(), 2), ("C".into(), 2)],
            // alpha: B,C  beta: A,C  gamma: A,B
            [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)],
        )
        .expect("triangle is valid")
    }

    /// Four binary observers on a square of bipartite sources.
    pub fn square() -> Self {
        let names = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        Scenario::new(
            "square",
            names(&["alpha", "beta", "gamma", "delta"]),
            vec![
                ("A".into(), 2),
                ("B".into(), 2),
                ("C".into(), 2),
                ("D".into(), 2),
            ],
            // alpha: A,B  beta: B,C  gamma: C,D  delta: D,A
            [
                (0, 0),
                (0, 1),
                (1, 1),
                (1, 2),
                (2, 2),
                (2, 3),
                (3, 3),
                (3, 0),
            ],
        )
        .expect("square is valid")
    }

    /// Built-in scenario by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "triangle" => Some(Scenario::triangle()),
            "square" => Some(Scenario::square()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source_count(&self) -> usize {
        self.sources.len()
    }

    pub fn observer_count(&self) -> usize {
        self.observers.len()
    }

    pub fn source_name(&self, s: usize) -> &str {
        &self.sources[s]
    }

    pub fn observer_name(&self, o: usize) -> &str {
        &self.observers[o]
    }

    pub fn observer_names(&self) -> &[String] {
        &self.observers
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, source: usize, observer: usize) -> bool {
        self.edges.contains(&(source, observer))
    }

    /// Sources feeding observer `o`, in increasing order.
    pub fn sources_of(&self, o: usize) -> &[usize] {
        &self.sources_of[o]
    }

    /// Observers fed by source `s`, in increasing order.
    pub fn observers_of(&self, s: usize) -> &[usize] {
        &self.observers_of[s]
    }

    /// Whether two observers share at least one source.
    pub fn share_source(&self, a: usize, b: usize) -> bool {
        self.sources_of[a]
            .iter()
            .any(|s| self.sources_of[b].contains(s))
    }

    /// Shape of the joint-outcome vector.
    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Number of joint outcomes `N = n_1 ... n_|J|`.
    pub fn joint_len(&self) -> usize {
        self.shape.len()
    }

    pub fn observer_index(&self, name: &str) -> Option<usize> {
        self.observers.iter().position(|n| n == name)
    }

    /// Concatenated observer names of a subset, e.g. `"AC"`.
    pub fn observers_label(&self, subset: &[usize]) -> String {
        subset.iter().map(|&o| self.observers[o].as_str()).collect()
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (", self.name)?;
        for (i, o) in self.observers.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let srcs: Vec<&str> = self.sources_of[i]
                .iter()
                .map(|&s| self.sources[s].as_str())
                .collect();
            write!(f, "{o}[{}]<-{{{}}}", self.outcomes[i], srcs.join(","))?;
        }
        write!(f, ")")
    }
}

fn check_unique(names: &[String]) -> Result<(), ScenarioError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(ScenarioError::DuplicateName(n.clone()));
        }
    }
    Ok(())
}
