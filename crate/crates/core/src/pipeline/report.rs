//! On-disk layout of a run: `run.json`, `records/<bitstring>.json`,
//! `summary.csv` and `report.txt`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;

use super::{render_stages, ClassificationRecord, PipelineError, Stage};

pub const RECORDS_DIR: &str = "records";

fn io_err(path: &Path, e: impl ToString) -> PipelineError {
    PipelineError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Write through a temporary file so an interrupted run never leaves a
/// truncated record behind.
fn write_atomic(path: &Path, contents: &str) -> Result<(), PipelineError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct RunInfo {
    scenario: String,
    outcomes: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl RunInfo {
    fn of(scenario: &Scenario) -> Self {
        RunInfo {
            scenario: scenario.name().to_string(),
            outcomes: scenario.outcomes().to_vec(),
            edges: scenario.edges().iter().copied().collect(),
        }
    }
}

pub(super) struct Store {
    dir: PathBuf,
}

impl Store {
    pub(super) fn open(
        dir: &Path,
        scenario: &Scenario,
        resume: bool,
    ) -> Result<Self, PipelineError> {
        let records = dir.join(RECORDS_DIR);
        fs::create_dir_all(&records).map_err(|e| io_err(&records, e))?;
        let info = RunInfo::of(scenario);
        let info_path = dir.join("run.json");
        if resume && info_path.exists() {
            let text = fs::read_to_string(&info_path).map_err(|e| io_err(&info_path, e))?;
            let found: RunInfo =
                serde_json::from_str(&text).map_err(|e| PipelineError::BadRecord {
                    path: info_path.clone(),
                    message: e.to_string(),
                })?;
            if found != info {
                return Err(PipelineError::RunMismatch {
                    expected: info.scenario,
                    found: found.scenario,
                });
            }
        }
        if !resume {
            for entry in fs::read_dir(&records).map_err(|e| io_err(&records, e))? {
                let path = entry.map_err(|e| io_err(&records, e))?.path();
                if path.extension().is_some_and(|x| x == "json" || x == "tmp") {
                    fs::remove_file(&path).map_err(|e| io_err(&path, e))?;
                }
            }
        }
        let json = serde_json::to_string_pretty(&info).expect("serializable") + "\n";
        write_atomic(&info_path, &json)?;
        Ok(Store {
            dir: dir.to_path_buf(),
        })
    }

    fn record_path(&self, representative: &str) -> PathBuf {
        self.dir
            .join(RECORDS_DIR)
            .join(format!("{representative}.json"))
    }

    /// The stored record for the same orbit, if there is one.
    pub(super) fn load(
        &self,
        fresh: &ClassificationRecord,
    ) -> Result<Option<ClassificationRecord>, PipelineError> {
        let path = self.record_path(&fresh.representative);
        if !path.exists() {
            return Ok(None);
        }
        let r = read_record(&path)?;
        if r.representative != fresh.representative || r.orbit_size != fresh.orbit_size {
            return Err(PipelineError::BadRecord {
                path,
                message: "record does not match its orbit".into(),
            });
        }
        Ok(Some(r))
    }

    pub(super) fn write_record(&self, record: &ClassificationRecord) -> Result<(), PipelineError> {
        let json = serde_json::to_string_pretty(record).expect("serializable") + "\n";
        write_atomic(&self.record_path(&record.representative), &json)
    }

    pub(super) fn write_reports(
        &self,
        summary: &Summary,
        records: &[ClassificationRecord],
    ) -> Result<(), PipelineError> {
        write_atomic(&self.dir.join("summary.csv"), &summary_csv(records))?;
        write_atomic(&self.dir.join("report.txt"), &summary.render())
    }
}

fn read_record(path: &Path) -> Result<ClassificationRecord, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::BadRecord {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Every record of a run directory, by representative.
pub fn load_records(dir: &Path) -> Result<Vec<ClassificationRecord>, PipelineError> {
    let records = dir.join(RECORDS_DIR);
    let mut paths: Vec<PathBuf> = fs::read_dir(&records)
        .map_err(|e| io_err(&records, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| read_record(p)).collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn summary_csv(records: &[ClassificationRecord]) -> String {
    let mut out = String::from("representative,literal,orbit_size,label,witness\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.representative,
            csv_field(&r.literal),
            r.orbit_size,
            r.label,
            csv_field(r.witness.as_deref().unwrap_or(""))
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryRow {
    pub label: String,
    pub orbits: usize,
    pub patterns: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    pub scenario: String,
    pub stages: String,
    pub orbits: usize,
    pub patterns: usize,
    /// In the order the deciding stages ran; undecided labels last.
    pub rows: Vec<SummaryRow>,
    /// Some undecided orbit ran out of budget somewhere.
    pub budget_partial: bool,
}

impl Summary {
    pub fn new(scenario: &Scenario, stages: &[Stage], records: &[ClassificationRecord]) -> Self {
        let names: Vec<String> = stages.iter().map(Stage::to_string).collect();
        let mut keyed: Vec<((usize, String), usize, usize)> = Vec::new();
        for r in records {
            let pos = r
                .witness
                .as_ref()
                .and_then(|w| names.iter().position(|n| n == w))
                .unwrap_or(usize::MAX);
            let key = (pos, r.label.clone());
            match keyed.iter_mut().find(|(k, _, _)| *k == key) {
                Some((_, o, p)) => {
                    *o += 1;
                    *p += r.orbit_size;
                }
                None => keyed.push((key, 1, r.orbit_size)),
            }
        }
        keyed.sort();
        Summary {
            scenario: scenario.name().to_string(),
            stages: render_stages(stages),
            orbits: records.len(),
            patterns: records.iter().map(|r| r.orbit_size).sum(),
            rows: keyed
                .into_iter()
                .map(|((_, label), orbits, patterns)| SummaryRow {
                    label,
                    orbits,
                    patterns,
                })
                .collect(),
            budget_partial: records.iter().any(|r| !r.is_resolved() && r.hit_budget()),
        }
    }

    /// Orbits carrying exactly this label.
    pub fn count(&self, label: &str) -> usize {
        self.rows
            .iter()
            .filter(|r| r.label == label)
            .map(|r| r.orbits)
            .sum()
    }

    /// Orbits whose label starts with `kind`, e.g. `local`.
    pub fn count_kind(&self, kind: &str) -> usize {
        self.rows
            .iter()
            .filter(|r| r.label == kind || r.label.starts_with(&format!("{kind}@")))
            .map(|r| r.orbits)
            .sum()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario  {}", self.scenario);
        let _ = writeln!(out, "stages    {}", self.stages);
        let _ = writeln!(out, "orbits    {}", self.orbits);
        let _ = writeln!(out, "patterns  {}", self.patterns);
        let _ = writeln!(out);
        let width = self
            .rows
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(0)
            .max(5);
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>8}",
            "label", "orbits", "patterns"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>6}  {:>8}",
                r.label, r.orbits, r.patterns
            );
        }
        out
    }
}
