use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use netposs::examples::triangle_fixture;
use netposs::pipeline::{
    classify, load_records, parse_stages, verify_witness, ClassificationRecord, PipelineConfig,
    Verdict,
};
use netposs::scenario::Scenario;
use netposs::symmetry::RelabelingGroup;

fn triangle_config(out: Option<&Path>) -> PipelineConfig {
    let mut c = PipelineConfig::new(Scenario::triangle()).unwrap();
    c.out = out.map(Path::to_path_buf);
    c
}

fn record_of<'a>(records: &'a [ClassificationRecord], fixture: &str) -> &'a ClassificationRecord {
    let tri = Scenario::triangle();
    let rep = RelabelingGroup::new(&tri)
        .canonical(&triangle_fixture(fixture).unwrap())
        .unwrap()
        .to_bitstring();
    records.iter().find(|r| r.representative == rep).unwrap()
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for sub in [dir.to_path_buf(), dir.join("records")] {
        for e in fs::read_dir(&sub).unwrap() {
            let p = e.unwrap().path();
            if p.is_file() {
                let key = p.strip_prefix(dir).unwrap().display().to_string();
                out.insert(key, fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn triangle_classification() {
    let tri = Scenario::triangle();
    let outcome = classify(&triangle_config(None)).unwrap();
    let s = &outcome.summary;
    assert_eq!((s.orbits, s.patterns), (21, 255));
    assert_eq!(s.count("local@2"), 17);
    assert_eq!(s.count("signaling-enabling@ring@6"), 3);
    assert_eq!(s.count("not-local-N-unknown@spiral"), 1);
    assert!(!s.budget_partial);

    for f in ["P2", "P3", "P4"] {
        assert_eq!(
            record_of(&outcome.records, f).label,
            "signaling-enabling@ring@6",
            "{f}"
        );
    }
    let p5 = record_of(&outcome.records, "P5");
    assert_eq!(p5.label, "not-local-N-unknown@spiral");
    for stage in ["ring@6", "ring@9", "ring@12"] {
        assert_eq!(p5.verdict(stage), Some(&Verdict::Consistent), "{stage}");
    }
    for r in &outcome.records {
        verify_witness(&tri, r).unwrap();
    }
}

#[test]
fn every_local_witness_is_a_verified_model() {
    let tri = Scenario::triangle();
    let outcome = classify(&triangle_config(None)).unwrap();
    for r in outcome
        .records
        .iter()
        .filter(|r| r.label.starts_with("local@"))
    {
        let w = r.witness_verdict().unwrap();
        assert!(
            matches!(w.verdict, Verdict::Local { k: 2, .. }),
            "{}",
            r.literal
        );
        verify_witness(&tri, r).unwrap();
    }
}

#[test]
fn tampered_records_fail_verification() {
    let tri = Scenario::triangle();
    let outcome = classify(&triangle_config(None)).unwrap();
    let mut local = outcome
        .records
        .iter()
        .find(|r| r.label.starts_with("local@") && r.orbit_size > 1)
        .unwrap()
        .clone();
    let other = outcome
        .records
        .iter()
        .find(|r| r.representative != local.representative)
        .unwrap();
    local.representative = other.representative.clone();
    assert!(verify_witness(&tri, &local).is_err());
}

#[test]
fn rerun_and_resume_are_byte_identical() {
    let fresh = tempfile::tempdir().unwrap();
    classify(&triangle_config(Some(fresh.path()))).unwrap();
    let first = snapshot(fresh.path());
    assert_eq!(
        first.keys().filter(|k| k.starts_with("records")).count(),
        21
    );

    let mut again = triangle_config(Some(fresh.path()));
    again.resume = true;
    classify(&again).unwrap();
    assert_eq!(snapshot(fresh.path()), first);

    // interrupted after three stages, then resumed with the full list
    let staged = tempfile::tempdir().unwrap();
    let mut partial = triangle_config(Some(staged.path()));
    partial.stages = parse_stages("sat-local@2,sat-local@6,ring@6").unwrap();
    let early = classify(&partial).unwrap();
    assert_eq!(early.summary.count("unknown"), 1);
    let mut rest = triangle_config(Some(staged.path()));
    rest.resume = true;
    classify(&rest).unwrap();
    assert_eq!(snapshot(staged.path()), first);
    assert_eq!(load_records(staged.path()).unwrap().len(), 21);
}

#[test]
fn adding_stages_only_resolves_unknowns() {
    let full = classify(&triangle_config(None)).unwrap();
    let mut short = triangle_config(None);
    short.stages = parse_stages("sat-local@2,ring@6").unwrap();
    let short = classify(&short).unwrap();
    for (a, b) in short.records.iter().zip(&full.records) {
        assert_eq!(a.representative, b.representative);
        if a.is_resolved() {
            assert_eq!(a.label, b.label);
        }
        for sv in &a.stages {
            assert_eq!(b.verdict(&sv.stage).unwrap_or(&sv.verdict), &sv.verdict);
        }
    }
}

#[test]
fn resume_rejects_another_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = triangle_config(Some(dir.path()));
    c.stages = parse_stages("sat-local@1").unwrap();
    classify(&c).unwrap();
    let mut sq = PipelineConfig::new(Scenario::square()).unwrap();
    sq.stages = parse_stages("factorization").unwrap();
    sq.out = Some(dir.path().to_path_buf());
    sq.resume = true;
    assert!(classify(&sq).is_err());
}

#[test]
fn stage_without_inflation_rejected() {
    // the spiral is built for the triangle only
    let mut sq = PipelineConfig::new(Scenario::square()).unwrap();
    sq.stages = parse_stages("spiral").unwrap();
    assert!(classify(&sq).is_err());
}
