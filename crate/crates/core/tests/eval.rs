mod common;

use std::collections::BTreeMap;
use std::path::Path;

use common::write_split;
use kbreason::backends::{BackendSpec, FixtureStore, PlannerKind, TranslatorKind};
use kbreason::data;
use kbreason::datasets::{BucketFiles, NoiseConfig, Setting, SplitManifest};
use kbreason::eval::{
    evaluate, evaluate_with, expand_grid, sweep, EvalBackends, MetricsReport, RunConfig,
};
use kbreason::prover::{RetrievalStrategy, SuccessCriterion};
use serde_json::json;

fn config(manifest: &Path) -> RunConfig {
    let mut cfg = RunConfig::new(manifest);
    cfg.prompt.strategy = RetrievalStrategy::RelationMatch;
    cfg.workers = Some(2);
    cfg
}

/// Recounts successes from the per-query records, independently of the rows.
fn recount(report: &MetricsReport, bucket: &str, k: usize) -> (usize, usize, usize) {
    let records: Vec<_> = report.queries.iter().filter(|q| q.bucket == bucket).collect();
    let reach = records
        .iter()
        .filter(|q| q.prompts.iter().take(k).any(|p| p.reach))
        .count();
    let verified = records
        .iter()
        .filter(|q| q.prompts.iter().take(k).any(|p| p.verified))
        .count();
    (records.len(), reach, verified)
}

fn check_consistency(report: &MetricsReport) {
    for row in &report.rows {
        let (attempts, reach, verified) = recount(report, &row.bucket, row.k);
        assert_eq!(row.attempts, attempts);
        assert_eq!(row.reach_successes, reach);
        assert_eq!(row.verified_successes, verified);
        if attempts > 0 {
            assert_eq!(row.reach_rate, Some(reach as f64 / attempts as f64));
            assert_eq!(row.verified_rate, Some(verified as f64 / attempts as f64));
        }
        assert!(row.verified_successes <= row.reach_successes);
    }
    let total: usize = report.buckets.iter().map(|b| b.queries).sum();
    assert_eq!(total, report.queries.len());
}

#[test]
fn oracle_and_replay_reach_every_query() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_split(dir.path(), vec![2, 5, 8], 6, 13);
    let mut cfg = config(&manifest);
    cfg.backend = BackendSpec {
        planner: PlannerKind::Oracle,
        translator: TranslatorKind::Exact,
        ..BackendSpec::default()
    };
    let fixtures = dir.path().join("fixtures.json");
    let store = FixtureStore::open(&fixtures).unwrap();
    let recorded = evaluate_with(&cfg, &EvalBackends::Recording(store.clone())).unwrap();
    store.save().unwrap();
    cfg.backend.planner = PlannerKind::Replay;
    cfg.backend.fixtures = Some(fixtures);
    let replayed = evaluate(&cfg).unwrap();
    for report in [&recorded, &replayed] {
        check_consistency(report);
        for row in &report.rows {
            assert_eq!(row.reach_rate, Some(1.0), "{}", row.bucket);
            assert_eq!(row.verified_rate, Some(1.0), "{}", row.bucket);
            assert_eq!(row.mean_steps, Some(row.bucket.parse::<f64>().unwrap()));
        }
    }
    assert_eq!(recorded.rows, replayed.rows);
}

#[test]
fn noisy_run_is_consistent_and_monotone_in_k() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_split(dir.path(), vec![5], 20, 4);
    let mut cfg = config(&manifest);
    cfg.noise = NoiseConfig { rate: 0.2, base: 5000, seed: 1 };
    let report = evaluate(&cfg).unwrap();
    check_consistency(&report);
    for q in &report.queries {
        let mut prev = false;
        for k in [1, 3, 5, 10] {
            let now = q.reach_at(k);
            assert!(!prev || now);
            prev = now;
        }
    }
    let rates: Vec<f64> = report.rows.iter().map(|r| r.reach_rate.unwrap()).collect();
    assert!(rates.windows(2).all(|w| w[0] <= w[1]), "{rates:?}");
    assert_eq!(report.buckets[0].injected_facts, 1000);
}

#[test]
fn reports_are_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_split(dir.path(), vec![3, 6], 8, 2);
    let mut cfg = config(&manifest);
    cfg.noise.rate = 0.1;
    let a = evaluate(&cfg).unwrap();
    cfg.workers = Some(5);
    let b = evaluate(&cfg).unwrap();
    cfg.workers = Some(2);
    let c = evaluate(&cfg).unwrap();
    assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    assert_eq!(a.to_csv().unwrap(), c.to_csv().unwrap());
    assert_eq!(a.to_json().unwrap(), c.to_json().unwrap());
}

#[test]
fn empty_query_set_reports_zero_attempts() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("schema.json"), data::KINSHIP_SCHEMA_JSON).unwrap();
    std::fs::write(p.join("composition.json"), data::KINSHIP_COMPOSITION_JSON).unwrap();
    std::fs::write(p.join("kb.tsv"), "Joseph\tbrother\tDale\n").unwrap();
    std::fs::write(p.join("queries.tsv"), "").unwrap();
    let manifest = SplitManifest {
        dataset: "custom".into(),
        seed: 0,
        setting: Setting::TestFacts,
        lengths: Vec::new(),
        counts: BTreeMap::new(),
        noise: NoiseConfig::default(),
        noise_sampling: "vocab-uniform".into(),
        schema: "schema.json".into(),
        composition: "composition.json".into(),
        library: None,
        pooled_facts: None,
        removal_scheme: BTreeMap::new(),
        rejected: BTreeMap::new(),
        buckets: vec![BucketFiles {
            name: "empty".into(),
            kb: Some("kb.tsv".into()),
            queries: Some("queries.tsv".into()),
            ..BucketFiles::default()
        }],
    };
    manifest.save(&p.join("manifest.json")).unwrap();
    let report = evaluate(&config(&p.join("manifest.json"))).unwrap();
    assert_eq!(report.rows.len(), 4);
    assert!(report.rows.iter().all(|r| r.attempts == 0 && r.reach_rate.is_none()));
    let csv = report.to_csv().unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",0,NA,NA,NA,NA,0"));
}

#[test]
fn pivot_has_hops_rows_and_k_columns() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_split(dir.path(), (5..=10).collect(), 3, 6);
    let report = evaluate(&config(&manifest)).unwrap();
    let pivot = report.pivot();
    let lines: Vec<&str> = pivot.lines().collect();
    assert_eq!(lines.len(), 7);
    let header: Vec<&str> = lines[0].split('|').map(str::trim).collect();
    assert_eq!(header, ["Test Reasoning Length", "K=1", "K=3", "K=5", "K=10", "Avg"]);
    for (line, hops) in lines[1..].iter().zip(5..=10) {
        let cells: Vec<&str> = line.split('|').map(str::trim).collect();
        assert_eq!(cells[0], format!("{hops} Hops"));
        let values: Vec<f64> = cells[1..5].iter().map(|c| c.parse().unwrap()).collect();
        let avg: f64 = cells[5].parse().unwrap();
        assert!((avg - values.iter().sum::<f64>() / 4.0).abs() < 1e-4);
    }
}

#[test]
fn sweep_over_templates_and_noise() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_split(dir.path(), vec![4], 12, 3);
    let mut base = config(&manifest);
    base.k_values = vec![1];
    let mut grid = BTreeMap::new();
    grid.insert("prompt.n".to_string(), vec![json!(1), json!(2), json!(3)]);
    let report = sweep(&expand_grid(&base, &grid).unwrap()).unwrap();
    let csv = report.to_csv().unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("prompt.n,bucket,K,N,"));
    for (line, n) in lines[1..].iter().zip(1..) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], n.to_string());
        assert_eq!(fields[3], n.to_string());
    }

    let mut grid = BTreeMap::new();
    grid.insert("noise.rate".to_string(), vec![json!(0.0), json!(0.5), json!(1.0)]);
    let cells = expand_grid(&base, &grid).unwrap();
    let report = sweep(&cells).unwrap();
    let injected: Vec<usize> = report
        .outcomes
        .iter()
        .map(|o| o.report.as_ref().unwrap_or_else(|| panic!("{}", o.error.as_deref().unwrap_or(""))).rows[0].injected_facts)
        .collect();
    assert_eq!(injected, vec![0, 2500, 5000]);
    assert_eq!(report.to_csv().unwrap(), sweep(&cells).unwrap().to_csv().unwrap());
}

#[test]
fn verified_criterion_never_exceeds_reach() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_split(dir.path(), vec![4], 10, 12);
    let mut cfg = config(&manifest);
    cfg.success = SuccessCriterion::Verified;
    cfg.noise.rate = 0.3;
    cfg.setting = Some(Setting::AllFacts);
    let report = evaluate(&cfg).unwrap();
    check_consistency(&report);
    for row in &report.rows {
        assert!(row.verified_rate.unwrap() <= row.reach_rate.unwrap());
    }
}
