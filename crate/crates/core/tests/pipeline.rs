use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use isafe::error::Error;
use isafe::intervention::OperatorKind;
use isafe::metrics::MetricKind;
use isafe::pipeline::config::{AdapterConfig, AuditConfig, ModelConfig, PathsConfig, SyntheticParams};
use isafe::pipeline::report::{emit_report, SeedKey};
use isafe::pipeline::run::{run_audit, run_audit_with, row_keys, AuditInputs};
use isafe::pipeline::synth::{synthetic_inputs, write_synthetic_bundle, SynthSpec};
use isafe::scoring::ReadSet;
use isafe::stats::BootstrapConfig;

fn small_config(adapter: AdapterConfig, seeds: Vec<u64>) -> AuditConfig {
    let mut config = AuditConfig::new(
        PathsConfig {
            audit_set: "audit_set.jsonl".into(),
            priors: "priors.jsonl".into(),
            class_table: Some("class_table.json".into()),
            output_dir: None,
        },
        vec![ModelConfig {
            id: "m".into(),
            seeds,
            adapter,
        }],
    );
    config.bootstrap = BootstrapConfig {
        replicates: 20,
        confidence: 0.9,
        boot_seed: 1,
    };
    config
}

fn mixed() -> AdapterConfig {
    AdapterConfig::Synthetic(SyntheticParams {
        read_set: ReadSet::Mixed,
        alpha: 1.0,
        beta: 0.2,
        noise_sigma: 0.05,
    })
}

fn bundle(dir: &Path, n: usize, labels: bool) {
    let mut spec = SynthSpec::new(n, 24, 5, 3);
    spec.labels = labels;
    write_synthetic_bundle(&spec, dir).unwrap();
}

#[test]
fn report_covers_every_combination() {
    let inputs = synthetic_inputs(&SynthSpec::new(40, 24, 5, 1)).unwrap();
    let config = small_config(mixed(), vec![0, 1]);
    let report = run_audit_with(&config, &inputs).unwrap();
    // 2 seeds + aggregate, 3 operator groups, 2 classes, 3 metrics on one grid.
    assert_eq!(row_keys(&report, "m").len(), 3 * 3 * 2 * 3);
    assert_eq!(report.rows.len(), 3 * 3 * 2 * 3);
    assert_eq!(report.contrasts.len(), 3 * 3 * 3);
    assert!(report.auroc.is_empty());
    assert_eq!(report.coverage.retained, 40);
    for c in &report.contrasts {
        assert_eq!(c.delta, c.spurious - c.mechanistic);
        assert!(c.lower <= c.upper);
    }
    let agg = report.find_contrast("m", SeedKey::All, "all", "WCM", "-").unwrap();
    let seeds: Vec<f64> = [0, 1]
        .iter()
        .map(|&s| report.find_row("m", SeedKey::Seed(s), "all", "spurious", "WCM", "-").unwrap().value)
        .collect();
    let spur = report.find_row("m", SeedKey::All, "all", "spurious", "WCM", "-").unwrap();
    assert!((spur.value - (seeds[0] + seeds[1]) / 2.0).abs() < 1e-15);
    assert_eq!(agg.spurious, spur.value);
}

#[test]
fn runs_are_reproducible_and_seed_sensitive() {
    let inputs = synthetic_inputs(&SynthSpec::new(30, 20, 4, 2)).unwrap();
    let mut config = small_config(mixed(), vec![0]);
    let a = run_audit_with(&config, &inputs).unwrap();
    let b = run_audit_with(&config, &inputs).unwrap();
    assert_eq!(a, b);
    config.master_seed = 99;
    let c = run_audit_with(&config, &inputs).unwrap();
    assert_ne!(a.rows, c.rows);
}

#[test]
fn labels_add_auroc_rows() {
    let dir = tempfile::tempdir().unwrap();
    bundle(dir.path(), 60, true);
    let mut config = AuditConfig::load(&dir.path().join("config.toml")).unwrap();
    config.models[0].seeds = vec![0, 1];
    config.bootstrap.replicates = 10;
    let report = run_audit(&config).unwrap();
    assert_eq!(report.auroc.len(), 3);
    for r in &report.auroc {
        assert!((0.0..=1.0).contains(&r.value));
    }
    let out = dir.path().join("out");
    emit_report(&report, &out).unwrap();
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["auroc"].as_array().unwrap().len(), 3);
    assert_eq!(summary["coverage"]["retained"], 60);
}

#[test]
fn partial_labels_are_rejected() {
    let mut inputs = synthetic_inputs(&SynthSpec::new(10, 20, 4, 2)).unwrap();
    inputs.records[3].label = Some(1);
    let err = run_audit_with(&small_config(mixed(), vec![0]), &inputs).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn unrealizable_records_are_dropped_and_counted() {
    let mut inputs = synthetic_inputs(&SynthSpec::new(12, 20, 4, 2)).unwrap();
    inputs.priors[0].indices = (0..15).collect();
    inputs.priors.pop();
    let report = run_audit_with(&small_config(mixed(), vec![0]), &inputs).unwrap();
    assert_eq!(report.coverage.not_realizable, 1);
    assert_eq!(report.coverage.missing_prior, 1);
    assert_eq!(report.coverage.retained, 10);
}

fn assert_matches_reference(dir: &Path, adapter: AdapterConfig, expected: &AuditConfig) {
    let mut config = AuditConfig::load(&dir.join("config.toml")).unwrap();
    config.models[0].adapter = adapter;
    config.models[0].seeds = expected.models[0].seeds.clone();
    config.operators = vec![OperatorKind::Mask];
    config.metrics = vec![MetricKind::Wcm];
    config.bootstrap.replicates = 5;
    let external = run_audit(&config).unwrap();
    let reference = run_audit(expected).unwrap();
    assert_eq!(external.rows, reference.rows);
}

const COUNT_X: &str = r#"{
  n = split($0, parts, "\"")
  for (i = 1; i < n; i++) {
    if (parts[i] == "pair_id") id = parts[i + 2]
    if (parts[i] == "variant") v = parts[i + 2]
    if (parts[i] == "sequence") s = parts[i + 2]
  }
  x = gsub(/X/, "", s)
  printf "%s,%s,%d\n", id, v, x + length(s) % 7
}"#;

/// Audit scored by an awk script: X count plus unmasked length mod 7.
fn count_x_reference(dir: &Path) -> AuditConfig {
    let mut config = AuditConfig::load(&dir.join("config.toml")).unwrap();
    fs::write(dir.join("score.awk"), COUNT_X).unwrap();
    config.models[0].adapter = AdapterConfig::Subprocess {
        program: "awk".into(),
        args: vec!["-f".into(), "score.awk".into()],
    };
    config.models[0].seeds = vec![0];
    config.operators = vec![OperatorKind::Mask];
    config.metrics = vec![MetricKind::Wcm];
    config.bootstrap.replicates = 5;
    config
}

#[test]
fn subprocess_adapter_scores_through_a_child_process() {
    let dir = tempfile::tempdir().unwrap();
    bundle(dir.path(), 15, false);
    let config = count_x_reference(dir.path());
    let report = run_audit(&config).unwrap();
    // Masking always adds X symbols, so no profile is degenerate.
    assert!(report.rows.iter().all(|r| !r.degenerate));
}

#[test]
fn file_exchange_adapter_round_trips_with_a_responder() {
    let dir = tempfile::tempdir().unwrap();
    bundle(dir.path(), 15, false);
    let reference = count_x_reference(dir.path());
    let request = dir.path().join("request.jsonl");
    let response = dir.path().join("response.csv");

    let stop = Arc::new(AtomicBool::new(false));
    let responder = {
        let (request, response, stop) = (request.clone(), response.clone(), stop.clone());
        thread::spawn(move || {
            while !stop.load(Ordering::Relaxed) {
                if let Ok(text) = fs::read_to_string(&request) {
                    fs::remove_file(&request).unwrap();
                    let mut out = String::from("pair_id,variant,score\n");
                    for line in text.lines() {
                        let item: serde_json::Value = serde_json::from_str(line).unwrap();
                        let seq = item["sequence"].as_str().unwrap();
                        let x = seq.chars().filter(|&c| c == 'X').count();
                        let rest = seq.len() - x;
                        out.push_str(&format!("{},{},{}\n", item["pair_id"].as_str().unwrap(), item["variant"].as_str().unwrap(), x + rest % 7));
                    }
                    let tmp = response.with_extension("tmp");
                    fs::write(&tmp, out).unwrap();
                    fs::rename(&tmp, &response).unwrap();
                }
                thread::sleep(Duration::from_millis(5));
            }
        })
    };
    assert_matches_reference(
        dir.path(),
        AdapterConfig::FileExchange {
            request_path: "request.jsonl".into(),
            response_path: "response.csv".into(),
            poll_interval_ms: 5,
            timeout_ms: 20_000,
        },
        &reference,
    );
    stop.store(true, Ordering::Relaxed);
    responder.join().unwrap();
}

#[test]
fn file_exchange_times_out_without_a_responder() {
    let dir = tempfile::tempdir().unwrap();
    bundle(dir.path(), 5, false);
    let mut config = AuditConfig::load(&dir.path().join("config.toml")).unwrap();
    config.models[0].adapter = AdapterConfig::FileExchange {
        request_path: "request.jsonl".into(),
        response_path: "response.csv".into(),
        poll_interval_ms: 5,
        timeout_ms: 50,
    };
    let err = run_audit(&config).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(matches!(err, Error::Provenance { .. }), "{err:?}");
}

#[test]
fn failing_subprocess_is_an_adapter_error_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    bundle(dir.path(), 5, false);
    let mut config = AuditConfig::load(&dir.path().join("config.toml")).unwrap();
    config.models[0].adapter = AdapterConfig::Subprocess {
        program: "sh".into(),
        args: vec!["-c".into(), "cat > /dev/null; exit 3".into()],
    };
    let err = run_audit(&config).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    match err {
        Error::Provenance { model, seed, .. } => assert_eq!((model.as_str(), seed.as_str()), ("synthetic", "0")),
        other => panic!("{other:?}"),
    }

    config.models[0].adapter = AdapterConfig::Subprocess {
        program: "sh".into(),
        args: vec!["-c".into(), "cat > /dev/null; echo not,a,number".into()],
    };
    assert_eq!(run_audit(&config).unwrap_err().exit_code(), 3);
}

#[test]
fn degenerate_rows_for_oracle_models() {
    let inputs = synthetic_inputs(&SynthSpec::new(20, 20, 4, 5)).unwrap();
    let config = small_config(
        AdapterConfig::Synthetic(SyntheticParams {
            read_set: ReadSet::PriorOnly,
            alpha: 1.0,
            beta: 0.0,
            noise_sigma: 0.0,
        }),
        vec![0],
    );
    let report = run_audit_with(&config, &inputs).unwrap();
    for r in &report.rows {
        assert_eq!(r.degenerate, r.class == "spurious", "{r:?}");
        if r.degenerate {
            assert_eq!(r.value, 0.0);
        }
    }
}

#[test]
fn loaded_inputs_match_generated_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec::new(25, 30, 6, 4);
    write_synthetic_bundle(&spec, dir.path()).unwrap();
    let config = AuditConfig::load(&dir.path().join("config.toml")).unwrap();
    let loaded = AuditInputs::load(&config).unwrap();
    let generated = synthetic_inputs(&spec).unwrap();
    assert_eq!(loaded.records, generated.records);
    assert_eq!(loaded.priors, generated.priors);
}
