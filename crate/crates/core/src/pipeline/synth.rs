//! Synthetic audit sets for demos and pinned experiments.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{AdapterConfig, AuditConfig, ModelConfig, PathsConfig, SyntheticParams};
use super::report::format_real;
use super::run::{build_pairs, AuditInputs};
use crate::error::{Error, Result};
use crate::intervention::{filter_auditing_set, Alphabet, AuditRecord, ClassTable, OperatorSpec, StructuralPrior};
use crate::rng::{derive_seed, SplitMix64};
use crate::scoring::{score_matched_pairs, PerturbationClass, ReadSet, SyntheticAdapter};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub n_records: usize,
    pub seq_len: usize,
    pub prior_size: usize,
    #[serde(default)]
    pub seed: u64,
    /// Attach 0/1 labels that track the model's original score.
    #[serde(default)]
    pub labels: bool,
    #[serde(default = "default_model")]
    pub model: SyntheticParams,
    #[serde(default = "default_seeds")]
    pub model_seeds: Vec<u64>,
}

fn default_model() -> SyntheticParams {
    SyntheticParams {
        read_set: ReadSet::Mixed,
        alpha: 1.0,
        beta: 0.1,
        noise_sigma: 0.05,
    }
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2, 3, 4]
}

impl SynthSpec {
    pub fn new(n_records: usize, seq_len: usize, prior_size: usize, seed: u64) -> Self {
        Self {
            n_records,
            seq_len,
            prior_size,
            seed,
            labels: false,
            model: default_model(),
            model_seeds: default_seeds(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_records == 0 {
            return Err(Error::Config("n_records must be positive".into()));
        }
        if self.seq_len < 2 {
            return Err(Error::Config("seq_len must be at least 2".into()));
        }
        if self.prior_size == 0 || 2 * self.prior_size > self.seq_len {
            return Err(Error::Config(format!(
                "prior_size must be in 1..={} for seq_len {}",
                self.seq_len / 2,
                self.seq_len
            )));
        }
        if self.model_seeds.is_empty() {
            return Err(Error::Config("model_seeds is empty".into()));
        }
        self.model.spec(0).validate()
    }
}

/// Random sequences over the default alphabet with random prior subsets.
pub fn generate_records(spec: &SynthSpec) -> Result<(Vec<AuditRecord>, Vec<StructuralPrior>)> {
    spec.validate()?;
    let alphabet = Alphabet::default();
    let symbols: Vec<char> = alphabet.symbols().collect();
    let width = spec.n_records.to_string().len().max(5);
    let mut records = Vec::with_capacity(spec.n_records);
    let mut priors = Vec::with_capacity(spec.n_records);
    for i in 0..spec.n_records {
        let mut rng = SplitMix64::new(derive_seed(&[spec.seed, i as u64]));
        let seq: String = (0..spec.seq_len).map(|_| symbols[rng.next_index(symbols.len())]).collect();
        let mut positions: Vec<usize> = (0..spec.seq_len).collect();
        for k in 0..spec.prior_size {
            let j = k + rng.next_index(positions.len() - k);
            positions.swap(k, j);
        }
        let id = format!("pair{i:0width$}");
        records.push(AuditRecord::new(&id, format!("ligand{}", i % 17), &seq, &alphabet)?);
        priors.push(StructuralPrior::new(id, positions[..spec.prior_size].iter().copied()));
    }
    if spec.labels {
        attach_labels(spec, &mut records, &priors)?;
    }
    Ok((records, priors))
}

/// Label 1 when the first model seed scores above the median, with 10% of
/// labels flipped.
fn attach_labels(spec: &SynthSpec, records: &mut [AuditRecord], priors: &[StructuralPrior]) -> Result<()> {
    let model = spec.model.spec(spec.model_seeds[0]);
    let scores: Vec<f64> = records
        .iter()
        .zip(priors)
        .map(|(r, p)| crate::scoring::synthetic_score(&model, &r.pair_id, &r.sequence, &p.indices, 'X'))
        .collect();
    let mut sorted = scores.clone();
    sorted.sort_by(f64::total_cmp);
    let median = crate::metrics::empirical_quantile(&sorted, 0.5)?;
    let mut rng = SplitMix64::new(derive_seed(&[spec.seed, 0x1abe1]));
    for (r, s) in records.iter_mut().zip(scores) {
        let mut label = u8::from(s > median);
        if rng.next_f64() < 0.1 {
            label = 1 - label;
        }
        r.label = Some(label);
    }
    Ok(())
}

fn audit_set_jsonl(records: &[AuditRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let mut obj = serde_json::json!({
            "pair_id": r.pair_id,
            "context": r.context,
            "sequence": r.sequence_string(),
        });
        if let Some(l) = r.label {
            obj["label"] = l.into();
        }
        out.push_str(&obj.to_string());
        out.push('\n');
    }
    out
}

fn priors_jsonl(priors: &[StructuralPrior]) -> String {
    let mut out = String::new();
    for p in priors {
        out.push_str(&serde_json::to_string(p).expect("prior serializes"));
        out.push('\n');
    }
    out
}

fn score_csv(ids: &[String], scores: &[f64]) -> String {
    let mut out = String::from("pair_id,score\n");
    for (id, s) in ids.iter().zip(scores) {
        out.push_str(&format!("{id},{}\n", format_real(*s)));
    }
    out
}

/// Audit config that runs a synthetic model over the generated files.
pub fn demo_config(spec: &SynthSpec) -> AuditConfig {
    let mut config = AuditConfig::new(
        PathsConfig {
            audit_set: "audit_set.jsonl".into(),
            priors: "priors.jsonl".into(),
            class_table: Some("class_table.json".into()),
            output_dir: Some("report".into()),
        },
        vec![ModelConfig {
            id: "synthetic".into(),
            seeds: spec.model_seeds.clone(),
            adapter: AdapterConfig::Synthetic(spec.model),
        }],
    );
    config.master_seed = spec.seed;
    config
}

/// Writes a demo audit set, priors, class table, config, and mask-operator
/// score files for the first model seed.
pub fn write_synthetic_bundle(spec: &SynthSpec, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (records, priors) = generate_records(spec)?;
    let config = demo_config(spec);

    let (units, _) = filter_auditing_set(&records, &priors);
    let seed = spec.model_seeds[0];
    let op = OperatorSpec::Mask {
        token: config.mask_token,
    };
    let pairs = build_pairs(&units, &op, config.master_seed, seed)?;
    let mut adapter = SyntheticAdapter::new(spec.model.spec(seed), &priors, config.mask_token)?;
    let scores = score_matched_pairs(&mut adapter, &units, &[pairs])?;
    let mech = scores.profile(0, PerturbationClass::Mechanistic)?;
    let spur = scores.profile(0, PerturbationClass::Spurious)?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = [
        ("audit_set.jsonl", audit_set_jsonl(&records)),
        ("priors.jsonl", priors_jsonl(&priors)),
        ("class_table.json", ClassTable::default().to_json() + "\n"),
        ("config.toml", config.to_toml()),
        ("scores_original.csv", score_csv(&scores.pair_ids, &scores.original)),
        ("scores_mask_mechanistic.csv", score_csv(&scores.pair_ids, mech.perturbed())),
        ("scores_mask_spurious.csv", score_csv(&scores.pair_ids, spur.perturbed())),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = out_dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// In-memory inputs for `run_audit_with`.
pub fn synthetic_inputs(spec: &SynthSpec) -> Result<AuditInputs> {
    let (records, priors) = generate_records(spec)?;
    Ok(AuditInputs {
        records,
        priors,
        class_table: ClassTable::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_records_are_valid_and_deterministic() {
        let spec = SynthSpec::new(30, 40, 8, 5);
        let (r1, p1) = generate_records(&spec).unwrap();
        let (r2, p2) = generate_records(&spec).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(p1, p2);
        let (kept, stats) = filter_auditing_set(&r1, &p1);
        assert_eq!(kept.len(), 30);
        assert_eq!(stats.retained, 30);
        assert!(p1.iter().all(|p| p.len() == 8));
    }

    #[test]
    fn labels_have_both_classes() {
        let mut spec = SynthSpec::new(100, 30, 5, 2);
        spec.labels = true;
        let (records, _) = generate_records(&spec).unwrap();
        let pos = records.iter().filter(|r| r.label == Some(1)).count();
        assert!(pos > 20 && pos < 80, "{pos}");
    }

    #[test]
    fn rejects_unrealizable_specs() {
        assert!(generate_records(&SynthSpec::new(10, 10, 6, 0)).is_err());
        assert!(generate_records(&SynthSpec::new(0, 10, 2, 0)).is_err());
    }

    #[test]
    fn bundle_files_round_trip_through_loaders() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SynthSpec::new(12, 20, 4, 9);
        write_synthetic_bundle(&spec, dir.path()).unwrap();
        let config = AuditConfig::load(&dir.path().join("config.toml")).unwrap();
        let inputs = AuditInputs::load(&config).unwrap();
        assert_eq!(inputs.records.len(), 12);
        assert_eq!(inputs.priors.len(), 12);
        assert_eq!(inputs.class_table, ClassTable::default());
    }
}
