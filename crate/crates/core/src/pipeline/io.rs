//! JSON Lines ingestion for audit sets and priors, plus the two-column
//! score files read by `audit metrics`.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::intervention::{Alphabet, AuditRecord, ClassTable, StructuralPrior};
use crate::metrics::ResponseProfile;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine {
    pair_id: String,
    #[serde(default)]
    context: String,
    sequence: String,
    #[serde(default)]
    label: Option<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorLine {
    record_id: String,
    indices: Vec<i64>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Non-blank lines with 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub fn parse_audit_set(path: &Path, text: &str, alphabet: &Alphabet) -> Result<Vec<AuditRecord>> {
    let mut first_seen: HashMap<String, usize> = HashMap::new();
    let mut records = Vec::new();
    for (n, line) in lines(text) {
        let raw: RecordLine = serde_json::from_str(line).map_err(|e| parse_err(path, n, e.to_string()))?;
        if let Some(&first) = first_seen.get(&raw.pair_id) {
            return Err(Error::DuplicatePairId {
                pair_id: raw.pair_id,
                first,
                second: n,
            });
        }
        let mut record = AuditRecord::new(raw.pair_id.clone(), raw.context, &raw.sequence, alphabet)
            .map_err(|e| parse_err(path, n, e.to_string()))?;
        if let Some(label) = raw.label {
            match label {
                0 | 1 => record = record.with_label(label as u8),
                other => return Err(parse_err(path, n, format!("label must be 0 or 1, got {other}"))),
            }
        }
        first_seen.insert(raw.pair_id, n);
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::EmptyAuditSet(path.to_path_buf()));
    }
    Ok(records)
}

pub fn load_audit_set(path: &Path, alphabet: &Alphabet) -> Result<Vec<AuditRecord>> {
    parse_audit_set(path, &read(path)?, alphabet)
}

/// Priors are not validated against records here; see `validate_prior`.
pub fn parse_priors(path: &Path, text: &str) -> Result<Vec<StructuralPrior>> {
    let mut first_seen: HashMap<String, usize> = HashMap::new();
    let mut priors = Vec::new();
    for (n, line) in lines(text) {
        let raw: PriorLine = serde_json::from_str(line).map_err(|e| parse_err(path, n, e.to_string()))?;
        if let Some(&value) = raw.indices.iter().find(|&&i| i < 0) {
            return Err(Error::NegativeIndex {
                path: path.to_path_buf(),
                line: n,
                value,
            });
        }
        if let Some(first) = first_seen.insert(raw.record_id.clone(), n) {
            return Err(parse_err(
                path,
                n,
                format!("second prior for {} (first on line {first})", raw.record_id),
            ));
        }
        priors.push(StructuralPrior::new(raw.record_id, raw.indices.into_iter().map(|i| i as usize)));
    }
    Ok(priors)
}

pub fn load_priors(path: &Path) -> Result<Vec<StructuralPrior>> {
    parse_priors(path, &read(path)?)
}

pub fn load_class_table(path: &Path, alphabet: &Alphabet) -> Result<ClassTable> {
    let table = ClassTable::from_json(&read(path)?)?;
    table.check_covers(alphabet)?;
    Ok(table)
}

/// Reads a `pair_id,score` CSV.
pub fn load_score_csv(path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => parse_err(path, 0, format!("{other:?}")),
    })?;
    let headers = reader.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| parse_err(path, 1, format!("missing column {name}")))
    };
    let (id_col, score_col) = (col("pair_id")?, col("score")?);
    let mut out = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(path, line, e.to_string()))?;
        let id = rec.get(id_col).unwrap_or_default().trim().to_string();
        let score: f64 = rec
            .get(score_col)
            .unwrap_or_default()
            .trim()
            .parse()
            .map_err(|_| parse_err(path, line, "score is not a decimal real"))?;
        if out.insert(id.clone(), score).is_some() {
            return Err(parse_err(path, line, format!("duplicate pair_id {id}")));
        }
    }
    if out.is_empty() {
        return Err(parse_err(path, 1, "no score rows"));
    }
    Ok(out)
}

/// Aligns two score tables by `pair_id` (ascending) into a profile.
pub fn align_scores(original: &BTreeMap<String, f64>, perturbed: &BTreeMap<String, f64>) -> Result<ResponseProfile> {
    if let Some(id) = original.keys().find(|k| !perturbed.contains_key(*k)) {
        return Err(Error::Config(format!("pair_id {id} missing from perturbed scores")));
    }
    if let Some(id) = perturbed.keys().find(|k| !original.contains_key(*k)) {
        return Err(Error::Config(format!("pair_id {id} missing from original scores")));
    }
    ResponseProfile::new(
        original.keys(),
        original.values().copied().collect(),
        perturbed.values().copied().collect(),
    )
}
