//! Black-box scoring contract, response-profile assembly, and synthetic
//! predictors with a known read set.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{AdapterError, Error, Result};
use crate::intervention::{AuditUnit, MatchedVariantPair, StructuralPrior};
use crate::metrics::ResponseProfile;
use crate::rng::{derive_seed, stable_hash64, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "orig")]
    Original,
    #[serde(rename = "mech")]
    Mechanistic,
    #[serde(rename = "spur")]
    Spurious,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Original => "orig",
            Variant::Mechanistic => "mech",
            Variant::Spurious => "spur",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "orig" => Some(Variant::Original),
            "mech" => Some(Variant::Mechanistic),
            "spur" => Some(Variant::Spurious),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which perturbed variant a profile compares against the original.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationClass {
    Mechanistic,
    Spurious,
}

impl PerturbationClass {
    pub const BOTH: [PerturbationClass; 2] = [PerturbationClass::Mechanistic, PerturbationClass::Spurious];

    pub fn as_str(self) -> &'static str {
        match self {
            PerturbationClass::Mechanistic => "mechanistic",
            PerturbationClass::Spurious => "spurious",
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            PerturbationClass::Mechanistic => Variant::Mechanistic,
            PerturbationClass::Spurious => Variant::Spurious,
        }
    }
}

/// One request line sent to a scorer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreItem {
    pub pair_id: String,
    pub variant: Variant,
    pub context: String,
    pub sequence: String,
}

/// Order-preserving batch scorer. Must be deterministic for a given batch.
pub trait ScoringAdapter {
    fn score(&mut self, items: &[ScoreItem]) -> Result<Vec<f64>, AdapterError>;
}

/// Runs the adapter and enforces the output contract.
pub fn score_batch(adapter: &mut dyn ScoringAdapter, items: &[ScoreItem]) -> Result<Vec<f64>> {
    if items.is_empty() {
        return Err(AdapterError::EmptyBatch.into());
    }
    let scores = adapter.score(items)?;
    if scores.len() != items.len() {
        return Err(AdapterError::CountMismatch {
            expected: items.len(),
            got: scores.len(),
        }
        .into());
    }
    if let Some(index) = scores.iter().position(|s| !s.is_finite()) {
        return Err(AdapterError::NonFiniteScore {
            index,
            pair_id: items[index].pair_id.clone(),
            variant: items[index].variant.to_string(),
            value: scores[index],
        }
        .into());
    }
    Ok(scores)
}

fn align_pairs<'a>(
    units: &'a [AuditUnit],
    pairs: &'a [MatchedVariantPair],
) -> Result<Vec<(&'a AuditUnit, &'a MatchedVariantPair)>> {
    let by_id: HashMap<&str, &MatchedVariantPair> =
        pairs.iter().map(|p| (p.record_id.as_str(), p)).collect();
    let mut out = units
        .iter()
        .map(|u| {
            by_id
                .get(u.record.pair_id.as_str())
                .map(|p| (u, *p))
                .ok_or_else(|| {
                    Error::from(AdapterError::MissingScore {
                        pair_id: u.record.pair_id.clone(),
                        variant: "mech/spur".into(),
                    })
                })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.0.record.pair_id.cmp(&b.0.record.pair_id));
    Ok(out)
}

fn item(unit: &AuditUnit, variant: Variant, sequence: &[char]) -> ScoreItem {
    ScoreItem {
        pair_id: unit.record.pair_id.clone(),
        variant,
        context: unit.record.context.clone(),
        sequence: sequence.iter().collect(),
    }
}

/// Scores originals and one variant class, ordered by ascending `pair_id`.
pub fn build_response_profile(
    adapter: &mut dyn ScoringAdapter,
    units: &[AuditUnit],
    pairs: &[MatchedVariantPair],
    class: PerturbationClass,
) -> Result<ResponseProfile> {
    let aligned = align_pairs(units, pairs)?;
    let n = aligned.len();
    let mut items: Vec<ScoreItem> = aligned
        .iter()
        .map(|(u, _)| item(u, Variant::Original, &u.record.sequence))
        .collect();
    items.extend(aligned.iter().map(|(u, p)| match class {
        PerturbationClass::Mechanistic => item(u, Variant::Mechanistic, &p.mechanistic_sequence),
        PerturbationClass::Spurious => item(u, Variant::Spurious, &p.spurious_sequence),
    }));
    let mut scores = score_batch(adapter, &items)?;
    let perturbed = scores.split_off(n);
    ResponseProfile::new(aligned.iter().map(|(u, _)| u.record.pair_id.as_str()), scores, perturbed)
}

/// Originals plus both variant classes for several operators' pairs, scored
/// in a single batch. Every pair list must cover the same units.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedScores {
    pub pair_ids: Vec<String>,
    pub original: Vec<f64>,
    /// One `(mechanistic, spurious)` score vector pair per operator.
    pub variants: Vec<(Vec<f64>, Vec<f64>)>,
}

impl MatchedScores {
    pub fn profile(&self, operator_index: usize, class: PerturbationClass) -> Result<ResponseProfile> {
        let (mech, spur) = &self.variants[operator_index];
        let perturbed = match class {
            PerturbationClass::Mechanistic => mech.clone(),
            PerturbationClass::Spurious => spur.clone(),
        };
        ResponseProfile::new(&self.pair_ids, self.original.clone(), perturbed)
    }
}

pub fn score_matched_pairs(
    adapter: &mut dyn ScoringAdapter,
    units: &[AuditUnit],
    pairs_per_operator: &[Vec<MatchedVariantPair>],
) -> Result<MatchedScores> {
    let mut units_sorted: Vec<&AuditUnit> = units.iter().collect();
    units_sorted.sort_by(|a, b| a.record.pair_id.cmp(&b.record.pair_id));
    let n = units_sorted.len();

    let mut items: Vec<ScoreItem> = units_sorted
        .iter()
        .map(|u| item(u, Variant::Original, &u.record.sequence))
        .collect();
    for pairs in pairs_per_operator {
        let aligned = align_pairs(units, pairs)?;
        items.extend(aligned.iter().map(|(u, p)| item(u, Variant::Mechanistic, &p.mechanistic_sequence)));
        items.extend(aligned.iter().map(|(u, p)| item(u, Variant::Spurious, &p.spurious_sequence)));
    }
    let scores = score_batch(adapter, &items)?;
    let mut chunks = scores.chunks(n.max(1));
    let original = chunks.next().unwrap_or_default().to_vec();
    let variants = pairs_per_operator
        .iter()
        .map(|_| {
            let mech = chunks.next().unwrap_or_default().to_vec();
            let spur = chunks.next().unwrap_or_default().to_vec();
            (mech, spur)
        })
        .collect();
    Ok(MatchedScores {
        pair_ids: units_sorted.iter().map(|u| u.record.pair_id.clone()).collect(),
        original,
        variants,
    })
}

/// Which sequence region a synthetic model reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadSet {
    PriorOnly,
    ComplementOnly,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticModelSpec {
    pub read_set: ReadSet,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub model_seed: u64,
}

fn one() -> f64 {
    1.0
}

impl SyntheticModelSpec {
    pub fn mixed(alpha: f64, beta: f64, noise_sigma: f64, model_seed: u64) -> Self {
        Self {
            read_set: ReadSet::Mixed,
            alpha,
            beta,
            noise_sigma,
            model_seed,
        }
    }

    pub fn preset(read_set: ReadSet, model_seed: u64) -> Self {
        Self {
            read_set,
            alpha: 0.0,
            beta: 0.0,
            noise_sigma: 0.0,
            model_seed,
        }
    }

    pub fn with_seed(mut self, model_seed: u64) -> Self {
        self.model_seed = model_seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::Config("synthetic alpha and beta must be finite".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config("synthetic noise_sigma must be >= 0".into()));
        }
        Ok(())
    }

    /// `(alpha, beta)` after applying the read-set preset.
    pub fn weights(&self) -> (f64, f64) {
        match self.read_set {
            ReadSet::PriorOnly => (1.0, 0.0),
            ReadSet::ComplementOnly => (0.0, 1.0),
            ReadSet::Mixed => (self.alpha, self.beta),
        }
    }

    /// Embedding of `symbol` at slot `position mod 16`, in `[-1, 1)`.
    pub fn embedding(&self, symbol: char, position: usize) -> f64 {
        let slot = (position % 16) as u64;
        let h = derive_seed(&[self.model_seed, symbol as u64, slot]);
        2.0 * ((h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)) - 1.0
    }

    /// Sum of 12 uniforms minus 6, times `noise_sigma`; fixed per pair_id.
    pub fn noise(&self, pair_id: &str) -> f64 {
        if self.noise_sigma == 0.0 {
            return 0.0;
        }
        let mut rng = SplitMix64::new(derive_seed(&[self.model_seed, stable_hash64(pair_id)]));
        let s: f64 = (0..12).map(|_| rng.next_f64()).sum();
        self.noise_sigma * (s - 6.0)
    }
}

/// `alpha * g(prior) + beta * g(complement) + noise`, with `g` the mean
/// embedding over a region and the mask token embedding to zero.
pub fn synthetic_score(
    spec: &SyntheticModelSpec,
    pair_id: &str,
    sequence: &[char],
    prior: &BTreeSet<usize>,
    mask_token: char,
) -> f64 {
    let (alpha, beta) = spec.weights();
    let (mut prior_sum, mut prior_n, mut comp_sum, mut comp_n) = (0.0, 0usize, 0.0, 0usize);
    for (i, &c) in sequence.iter().enumerate() {
        let e = if c == mask_token { 0.0 } else { spec.embedding(c, i) };
        if prior.contains(&i) {
            prior_sum += e;
            prior_n += 1;
        } else {
            comp_sum += e;
            comp_n += 1;
        }
    }
    let g = |sum: f64, n: usize| if n == 0 { 0.0 } else { sum / n as f64 };
    alpha * g(prior_sum, prior_n) + beta * g(comp_sum, comp_n) + spec.noise(pair_id)
}

/// In-process synthetic scorer. Needs each record's prior to know the
/// read regions.
#[derive(Debug, Clone)]
pub struct SyntheticAdapter {
    spec: SyntheticModelSpec,
    priors: HashMap<String, BTreeSet<usize>>,
    mask_token: char,
}

impl SyntheticAdapter {
    pub fn new<'a>(
        spec: SyntheticModelSpec,
        priors: impl IntoIterator<Item = &'a StructuralPrior>,
        mask_token: char,
    ) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec,
            priors: priors
                .into_iter()
                .map(|p| (p.record_id.clone(), p.indices.clone()))
                .collect(),
            mask_token,
        })
    }
}

impl ScoringAdapter for SyntheticAdapter {
    fn score(&mut self, items: &[ScoreItem]) -> Result<Vec<f64>, AdapterError> {
        items
            .iter()
            .map(|it| {
                let prior = self.priors.get(&it.pair_id).ok_or_else(|| AdapterError::UnknownRecord {
                    pair_id: it.pair_id.clone(),
                })?;
                let seq: Vec<char> = it.sequence.chars().collect();
                Ok(synthetic_score(&self.spec, &it.pair_id, &seq, prior, self.mask_token))
            })
            .collect()
    }
}

/// Maps `pair_id,variant,score` rows back onto the request order.
fn collate_scores(
    items: &[ScoreItem],
    rows: impl IntoIterator<Item = (String, Variant, f64)>,
) -> Result<Vec<f64>, AdapterError> {
    let mut table: HashMap<(String, Variant), f64> = HashMap::new();
    let mut count = 0;
    for (pair_id, variant, score) in rows {
        count += 1;
        table.insert((pair_id, variant), score);
    }
    if count != items.len() {
        return Err(AdapterError::CountMismatch {
            expected: items.len(),
            got: count,
        });
    }
    let mut out = Vec::with_capacity(items.len());
    for it in items {
        match table.remove(&(it.pair_id.clone(), it.variant)) {
            Some(s) => out.push(s),
            None => {
                return Err(AdapterError::MissingScore {
                    pair_id: it.pair_id.clone(),
                    variant: it.variant.to_string(),
                })
            }
        }
    }
    if let Some(((pair_id, variant), _)) = table.into_iter().next() {
        return Err(AdapterError::UnexpectedScore {
            pair_id,
            variant: variant.to_string(),
        });
    }
    Ok(out)
}

fn parse_response_line(line: &str) -> Result<(String, Variant, f64), AdapterError> {
    let bad = |reason: &str| AdapterError::Protocol {
        line: line.to_string(),
        reason: reason.to_string(),
    };
    let mut parts = line.trim_end_matches('\r').split(',');
    let (Some(id), Some(var), Some(score), None) = (parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return Err(bad("expected pair_id,variant,score"));
    };
    let variant = Variant::parse(var.trim()).ok_or_else(|| bad("unknown variant"))?;
    let score: f64 = score.trim().parse().map_err(|_| bad("score is not a decimal real"))?;
    Ok((id.trim().to_string(), variant, score))
}

fn request_lines(items: &[ScoreItem]) -> String {
    let mut out = String::new();
    for it in items {
        out.push_str(&serde_json::to_string(it).expect("score item serializes"));
        out.push('\n');
    }
    out
}

/// Exchanges a JSON Lines request file for a CSV response file.
#[derive(Debug, Clone)]
pub struct FileExchangeAdapter {
    pub request_path: PathBuf,
    pub response_path: PathBuf,
    pub poll_interval: Duration,
    pub timeout: Duration,
}

impl ScoringAdapter for FileExchangeAdapter {
    fn score(&mut self, items: &[ScoreItem]) -> Result<Vec<f64>, AdapterError> {
        if self.response_path.exists() {
            fs::remove_file(&self.response_path)?;
        }
        // Write then rename so a watcher never sees a partial request.
        let tmp = self.request_path.with_extension("jsonl.partial");
        fs::write(&tmp, request_lines(items))?;
        fs::rename(&tmp, &self.request_path)?;

        let start = Instant::now();
        while !self.response_path.exists() {
            if start.elapsed() > self.timeout {
                return Err(AdapterError::Timeout {
                    path: self.response_path.clone(),
                });
            }
            std::thread::sleep(self.poll_interval);
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(&self.response_path)
            .map_err(|e| AdapterError::Protocol {
                line: self.response_path.display().to_string(),
                reason: e.to_string(),
            })?;
        let headers = reader.headers().map_err(|e| AdapterError::Protocol {
            line: String::new(),
            reason: e.to_string(),
        })?;
        if headers.iter().collect::<Vec<_>>() != ["pair_id", "variant", "score"] {
            return Err(AdapterError::Protocol {
                line: headers.iter().collect::<Vec<_>>().join(","),
                reason: "response header must be pair_id,variant,score".into(),
            });
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| AdapterError::Protocol {
                line: String::new(),
                reason: e.to_string(),
            })?;
            rows.push(parse_response_line(&rec.iter().collect::<Vec<_>>().join(","))?);
        }
        collate_scores(items, rows)
    }
}

/// Runs a child process per batch: JSON Lines on stdin, one
/// `pair_id,variant,score` line per item on stdout.
#[derive(Debug, Clone)]
pub struct SubprocessAdapter {
    pub program: String,
    pub args: Vec<String>,
    pub cwd: Option<PathBuf>,
}

impl ScoringAdapter for SubprocessAdapter {
    fn score(&mut self, items: &[ScoreItem]) -> Result<Vec<f64>, AdapterError> {
        let mut cmd = Command::new(&self.program);
        if let Some(dir) = &self.cwd {
            cmd.current_dir(dir);
        }
        let mut child = cmd
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let payload = request_lines(items);
        let writer = std::thread::spawn(move || -> std::io::Result<()> {
            stdin.write_all(payload.as_bytes())?;
            stdin.flush()
        });
        let stdout = child.stdout.take().expect("stdout is piped");
        let mut rows = Vec::new();
        let mut parse_error = None;
        for line in BufReader::new(stdout).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match parse_response_line(&line) {
                Ok(row) => rows.push(row),
                Err(e) => {
                    parse_error = Some(e);
                    break;
                }
            }
        }
        if parse_error.is_some() {
            let _ = child.kill();
        }
        let status = child.wait()?;
        // A child that exits without reading stdin breaks the pipe; the
        // status or the parse error is the more useful report.
        let write_result = writer.join().expect("writer thread");
        if let Some(e) = parse_error {
            return Err(e);
        }
        if !status.success() {
            return Err(AdapterError::ExitStatus {
                status: status.to_string(),
            });
        }
        write_result?;
        collate_scores(items, rows)
    }
}
