//! Componentized inputs, structural priors, and matched perturbations.
//!
//! Indices are 0-based throughout. A matched pair perturbs the prior
//! positions (mechanistic scope) and an equally sized random subset of the
//! complement (spurious scope) with the same operator rule.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, SplitMix64};

pub const DEFAULT_ALPHABET: &str = "ACDEFGHIKLMNPQRSTVWY";
pub const DEFAULT_MASK_TOKEN: char = 'X';

/// Symbols a record's sequence may use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet(BTreeSet<char>);

impl Alphabet {
    pub fn new(symbols: &str) -> Result<Self> {
        let set: BTreeSet<char> = symbols.chars().collect();
        if set.is_empty() {
            return Err(Error::Config("alphabet is empty".into()));
        }
        Ok(Self(set))
    }

    pub fn contains(&self, c: char) -> bool {
        self.0.contains(&c)
    }

    pub fn symbols(&self) -> impl Iterator<Item = char> + '_ {
        self.0.iter().copied()
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Self(DEFAULT_ALPHABET.chars().collect())
    }
}

/// One componentized input: a fixed context plus the sequence under audit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditRecord {
    pub pair_id: String,
    pub context: String,
    pub sequence: Vec<char>,
    pub label: Option<u8>,
}

impl AuditRecord {
    pub fn new(
        pair_id: impl Into<String>,
        context: impl Into<String>,
        sequence: &str,
        alphabet: &Alphabet,
    ) -> Result<Self> {
        let pair_id = pair_id.into();
        let sequence: Vec<char> = sequence.chars().collect();
        if sequence.len() < 2 {
            return Err(Error::InvalidRecord(format!(
                "{pair_id}: sequence needs at least 2 components, got {}",
                sequence.len()
            )));
        }
        if let Some((pos, &c)) = sequence.iter().enumerate().find(|(_, c)| !alphabet.contains(**c)) {
            return Err(Error::InvalidRecord(format!(
                "{pair_id}: symbol {c:?} at position {pos} is outside the alphabet"
            )));
        }
        Ok(Self {
            pair_id,
            context: context.into(),
            sequence,
            label: None,
        })
    }

    pub fn with_label(mut self, label: u8) -> Self {
        self.label = Some(label);
        self
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    pub fn sequence_string(&self) -> String {
        self.sequence.iter().collect()
    }
}

/// Prior-selected component positions for one record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralPrior {
    pub record_id: String,
    pub indices: BTreeSet<usize>,
}

impl StructuralPrior {
    pub fn new(record_id: impl Into<String>, indices: impl IntoIterator<Item = usize>) -> Self {
        Self {
            record_id: record_id.into(),
            indices: indices.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Checks the prior is a non-empty strict subset of the record's positions.
pub fn validate_prior<'p>(record: &AuditRecord, prior: &'p StructuralPrior) -> Result<&'p StructuralPrior> {
    if prior.record_id != record.pair_id {
        return Err(Error::PriorRecordMismatch {
            prior: prior.record_id.clone(),
            record: record.pair_id.clone(),
        });
    }
    let len = record.len();
    if prior.is_empty() {
        return Err(Error::EmptyPrior {
            record: record.pair_id.clone(),
        });
    }
    if let Some(&index) = prior.indices.iter().find(|&&i| i >= len) {
        return Err(Error::PriorIndexOutOfRange {
            record: record.pair_id.clone(),
            index,
            len,
        });
    }
    if prior.len() == len {
        return Err(Error::FullPrior {
            record: record.pair_id.clone(),
            len,
        });
    }
    Ok(prior)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Realizability {
    Realizable,
    /// Reason `complement_too_small`.
    ComplementTooSmall { complement: usize, needed: usize },
}

impl Realizability {
    pub fn is_realizable(&self) -> bool {
        matches!(self, Realizability::Realizable)
    }

    pub fn reason(&self) -> Option<&'static str> {
        match self {
            Realizability::Realizable => None,
            Realizability::ComplementTooSmall { .. } => Some("complement_too_small"),
        }
    }
}

/// Whether a spurious scope of matching size fits in the complement.
/// Expects a prior that passed [`validate_prior`].
pub fn check_realizable(record: &AuditRecord, prior: &StructuralPrior) -> Realizability {
    let complement = record.len().saturating_sub(prior.len());
    if complement >= prior.len() {
        Realizability::Realizable
    } else {
        Realizability::ComplementTooSmall {
            complement,
            needed: prior.len(),
        }
    }
}

/// Uniform size-|P| subset of the complement: partial Fisher-Yates over the
/// ascending complement, driven by SplitMix64 seeded with `sub_seed`.
pub fn sample_spurious_scope(
    record: &AuditRecord,
    prior: &StructuralPrior,
    sub_seed: u64,
) -> Result<BTreeSet<usize>> {
    if let Realizability::ComplementTooSmall { complement, needed } = check_realizable(record, prior) {
        return Err(Error::NotRealizable {
            record: record.pair_id.clone(),
            complement,
            needed,
        });
    }
    let mut pool: Vec<usize> = (0..record.len())
        .filter(|i| !prior.indices.contains(i))
        .collect();
    let k = prior.len();
    let mut rng = SplitMix64::new(sub_seed);
    for i in 0..k {
        let j = i + rng.next_index(pool.len() - i);
        pool.swap(i, j);
    }
    Ok(pool[..k].iter().copied().collect())
}

fn check_scope(sequence: &[char], scope: &BTreeSet<usize>) -> Result<()> {
    match scope.iter().next_back() {
        Some(&index) if index >= sequence.len() => Err(Error::ScopeOutOfRange {
            index,
            len: sequence.len(),
        }),
        _ => Ok(()),
    }
}

pub fn apply_mask(sequence: &[char], scope: &BTreeSet<usize>, mask_token: char) -> Result<Vec<char>> {
    check_scope(sequence, scope)?;
    let mut out = sequence.to_vec();
    for &i in scope {
        out[i] = mask_token;
    }
    Ok(out)
}

/// Partition of the alphabet into named substitution classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTable {
    classes: BTreeMap<String, Vec<char>>,
    class_of: HashMap<char, String>,
}

impl ClassTable {
    pub fn new(classes: BTreeMap<String, Vec<char>>) -> Result<Self> {
        let mut class_of = HashMap::new();
        for (name, members) in &classes {
            if members.is_empty() {
                return Err(Error::InvalidClassTable(format!("class {name:?} is empty")));
            }
            for &c in members {
                if let Some(prev) = class_of.insert(c, name.clone()) {
                    return Err(Error::InvalidClassTable(format!(
                        "symbol {c:?} appears in both {prev:?} and {name:?}"
                    )));
                }
            }
        }
        if classes.is_empty() {
            return Err(Error::InvalidClassTable("no classes".into()));
        }
        Ok(Self { classes, class_of })
    }

    /// Parses a JSON object of class name to an array of one-character strings.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(text)
            .map_err(|e| Error::InvalidClassTable(e.to_string()))?;
        let mut classes = BTreeMap::new();
        for (name, members) in raw {
            let chars = members
                .iter()
                .map(|m| {
                    let mut it = m.chars();
                    match (it.next(), it.next()) {
                        (Some(c), None) => Ok(c),
                        _ => Err(Error::InvalidClassTable(format!(
                            "class {name:?}: {m:?} is not a single character"
                        ))),
                    }
                })
                .collect::<Result<Vec<char>>>()?;
            classes.insert(name, chars);
        }
        Self::new(classes)
    }

    pub fn to_json(&self) -> String {
        let raw: BTreeMap<&str, Vec<String>> = self
            .classes
            .iter()
            .map(|(k, v)| (k.as_str(), v.iter().map(|c| c.to_string()).collect()))
            .collect();
        serde_json::to_string_pretty(&raw).expect("string map serializes")
    }

    /// Errors unless every alphabet symbol belongs to some class.
    pub fn check_covers(&self, alphabet: &Alphabet) -> Result<()> {
        let missing: Vec<char> = alphabet.symbols().filter(|c| !self.class_of.contains_key(c)).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidClassTable(format!("symbols without a class: {missing:?}")))
        }
    }

    pub fn class_members(&self, symbol: char) -> Option<&[char]> {
        self.class_of
            .get(&symbol)
            .map(|name| self.classes[name].as_slice())
    }

    pub fn classes(&self) -> &BTreeMap<String, Vec<char>> {
        &self.classes
    }
}

impl Default for ClassTable {
    /// Hydrophobic, polar, positive, negative, special. A placeholder
    /// partition of the 20 standard residues.
    fn default() -> Self {
        let classes = [
            ("hydrophobic", "AVLIMFWY"),
            ("polar", "STNQC"),
            ("positive", "KRH"),
            ("negative", "DE"),
            ("special", "GP"),
        ]
        .into_iter()
        .map(|(n, s)| (n.to_string(), s.chars().collect()))
        .collect();
        Self::new(classes).expect("default table is a partition")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    pub sequence: Vec<char>,
    /// Scoped positions left unchanged because their class is a singleton.
    pub no_ops: Vec<usize>,
}

/// Replaces each scoped symbol with a different member of its class, drawn
/// uniformly in ascending position order. Singleton classes are no-ops and
/// consume no draw.
pub fn apply_class_substitution(
    sequence: &[char],
    scope: &BTreeSet<usize>,
    table: &ClassTable,
    sub_seed: u64,
) -> Result<Substitution> {
    check_scope(sequence, scope)?;
    let mut rng = SplitMix64::new(sub_seed);
    let mut out = sequence.to_vec();
    let mut no_ops = Vec::new();
    for &pos in scope {
        let original = sequence[pos];
        let members = table.class_members(original).ok_or(Error::UnknownSymbol {
            symbol: original,
            position: pos,
        })?;
        let candidates: Vec<char> = members.iter().copied().filter(|&c| c != original).collect();
        if candidates.is_empty() {
            no_ops.push(pos);
        } else {
            out[pos] = candidates[rng.next_index(candidates.len())];
        }
    }
    Ok(Substitution {
        sequence: out,
        no_ops,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Mask,
    ClassSubstitution,
}

impl OperatorKind {
    /// Word mixed into per-pair seeds.
    pub fn tag(self) -> u64 {
        match self {
            OperatorKind::Mask => 1,
            OperatorKind::ClassSubstitution => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OperatorKind::Mask => "mask",
            OperatorKind::ClassSubstitution => "class_substitution",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mask" => Ok(OperatorKind::Mask),
            "class_substitution" => Ok(OperatorKind::ClassSubstitution),
            _ => Err(Error::Config(format!("unknown operator {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OperatorSpec {
    Mask { token: char },
    ClassSubstitution { table: ClassTable },
}

impl OperatorSpec {
    pub fn kind(&self) -> OperatorKind {
        match self {
            OperatorSpec::Mask { .. } => OperatorKind::Mask,
            OperatorSpec::ClassSubstitution { .. } => OperatorKind::ClassSubstitution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchedVariantPair {
    pub record_id: String,
    pub operator: OperatorKind,
    pub mechanistic_scope: BTreeSet<usize>,
    pub spurious_scope: BTreeSet<usize>,
    pub mechanistic_sequence: Vec<char>,
    pub spurious_sequence: Vec<char>,
    pub mechanistic_no_ops: Vec<usize>,
    pub spurious_no_ops: Vec<usize>,
    pub sub_seed: u64,
}

/// Applies one operator rule to the prior scope and to a matched-size
/// complement scope. Class substitution draws for the two scopes come from
/// independent streams tagged 0 (mechanistic) and 1 (spurious).
pub fn build_matched_pair(
    record: &AuditRecord,
    prior: &StructuralPrior,
    operator: &OperatorSpec,
    sub_seed: u64,
) -> Result<MatchedVariantPair> {
    validate_prior(record, prior)?;
    let mechanistic_scope = prior.indices.clone();
    let spurious_scope = sample_spurious_scope(record, prior, sub_seed)?;

    let (mech, spur) = match operator {
        OperatorSpec::Mask { token } => (
            Substitution {
                sequence: apply_mask(&record.sequence, &mechanistic_scope, *token)?,
                no_ops: Vec::new(),
            },
            Substitution {
                sequence: apply_mask(&record.sequence, &spurious_scope, *token)?,
                no_ops: Vec::new(),
            },
        ),
        OperatorSpec::ClassSubstitution { table } => (
            apply_class_substitution(
                &record.sequence,
                &mechanistic_scope,
                table,
                derive_seed(&[sub_seed, 0]),
            )?,
            apply_class_substitution(
                &record.sequence,
                &spurious_scope,
                table,
                derive_seed(&[sub_seed, 1]),
            )?,
        ),
    };

    Ok(MatchedVariantPair {
        record_id: record.pair_id.clone(),
        operator: operator.kind(),
        mechanistic_scope,
        spurious_scope,
        mechanistic_sequence: mech.sequence,
        spurious_sequence: spur.sequence,
        mechanistic_no_ops: mech.no_ops,
        spurious_no_ops: spur.no_ops,
        sub_seed,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CoverageStats {
    pub total: usize,
    pub missing_prior: usize,
    pub invalid_prior: usize,
    pub not_realizable: usize,
    pub retained: usize,
    /// Priors naming a record that is not in the audit set.
    pub orphan_priors: usize,
}

/// A record admitted to the audit together with its validated prior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditUnit {
    pub record: AuditRecord,
    pub prior: StructuralPrior,
}

/// Keeps records with a valid, realizable prior, ordered by ascending
/// `pair_id`. Exclusions are counted, not raised.
pub fn filter_auditing_set(
    records: &[AuditRecord],
    priors: &[StructuralPrior],
) -> (Vec<AuditUnit>, CoverageStats) {
    let by_id: HashMap<&str, &StructuralPrior> =
        priors.iter().map(|p| (p.record_id.as_str(), p)).collect();
    let mut stats = CoverageStats {
        total: records.len(),
        ..CoverageStats::default()
    };
    let mut kept = Vec::new();
    for record in records {
        let Some(prior) = by_id.get(record.pair_id.as_str()) else {
            stats.missing_prior += 1;
            continue;
        };
        if validate_prior(record, prior).is_err() {
            stats.invalid_prior += 1;
            continue;
        }
        if !check_realizable(record, prior).is_realizable() {
            stats.not_realizable += 1;
            continue;
        }
        kept.push(AuditUnit {
            record: record.clone(),
            prior: (*prior).clone(),
        });
    }
    let ids: BTreeSet<&str> = records.iter().map(|r| r.pair_id.as_str()).collect();
    stats.orphan_priors = priors.iter().filter(|p| !ids.contains(p.record_id.as_str())).count();
    stats.retained = kept.len();
    kept.sort_by(|a, b| a.record.pair_id.cmp(&b.record.pair_id));
    (kept, stats)
}
