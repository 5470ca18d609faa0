//! Coherence metrics over interventional response profiles.
//!
//! A [`ResponseProfile`] pairs the raw scores of the auditing set before
//! (`original`) and after (`perturbed`) one perturbation. All three metrics
//! compare a distribution-level displacement against the paired
//! root-mean-square displacement:
//!
//! * QBM: displacement of a grid of empirical quantiles.
//! * WCM: 1-D quadratic optimal transport, solved by sorted matching.
//! * TI-WCM: the transport displacement with the mean shift removed.
//!
//! Every RMS quantity uses the `1/N` convention. A profile whose paired
//! displacement is exactly zero is *degenerate*; every metric reports 0 for
//! it and sets [`MetricValue::degenerate`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod oracle;

/// Index-aligned raw scores before and after a perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseProfile {
    pair_ids: Vec<Arc<str>>,
    original: Vec<f64>,
    perturbed: Vec<f64>,
}

impl ResponseProfile {
    pub fn new<S: AsRef<str>>(
        pair_ids: impl IntoIterator<Item = S>,
        original: Vec<f64>,
        perturbed: Vec<f64>,
    ) -> Result<Self> {
        let pair_ids: Vec<Arc<str>> = pair_ids.into_iter().map(|s| Arc::from(s.as_ref())).collect();
        Self::from_parts(pair_ids, original, perturbed)
    }

    /// Profile with generated identifiers `p0, p1, ...`.
    pub fn from_scores(original: Vec<f64>, perturbed: Vec<f64>) -> Result<Self> {
        let ids = (0..original.len()).map(|i| format!("p{i}"));
        Self::new(ids, original, perturbed)
    }

    pub(crate) fn from_parts(
        pair_ids: Vec<Arc<str>>,
        original: Vec<f64>,
        perturbed: Vec<f64>,
    ) -> Result<Self> {
        if original.is_empty() {
            return Err(Error::EmptyInput("response profile"));
        }
        if original.len() != perturbed.len() {
            return Err(Error::LengthMismatch {
                what: "original/perturbed",
                left: original.len(),
                right: perturbed.len(),
            });
        }
        if pair_ids.len() != original.len() {
            return Err(Error::LengthMismatch {
                what: "pair_ids/scores",
                left: pair_ids.len(),
                right: original.len(),
            });
        }
        if let Some(index) = original.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "original",
                index,
            });
        }
        if let Some(index) = perturbed.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "perturbed",
                index,
            });
        }
        Ok(Self {
            pair_ids,
            original,
            perturbed,
        })
    }

    pub fn len(&self) -> usize {
        self.original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.original.is_empty()
    }

    pub fn pair_ids(&self) -> impl ExactSizeIterator<Item = &str> {
        self.pair_ids.iter().map(|s| &**s)
    }

    pub fn original(&self) -> &[f64] {
        &self.original
    }

    pub fn perturbed(&self) -> &[f64] {
        &self.perturbed
    }

    /// Rows picked by `indices`, repeats allowed. Indices must be in range.
    pub fn resample(&self, indices: &[usize]) -> Self {
        Self {
            pair_ids: indices.iter().map(|&i| self.pair_ids[i].clone()).collect(),
            original: indices.iter().map(|&i| self.original[i]).collect(),
            perturbed: indices.iter().map(|&i| self.perturbed[i]).collect(),
        }
    }

    /// Stacks profiles end to end.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a ResponseProfile>) -> Result<Self> {
        let mut out = Self {
            pair_ids: Vec::new(),
            original: Vec::new(),
            perturbed: Vec::new(),
        };
        for p in parts {
            out.pair_ids.extend(p.pair_ids.iter().cloned());
            out.original.extend_from_slice(&p.original);
            out.perturbed.extend_from_slice(&p.perturbed);
        }
        if out.is_empty() {
            return Err(Error::EmptyInput("profile concatenation"));
        }
        Ok(out)
    }

    /// Applies `score -> scale * score + shift` to both vectors.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        Self::from_parts(
            self.pair_ids.clone(),
            self.original.iter().map(|v| scale * v + shift).collect(),
            self.perturbed.iter().map(|v| scale * v + shift).collect(),
        )
    }

    /// Argsort by `(score, pair_id)`, stable for full ties.
    fn sort_order(&self, values: &[f64]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&a, &b| {
            values[a]
                .total_cmp(&values[b])
                .then_with(|| self.pair_ids[a].cmp(&self.pair_ids[b]))
        });
        idx
    }
}

/// Strictly increasing quantile levels inside `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct QuantileGrid {
    levels: Vec<f64>,
}

impl QuantileGrid {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one level".into()));
        }
        if let Some(&bad) = levels.iter().find(|&&q| !(q > 0.0 && q < 1.0)) {
            return Err(Error::InvalidLevel(bad));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "levels must be strictly increasing: {levels:?}"
            )));
        }
        Ok(Self { levels })
    }

    /// Lower quartile, median, upper quartile.
    pub fn quartiles() -> Self {
        Self {
            levels: vec![0.25, 0.5, 0.75],
        }
    }

    /// `k` equispaced interior levels `i / (k + 1)`.
    pub fn equispaced(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidGrid("k must be positive".into()));
        }
        Self::new((1..=k).map(|i| i as f64 / (k + 1) as f64).collect())
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

impl<'de> Deserialize<'de> for QuantileGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let levels = Vec::<f64>::deserialize(d)?;
        QuantileGrid::new(levels).map_err(serde::de::Error::custom)
    }
}

impl FromStr for QuantileGrid {
    type Err = Error;

    /// Comma-separated levels, e.g. `0.25,0.5,0.75`.
    fn from_str(s: &str) -> Result<Self> {
        let levels = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidGrid(format!("{t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileDiagnostics {
    pub mean_original: f64,
    pub mean_perturbed: f64,
    /// RMS of `perturbed_i - original_i`.
    pub paired_rms: f64,
    /// RMS displacement under sorted matching (the empirical W2 distance).
    pub transport_rms: f64,
    pub n: usize,
}

impl ProfileDiagnostics {
    pub fn mean_gap(&self) -> f64 {
        self.mean_perturbed - self.mean_original
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricKind {
    #[serde(rename = "QBM")]
    Qbm,
    #[serde(rename = "WCM")]
    Wcm,
    #[serde(rename = "TI_WCM")]
    TiWcm,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Qbm, MetricKind::Wcm, MetricKind::TiWcm];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Qbm => "QBM",
            MetricKind::Wcm => "WCM",
            MetricKind::TiWcm => "TI_WCM",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "qbm" => Ok(MetricKind::Qbm),
            "wcm" => Ok(MetricKind::Wcm),
            "tiwcm" => Ok(MetricKind::TiWcm),
            _ => Err(Error::Config(format!("unknown metric {s:?}"))),
        }
    }
}

/// A metric value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricValue {
    pub kind: MetricKind,
    pub value: f64,
    /// Paired displacement was zero; `value` is 0 by convention.
    pub degenerate: bool,
}

impl MetricValue {
    fn degenerate(kind: MetricKind) -> Self {
        Self {
            kind,
            value: 0.0,
            degenerate: true,
        }
    }

    fn from_ratio(kind: MetricKind, ratio: f64) -> Self {
        Self {
            kind,
            value: (1.0 - ratio).clamp(0.0, 1.0),
            degenerate: false,
        }
    }
}

/// The two sorting permutations behind a WCM value.
///
/// Matching `original[sort_original[i]]` with `perturbed[sort_perturbed[i]]`
/// for every `i` is an optimal assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WcmWitness {
    pub sort_original: Vec<usize>,
    pub sort_perturbed: Vec<usize>,
}

impl WcmWitness {
    /// `assignment[i]` is the perturbed index matched to original index `i`.
    pub fn assignment(&self) -> Vec<usize> {
        let mut out = vec![0; self.sort_original.len()];
        for (&o, &p) in self.sort_original.iter().zip(&self.sort_perturbed) {
            out[o] = p;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContrastValue {
    pub kind: MetricKind,
    pub mechanistic: f64,
    pub spurious: f64,
    /// `spurious - mechanistic`.
    pub delta: f64,
}

/// Linear-interpolation quantile of the order statistics, `h = (N - 1) p`.
pub fn empirical_quantile(values: &[f64], level: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("quantile input"));
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "quantile input",
            index,
        });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, level))
}

/// Same estimator on pre-sorted, non-empty input; any `level` in `[0, 1]`.
pub(crate) fn quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * level;
    let lo = (h.floor() as usize).min(n - 1);
    let frac = h - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn paired_rms(profile: &ResponseProfile) -> f64 {
    let ss: f64 = profile
        .original
        .iter()
        .zip(&profile.perturbed)
        .map(|(o, p)| (p - o) * (p - o))
        .sum();
    (ss / profile.len() as f64).sqrt()
}

fn sorted_differences(profile: &ResponseProfile) -> Vec<f64> {
    let so = sorted_copy(&profile.original);
    let sp = sorted_copy(&profile.perturbed);
    sp.iter().zip(&so).map(|(p, o)| p - o).collect()
}

fn rms(values: &[f64]) -> f64 {
    (values.iter().map(|d| d * d).sum::<f64>() / values.len() as f64).sqrt()
}

pub fn profile_diagnostics(profile: &ResponseProfile) -> ProfileDiagnostics {
    let diffs = sorted_differences(profile);
    ProfileDiagnostics {
        mean_original: mean(&profile.original),
        mean_perturbed: mean(&profile.perturbed),
        paired_rms: paired_rms(profile),
        transport_rms: rms(&diffs),
        n: profile.len(),
    }
}

/// Quantile-Based Metric on `grid`.
pub fn qbm(profile: &ResponseProfile, grid: &QuantileGrid) -> MetricValue {
    let paired = paired_rms(profile);
    if paired == 0.0 {
        return MetricValue::degenerate(MetricKind::Qbm);
    }
    let so = sorted_copy(&profile.original);
    let sp = sorted_copy(&profile.perturbed);
    let displacements: Vec<f64> = grid
        .levels()
        .iter()
        .map(|&q| quantile_sorted(&sp, q) - quantile_sorted(&so, q))
        .collect();
    MetricValue::from_ratio(MetricKind::Qbm, rms(&displacements) / paired)
}

/// QBM on the full order-statistic grid `{i / (N - 1)}`, endpoints included
/// as the sample extremes. Coincides with WCM.
pub fn qbm_order_statistics(profile: &ResponseProfile) -> MetricValue {
    let paired = paired_rms(profile);
    if paired == 0.0 {
        return MetricValue::degenerate(MetricKind::Qbm);
    }
    let n = profile.len();
    let so = sorted_copy(&profile.original);
    let sp = sorted_copy(&profile.perturbed);
    let mut displacements = Vec::with_capacity(n);
    displacements.push(sp[0] - so[0]);
    if n >= 2 {
        for i in 1..n - 1 {
            let q = i as f64 / (n - 1) as f64;
            displacements.push(quantile_sorted(&sp, q) - quantile_sorted(&so, q));
        }
        displacements.push(sp[n - 1] - so[n - 1]);
    }
    MetricValue::from_ratio(MetricKind::Qbm, rms(&displacements) / paired)
}

/// Wasserstein Coherence Metric with its optimal-matching witness.
pub fn wcm(profile: &ResponseProfile) -> (MetricValue, WcmWitness) {
    let sort_original = profile.sort_order(&profile.original);
    let sort_perturbed = profile.sort_order(&profile.perturbed);
    let paired = paired_rms(profile);
    let value = if paired == 0.0 {
        MetricValue::degenerate(MetricKind::Wcm)
    } else {
        let diffs: Vec<f64> = sort_original
            .iter()
            .zip(&sort_perturbed)
            .map(|(&o, &p)| profile.perturbed[p] - profile.original[o])
            .collect();
        MetricValue::from_ratio(MetricKind::Wcm, rms(&diffs) / paired)
    };
    (
        value,
        WcmWitness {
            sort_original,
            sort_perturbed,
        },
    )
}

/// WCM value only; skips building the witness permutations.
pub fn wcm_value(profile: &ResponseProfile) -> MetricValue {
    let paired = paired_rms(profile);
    if paired == 0.0 {
        return MetricValue::degenerate(MetricKind::Wcm);
    }
    MetricValue::from_ratio(MetricKind::Wcm, rms(&sorted_differences(profile)) / paired)
}

/// Translation-invariant WCM.
///
/// `W2² - (mean gap)²` equals the variance of the sorted differences, which
/// is evaluated directly instead of by cancellation.
pub fn ti_wcm(profile: &ResponseProfile) -> MetricValue {
    let paired = paired_rms(profile);
    if paired == 0.0 {
        return MetricValue::degenerate(MetricKind::TiWcm);
    }
    let diffs = sorted_differences(profile);
    let gap = mean(&diffs);
    let centered = diffs.iter().map(|d| (d - gap) * (d - gap)).sum::<f64>() / diffs.len() as f64;
    MetricValue::from_ratio(MetricKind::TiWcm, centered.max(0.0).sqrt() / paired)
}

/// Dispatches on `kind`; `grid` is only read for QBM.
pub fn evaluate(kind: MetricKind, profile: &ResponseProfile, grid: &QuantileGrid) -> MetricValue {
    match kind {
        MetricKind::Qbm => qbm(profile, grid),
        MetricKind::Wcm => wcm_value(profile),
        MetricKind::TiWcm => ti_wcm(profile),
    }
}

/// Prior-relative contrast, spurious minus mechanistic.
pub fn contrast(mechanistic: &MetricValue, spurious: &MetricValue) -> Result<ContrastValue> {
    if mechanistic.kind != spurious.kind {
        return Err(Error::MetricKindMismatch {
            left: mechanistic.kind.to_string(),
            right: spurious.kind.to_string(),
        });
    }
    Ok(ContrastValue {
        kind: mechanistic.kind,
        mechanistic: mechanistic.value,
        spurious: spurious.value,
        delta: spurious.value - mechanistic.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(o: &[f64], p: &[f64]) -> ResponseProfile {
        ResponseProfile::from_scores(o.to_vec(), p.to_vec()).unwrap()
    }

    const REVERSAL: ([f64; 4], [f64; 4]) = ([0.0, 1.0, 2.0, 3.0], [3.0, 2.0, 1.0, 0.0]);

    #[test]
    fn quantile_examples() {
        assert_eq!(empirical_quantile(&[1.0, 2.0, 3.0, 4.0], 0.5).unwrap(), 2.5);
        assert_eq!(empirical_quantile(&[5.0], 0.25).unwrap(), 5.0);
        assert_eq!(empirical_quantile(&[0.0, 1.0, 2.0, 3.0], 0.25).unwrap(), 0.75);
        // input order is irrelevant
        assert_eq!(empirical_quantile(&[4.0, 1.0, 3.0, 2.0], 0.5).unwrap(), 2.5);
    }

    #[test]
    fn quantile_errors() {
        assert!(matches!(empirical_quantile(&[], 0.5), Err(Error::EmptyInput(_))));
        assert!(matches!(
            empirical_quantile(&[1.0, f64::NAN], 0.5),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(matches!(empirical_quantile(&[1.0], 0.0), Err(Error::InvalidLevel(_))));
        assert!(matches!(empirical_quantile(&[1.0], 1.0), Err(Error::InvalidLevel(_))));
    }

    #[test]
    fn profile_validation() {
        assert!(matches!(
            ResponseProfile::from_scores(vec![], vec![]),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            ResponseProfile::from_scores(vec![1.0], vec![1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            ResponseProfile::from_scores(vec![1.0, f64::INFINITY], vec![1.0, 2.0]),
            Err(Error::NonFinite { what: "original", index: 1 })
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(QuantileGrid::new(vec![]).is_err());
        assert!(QuantileGrid::new(vec![0.0, 0.5]).is_err());
        assert!(QuantileGrid::new(vec![0.5, 0.5]).is_err());
        assert!(QuantileGrid::new(vec![0.6, 0.5]).is_err());
        assert_eq!("0.25, 0.5,0.75".parse::<QuantileGrid>().unwrap(), QuantileGrid::quartiles());
        let k5 = QuantileGrid::equispaced(5).unwrap();
        assert!((k5.levels()[0] - 1.0 / 6.0).abs() < 1e-15);
        let k9 = QuantileGrid::equispaced(9).unwrap();
        assert!((k9.levels()[8] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn diagnostics_examples() {
        let d = profile_diagnostics(&profile(&REVERSAL.0, &REVERSAL.1));
        assert!((d.paired_rms - 5f64.sqrt()).abs() < 1e-12);
        assert_eq!(d.transport_rms, 0.0);

        let o = [0.3, -1.0, 2.5];
        let d = profile_diagnostics(&profile(&o, &o));
        assert_eq!((d.paired_rms, d.transport_rms), (0.0, 0.0));

        let shifted: Vec<f64> = o.iter().map(|v| v + 5.0).collect();
        let d = profile_diagnostics(&profile(&o, &shifted));
        assert!((d.paired_rms - 5.0).abs() < 1e-12);
        assert!((d.transport_rms - 5.0).abs() < 1e-12);
        assert!((d.mean_gap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn qbm_examples() {
        let o = [0.2, -1.0, 4.0, 0.0];
        let shifted: Vec<f64> = o.iter().map(|v| v - 2.0).collect();
        let v = qbm(&profile(&o, &shifted), &QuantileGrid::quartiles());
        assert!(v.value.abs() < 1e-12 && !v.degenerate);

        let v = qbm(&profile(&REVERSAL.0, &REVERSAL.1), &QuantileGrid::quartiles());
        assert_eq!(v.value, 1.0);

        let v = qbm(
            &profile(&[0.0, 1.0, 2.0], &[2.1, 1.1, 0.1]),
            &QuantileGrid::new(vec![0.5]).unwrap(),
        );
        let expected = 1.0 - 0.1 / (8.03f64 / 3.0).sqrt();
        assert!((v.value - expected).abs() < 1e-12);
    }

    #[test]
    fn wcm_examples() {
        let (v, w) = wcm(&profile(&REVERSAL.0, &REVERSAL.1));
        assert_eq!(v.value, 1.0);
        assert_eq!(w.assignment(), vec![3, 2, 1, 0]);

        let o = [0.2, -1.0, 4.0, 0.0];
        let shifted: Vec<f64> = o.iter().map(|v| v + 3.0).collect();
        assert!(wcm(&profile(&o, &shifted)).0.value.abs() < 1e-12);

        let v = wcm(&profile(&[0.0, 1.0, 2.0], &[2.1, 1.1, 0.1])).0;
        assert!((v.value - (1.0 - (0.03f64 / 8.03).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn ti_wcm_examples() {
        let o = [0.2, -1.0, 4.0, 0.0];
        let shifted: Vec<f64> = o.iter().map(|v| v + 5.0).collect();
        assert_eq!(ti_wcm(&profile(&o, &shifted)).value, 1.0);

        let v = ti_wcm(&profile(&[0.0, 2.0], &[0.0, 4.0]));
        assert!((v.value - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-12);

        assert_eq!(ti_wcm(&profile(&REVERSAL.0, &REVERSAL.1)).value, 1.0);
    }

    #[test]
    fn degenerate_profile_is_zero_for_every_metric() {
        let p = profile(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]);
        for kind in MetricKind::ALL {
            let v = evaluate(kind, &p, &QuantileGrid::quartiles());
            assert!(v.degenerate);
            assert_eq!(v.value, 0.0);
        }
        assert!(qbm_order_statistics(&p).degenerate);
    }

    #[test]
    fn ties_sort_by_pair_id() {
        let p = ResponseProfile::new(["b", "a", "c"], vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 0.0])
            .unwrap();
        let (_, w) = wcm(&p);
        assert_eq!(w.sort_original, vec![2, 1, 0]);
        assert_eq!(w.sort_perturbed, vec![1, 0, 2]);
    }

    #[test]
    fn contrast_examples() {
        let mv = |kind, value| MetricValue {
            kind,
            value,
            degenerate: false,
        };
        let c = contrast(&mv(MetricKind::Wcm, 0.5), &mv(MetricKind::Wcm, 0.5)).unwrap();
        assert_eq!(c.delta, 0.0);
        let c = contrast(&mv(MetricKind::Qbm, 0.4), &mv(MetricKind::Qbm, 0.7)).unwrap();
        assert!((c.delta - 0.3).abs() < 1e-15);
        let c = contrast(&mv(MetricKind::TiWcm, 1.0), &mv(MetricKind::TiWcm, 0.0)).unwrap();
        assert_eq!(c.delta, -1.0);
        assert!(matches!(
            contrast(&mv(MetricKind::Qbm, 0.1), &mv(MetricKind::Wcm, 0.1)),
            Err(Error::MetricKindMismatch { .. })
        ));
    }

    #[test]
    fn metric_names_round_trip() {
        for kind in MetricKind::ALL {
            assert_eq!(kind.as_str().parse::<MetricKind>().unwrap(), kind);
        }
        assert_eq!("tiwcm".parse::<MetricKind>().unwrap(), MetricKind::TiWcm);
        assert_eq!("TI-WCM".parse::<MetricKind>().unwrap(), MetricKind::TiWcm);
    }
}
