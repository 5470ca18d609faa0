//! Percentile bootstrap over audit pairs, seed aggregation, and AUROC.
//!
//! Replicate `r` draws its indices from SplitMix64 seeded with
//! `derive_seed([boot_seed, r])`, so the schedule (serial or parallel) never
//! changes a result. Every profile in a bundle is resampled with the same
//! indices, which keeps mechanistic and spurious rows of a pair together.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{quantile_sorted, ResponseProfile};
use crate::rng::{derive_seed, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub confidence: f64,
    pub boot_seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 100,
            confidence: 0.95,
            boot_seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::BootstrapConfig("replicates must be >= 1".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::BootstrapConfig(format!(
                "confidence {} is outside (0, 1)",
                self.confidence
            )));
        }
        Ok(())
    }

    fn tail_levels(&self) -> (f64, f64) {
        let alpha = (1.0 - self.confidence) / 2.0;
        (alpha, 1.0 - alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalEstimate {
    /// Statistic on the full sample.
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: &'static str,
}

/// Resampled index vector for replicate `replicate`.
pub fn replicate_indices(n: usize, boot_seed: u64, replicate: usize) -> Vec<usize> {
    let mut rng = SplitMix64::new(derive_seed(&[boot_seed, replicate as u64]));
    (0..n).map(|_| rng.next_index(n)).collect()
}

/// Percentile bootstrap of a statistic of `n` resampling units.
pub fn bootstrap_indices<F>(n: usize, config: &BootstrapConfig, statistic: F) -> Result<IntervalEstimate>
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
{
    config.validate()?;
    if n == 0 {
        return Err(Error::EmptyInput("bootstrap sample"));
    }
    let identity: Vec<usize> = (0..n).collect();
    let point = statistic(&identity)?;
    let mut values = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            statistic(&replicate_indices(n, config.boot_seed, r)).map_err(|e| Error::Replicate {
                replicate: r,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    if let Some(r) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Replicate {
            replicate: r,
            source: Box::new(Error::NonFinite {
                what: "bootstrap statistic",
                index: r,
            }),
        });
    }
    values.sort_by(f64::total_cmp);
    let (lo, hi) = config.tail_levels();
    Ok(IntervalEstimate {
        point,
        lower: quantile_sorted(&values, lo),
        upper: quantile_sorted(&values, hi),
        method: "percentile_bootstrap",
    })
}

fn check_aligned(profiles: &[&ResponseProfile]) -> Result<usize> {
    let first = profiles.first().ok_or(Error::EmptyInput("profile bundle"))?;
    for p in &profiles[1..] {
        if !p.pair_ids().eq(first.pair_ids()) {
            return Err(Error::MisalignedSeeds);
        }
    }
    Ok(first.len())
}

/// Bootstrap CI of a statistic over index-aligned profiles.
pub fn bootstrap_ci<F>(profiles: &[ResponseProfile], statistic: F, config: &BootstrapConfig) -> Result<IntervalEstimate>
where
    F: Fn(&[ResponseProfile]) -> Result<f64> + Sync,
{
    let n = check_aligned(&profiles.iter().collect::<Vec<_>>())?;
    bootstrap_indices(n, config, |idx| {
        let resampled: Vec<ResponseProfile> = profiles.iter().map(|p| p.resample(idx)).collect();
        statistic(&resampled)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedAggregate {
    pub per_seed: Vec<f64>,
    pub mean: f64,
    pub interval: IntervalEstimate,
}

/// Mean over seeds with a joint bootstrap: each replicate applies one pair
/// resample to every seed's bundle, then averages the per-seed statistics.
pub fn aggregate_seeds<F>(
    per_seed_bundles: &[Vec<ResponseProfile>],
    statistic: F,
    config: &BootstrapConfig,
) -> Result<SeedAggregate>
where
    F: Fn(&[ResponseProfile]) -> Result<f64> + Sync,
{
    if per_seed_bundles.is_empty() {
        return Err(Error::EmptyInput("seed list"));
    }
    let all: Vec<&ResponseProfile> = per_seed_bundles.iter().flatten().collect();
    let n = check_aligned(&all)?;
    let per_seed = per_seed_bundles
        .iter()
        .map(|b| statistic(b))
        .collect::<Result<Vec<f64>>>()?;
    let k = per_seed.len() as f64;
    let mean = per_seed.iter().sum::<f64>() / k;
    let interval = bootstrap_indices(n, config, |idx| {
        let mut total = 0.0;
        for bundle in per_seed_bundles {
            let resampled: Vec<ResponseProfile> = bundle.iter().map(|p| p.resample(idx)).collect();
            total += statistic(&resampled)?;
        }
        Ok(total / k)
    })?;
    Ok(SeedAggregate {
        per_seed,
        mean,
        interval: IntervalEstimate {
            point: mean,
            ..interval
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledScore {
    pub score: f64,
    pub label: u8,
}

impl LabeledScore {
    pub fn new(score: f64, label: i64) -> Result<Self> {
        if !score.is_finite() {
            return Err(Error::NonFinite {
                what: "labeled score",
                index: 0,
            });
        }
        match label {
            0 | 1 => Ok(Self {
                score,
                label: label as u8,
            }),
            other => Err(Error::InvalidLabel(other)),
        }
    }
}

/// Mann-Whitney AUROC with half credit for ties, via midranks.
pub fn auroc(items: &[LabeledScore]) -> Result<f64> {
    if let Some(index) = items.iter().position(|it| !it.score.is_finite()) {
        return Err(Error::NonFinite {
            what: "labeled score",
            index,
        });
    }
    if let Some(it) = items.iter().find(|it| it.label > 1) {
        return Err(Error::InvalidLabel(it.label as i64));
    }
    let positives = items.iter().filter(|it| it.label == 1).count();
    let negatives = items.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[a].score.partial_cmp(&items[b].score).expect("finite scores"));

    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && items[order[end]].score == items[order[start]].score {
            end += 1;
        }
        // 1-based ranks start+1 ..= end share their mean.
        let midrank = (start + 1 + end) as f64 / 2.0;
        let tied_pos = order[start..end].iter().filter(|&&i| items[i].label == 1).count();
        rank_sum += midrank * tied_pos as f64;
        start = end;
    }
    let p = positives as f64;
    let u = rank_sum - p * (p + 1.0) / 2.0;
    Ok(u / (p * negatives as f64))
}
