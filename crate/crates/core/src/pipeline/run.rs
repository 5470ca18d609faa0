use std::collections::BTreeSet;
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{AdapterConfig, AuditConfig, ModelConfig, NamedGrid};
use super::io;
use super::report::{format_real, AurocRow, ContrastRow, MetricReport, MetricRow, SeedKey, NO_GRID};
use crate::error::{Error, Result};
use crate::intervention::{
    build_matched_pair, filter_auditing_set, Alphabet, AuditRecord, AuditUnit, ClassTable, MatchedVariantPair,
    OperatorKind, OperatorSpec, StructuralPrior,
};
use crate::metrics::{evaluate, MetricKind, QuantileGrid, ResponseProfile};
use crate::rng::{derive_seed, stable_hash64};
use crate::scoring::{
    score_matched_pairs, FileExchangeAdapter, PerturbationClass, ScoringAdapter, SubprocessAdapter, SyntheticAdapter,
};
use crate::stats::{aggregate_seeds, auroc, bootstrap_ci, bootstrap_indices, IntervalEstimate, LabeledScore};

/// Everything `run_audit` reads from disk.
#[derive(Debug, Clone)]
pub struct AuditInputs {
    pub records: Vec<AuditRecord>,
    pub priors: Vec<StructuralPrior>,
    pub class_table: ClassTable,
}

impl AuditInputs {
    pub fn load(config: &AuditConfig) -> Result<Self> {
        let alphabet = Alphabet::new(&config.alphabet)?;
        let records = io::load_audit_set(&config.resolve(&config.paths.audit_set), &alphabet)?;
        let priors = io::load_priors(&config.resolve(&config.paths.priors))?;
        let class_table = match &config.paths.class_table {
            Some(p) => io::load_class_table(&config.resolve(p), &alphabet)?,
            None => ClassTable::default(),
        };
        Ok(Self {
            records,
            priors,
            class_table,
        })
    }
}

/// Seed for every random draw of one pair under one operator and model seed.
pub fn pair_sub_seed(master_seed: u64, pair_id: &str, operator: OperatorKind, model_seed: u64) -> u64 {
    derive_seed(&[master_seed, stable_hash64(pair_id), operator.tag(), model_seed])
}

pub fn build_pairs(
    units: &[AuditUnit],
    operator: &OperatorSpec,
    master_seed: u64,
    model_seed: u64,
) -> Result<Vec<MatchedVariantPair>> {
    units
        .par_iter()
        .map(|u| {
            let seed = pair_sub_seed(master_seed, &u.record.pair_id, operator.kind(), model_seed);
            build_matched_pair(&u.record, &u.prior, operator, seed)
        })
        .collect()
}

fn substitute_seed(s: &str, seed: u64) -> String {
    s.replace("{seed}", &seed.to_string())
}

fn make_adapter(config: &AuditConfig, model: &ModelConfig, seed: u64, units: &[AuditUnit]) -> Result<Box<dyn ScoringAdapter>> {
    Ok(match &model.adapter {
        AdapterConfig::Synthetic(params) => Box::new(SyntheticAdapter::new(
            params.spec(seed),
            units.iter().map(|u| &u.prior),
            config.mask_token,
        )?),
        AdapterConfig::FileExchange {
            request_path,
            response_path,
            poll_interval_ms,
            timeout_ms,
        } => Box::new(FileExchangeAdapter {
            request_path: config.resolve(substitute_seed(&request_path.to_string_lossy(), seed).as_ref()),
            response_path: config.resolve(substitute_seed(&response_path.to_string_lossy(), seed).as_ref()),
            poll_interval: Duration::from_millis(*poll_interval_ms),
            timeout: Duration::from_millis(*timeout_ms),
        }),
        AdapterConfig::Subprocess { program, args } => Box::new(SubprocessAdapter {
            program: program.clone(),
            args: args.iter().map(|a| substitute_seed(a, seed)).collect(),
            cwd: Some(config.base_dir.clone()),
        }),
    })
}

/// Profiles of one model seed: `(mechanistic, spurious)` per operator.
struct SeedRun {
    seed: u64,
    profiles: Vec<(ResponseProfile, ResponseProfile)>,
    original: Vec<f64>,
}

impl SeedRun {
    fn class_bundle(&self, ops: &[usize], class: PerturbationClass) -> Vec<ResponseProfile> {
        ops.iter()
            .map(|&i| match class {
                PerturbationClass::Mechanistic => self.profiles[i].0.clone(),
                PerturbationClass::Spurious => self.profiles[i].1.clone(),
            })
            .collect()
    }

    /// Mechanistic profiles of `ops` followed by their spurious profiles.
    fn contrast_bundle(&self, ops: &[usize]) -> Vec<ResponseProfile> {
        let mut b = self.class_bundle(ops, PerturbationClass::Mechanistic);
        b.extend(self.class_bundle(ops, PerturbationClass::Spurious));
        b
    }
}

fn metric_of(kind: MetricKind, grid: &QuantileGrid, parts: &[ResponseProfile]) -> Result<(f64, bool)> {
    let v = if parts.len() == 1 {
        evaluate(kind, &parts[0], grid)
    } else {
        evaluate(kind, &ResponseProfile::concat(parts)?, grid)
    };
    Ok((v.value, v.degenerate))
}

fn contrast_of(kind: MetricKind, grid: &QuantileGrid, bundle: &[ResponseProfile]) -> Result<f64> {
    let (mech, spur) = bundle.split_at(bundle.len() / 2);
    Ok(metric_of(kind, grid, spur)?.0 - metric_of(kind, grid, mech)?.0)
}

/// Grid list for a metric; only QBM is grid-dependent.
fn grids_for<'a>(kind: MetricKind, config: &'a AuditConfig, placeholder: &'a NamedGrid) -> Vec<&'a NamedGrid> {
    match kind {
        MetricKind::Qbm => config.grids.iter().collect(),
        _ => vec![placeholder],
    }
}

fn grid_label(kind: MetricKind, grid: &NamedGrid) -> String {
    match kind {
        MetricKind::Qbm => grid.id.clone(),
        _ => NO_GRID.to_string(),
    }
}

fn with_provenance<T>(model: &str, seed: impl ToString, operator: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Provenance {
        model: model.to_string(),
        seed: seed.to_string(),
        operator: operator.to_string(),
        source: Box::new(e),
    })
}

/// Runs the full audit described by `config`, reading inputs from disk.
pub fn run_audit(config: &AuditConfig) -> Result<MetricReport> {
    let inputs = AuditInputs::load(config)?;
    run_audit_with(config, &inputs)
}

pub fn run_audit_with(config: &AuditConfig, inputs: &AuditInputs) -> Result<MetricReport> {
    config.validate()?;
    let (units, coverage) = filter_auditing_set(&inputs.records, &inputs.priors);
    if units.is_empty() {
        return Err(Error::Config(format!(
            "no record has a valid, realizable prior ({coverage:?})"
        )));
    }
    let labeled = units.iter().filter(|u| u.record.label.is_some()).count();
    if labeled != 0 && labeled != units.len() {
        return Err(Error::Config(format!(
            "labels must be given for all audited records or none ({labeled} of {})",
            units.len()
        )));
    }
    let labels: Option<Vec<u8>> = (labeled > 0).then(|| {
        let mut sorted: Vec<&AuditUnit> = units.iter().collect();
        sorted.sort_by(|a, b| a.record.pair_id.cmp(&b.record.pair_id));
        sorted.iter().map(|u| u.record.label.expect("checked above")).collect()
    });

    let operators: Vec<OperatorSpec> = config
        .operators
        .iter()
        .map(|op| match op {
            OperatorKind::Mask => OperatorSpec::Mask {
                token: config.mask_token,
            },
            OperatorKind::ClassSubstitution => OperatorSpec::ClassSubstitution {
                table: inputs.class_table.clone(),
            },
        })
        .collect();
    if config.operators.contains(&OperatorKind::ClassSubstitution) {
        inputs.class_table.check_covers(&Alphabet::new(&config.alphabet)?)?;
    }

    // Operator groups: each operator alone, then all of them pooled.
    let mut groups: Vec<(String, Vec<usize>)> = config
        .operators
        .iter()
        .enumerate()
        .map(|(i, op)| (op.to_string(), vec![i]))
        .collect();
    groups.push(("all".to_string(), (0..operators.len()).collect()));

    let placeholder = config.grids[0].clone();
    let boot = &config.bootstrap;
    let mut report = MetricReport {
        master_seed: config.master_seed,
        config: serde_json::to_value(config).expect("config serializes"),
        coverage,
        primary_grid: config.grids[0].id.clone(),
        rows: Vec::new(),
        contrasts: Vec::new(),
        auroc: Vec::new(),
    };

    for model in &config.models {
        let mut runs = Vec::with_capacity(model.seeds.len());
        for &seed in &model.seeds {
            let pairs = operators
                .iter()
                .map(|op| with_provenance(&model.id, seed, op.kind().as_str(), build_pairs(&units, op, config.master_seed, seed)))
                .collect::<Result<Vec<_>>>()?;
            let mut adapter = with_provenance(&model.id, seed, "all", make_adapter(config, model, seed, &units))?;
            let scores = with_provenance(&model.id, seed, "all", score_matched_pairs(adapter.as_mut(), &units, &pairs))?;
            let profiles = (0..operators.len())
                .map(|i| {
                    Ok((
                        scores.profile(i, PerturbationClass::Mechanistic)?,
                        scores.profile(i, PerturbationClass::Spurious)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            runs.push(SeedRun {
                seed,
                profiles,
                original: scores.original,
            });
        }

        for (group_name, ops) in &groups {
            for &kind in &config.metrics {
                for grid in grids_for(kind, config, &placeholder) {
                    let glabel = grid_label(kind, grid);
                    let levels = &grid.levels;
                    let mut class_rows: Vec<(MetricRow, MetricRow)> = Vec::new();

                    // Per-seed class rows and contrasts.
                    for run in &runs {
                        let mut pair = Vec::with_capacity(2);
                        for class in PerturbationClass::BOTH {
                            let bundle = run.class_bundle(ops, class);
                            let (value, degenerate) = with_provenance(&model.id, run.seed, group_name, metric_of(kind, levels, &bundle))?;
                            let ci = with_provenance(&model.id, run.seed, group_name, bootstrap_ci(&bundle, |ps| Ok(metric_of(kind, levels, ps)?.0), boot))?;
                            pair.push(MetricRow {
                                model: model.id.clone(),
                                seed: SeedKey::Seed(run.seed),
                                operator: group_name.clone(),
                                class: class.as_str().to_string(),
                                metric: kind.to_string(),
                                grid: glabel.clone(),
                                value,
                                lower: ci.lower,
                                upper: ci.upper,
                                degenerate,
                            });
                        }
                        let spur = pair.pop().expect("two classes");
                        let mech = pair.pop().expect("two classes");
                        let bundle = run.contrast_bundle(ops);
                        let ci = with_provenance(&model.id, run.seed, group_name, bootstrap_ci(&bundle, |ps| contrast_of(kind, levels, ps), boot))?;
                        report.contrasts.push(contrast_row(&mech, &spur, &ci));
                        class_rows.push((mech, spur));
                    }

                    // Seed aggregate.
                    let mut agg = Vec::with_capacity(2);
                    for (ci_idx, class) in PerturbationClass::BOTH.into_iter().enumerate() {
                        let bundles: Vec<Vec<ResponseProfile>> = runs.iter().map(|r| r.class_bundle(ops, class)).collect();
                        let a = with_provenance(&model.id, SeedKey::All, group_name, aggregate_seeds(&bundles, |ps| Ok(metric_of(kind, levels, ps)?.0), boot))?;
                        let degenerate = class_rows
                            .iter()
                            .all(|(m, s)| if ci_idx == 0 { m.degenerate } else { s.degenerate });
                        agg.push(MetricRow {
                            model: model.id.clone(),
                            seed: SeedKey::All,
                            operator: group_name.clone(),
                            class: class.as_str().to_string(),
                            metric: kind.to_string(),
                            grid: glabel.clone(),
                            value: a.mean,
                            lower: a.interval.lower,
                            upper: a.interval.upper,
                            degenerate,
                        });
                    }
                    let bundles: Vec<Vec<ResponseProfile>> = runs.iter().map(|r| r.contrast_bundle(ops)).collect();
                    let a = with_provenance(&model.id, SeedKey::All, group_name, aggregate_seeds(&bundles, |ps| contrast_of(kind, levels, ps), boot))?;
                    report.contrasts.push(contrast_row(&agg[0], &agg[1], &a.interval));

                    for (m, s) in class_rows {
                        report.rows.push(m);
                        report.rows.push(s);
                    }
                    report.rows.extend(agg);
                }
            }
        }

        if let Some(labels) = &labels {
            let per_seed: Vec<Vec<LabeledScore>> = runs
                .iter()
                .map(|r| {
                    r.original
                        .iter()
                        .zip(labels)
                        .map(|(&score, &label)| LabeledScore { score, label })
                        .collect()
                })
                .collect();
            let stat = |items: &[LabeledScore], idx: &[usize]| {
                let picked: Vec<LabeledScore> = idx.iter().map(|&i| items[i]).collect();
                auroc(&picked)
            };
            let n = labels.len();
            for (run, items) in runs.iter().zip(&per_seed) {
                let ci = with_provenance(&model.id, run.seed, "all", bootstrap_indices(n, boot, |idx| stat(items, idx)))?;
                report.auroc.push(AurocRow {
                    model: model.id.clone(),
                    seed: SeedKey::Seed(run.seed),
                    value: ci.point,
                    lower: ci.lower,
                    upper: ci.upper,
                });
            }
            let ci = with_provenance(
                &model.id,
                SeedKey::All,
                "all",
                bootstrap_indices(n, boot, |idx| {
                    let mut total = 0.0;
                    for items in &per_seed {
                        total += stat(items, idx)?;
                    }
                    Ok(total / per_seed.len() as f64)
                }),
            )?;
            report.auroc.push(AurocRow {
                model: model.id.clone(),
                seed: SeedKey::All,
                value: ci.point,
                lower: ci.lower,
                upper: ci.upper,
            });
        }
    }
    Ok(report)
}

fn contrast_row(mech: &MetricRow, spur: &MetricRow, ci: &IntervalEstimate) -> ContrastRow {
    ContrastRow {
        model: mech.model.clone(),
        seed: mech.seed,
        operator: mech.operator.clone(),
        metric: mech.metric.clone(),
        grid: mech.grid.clone(),
        mechanistic: mech.value,
        spurious: spur.value,
        delta: spur.value - mech.value,
        lower: ci.lower,
        upper: ci.upper,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub model: String,
    pub grid: String,
    pub k: usize,
    pub mechanistic: MetricRow,
    pub spurious: MetricRow,
    pub contrast: ContrastRow,
}

/// QBM under operator `all` and seed aggregation, for each grid.
pub fn qbm_sensitivity_with(config: &AuditConfig, inputs: &AuditInputs, grids: Vec<NamedGrid>) -> Result<Vec<SensitivityRow>> {
    let mut cfg = config.clone();
    cfg.metrics = vec![MetricKind::Qbm];
    cfg.grids = grids;
    let report = run_audit_with(&cfg, inputs)?;
    let mut out = Vec::new();
    let models: Vec<&str> = cfg.models.iter().map(|m| m.id.as_str()).collect();
    for model in models {
        for grid in &cfg.grids {
            let find = |class| {
                report
                    .find_row(model, SeedKey::All, "all", class, "QBM", &grid.id)
                    .cloned()
                    .expect("every configured combination is reported")
            };
            let contrast = report
                .find_contrast(model, SeedKey::All, "all", "QBM", &grid.id)
                .cloned()
                .expect("every configured combination is reported");
            out.push(SensitivityRow {
                model: model.to_string(),
                grid: grid.id.clone(),
                k: grid.levels.len(),
                mechanistic: find("mechanistic"),
                spurious: find("spurious"),
                contrast,
            });
        }
    }
    Ok(out)
}

pub fn qbm_sensitivity(config: &AuditConfig) -> Result<Vec<SensitivityRow>> {
    let inputs = AuditInputs::load(config)?;
    qbm_sensitivity_with(config, &inputs, NamedGrid::sensitivity_grids())
}

pub fn sensitivity_csv(rows: &[SensitivityRow]) -> String {
    let mut out =
        String::from("model,grid,k,qbm_mech,mech_lo,mech_hi,qbm_spur,spur_lo,spur_hi,delta,delta_lo,delta_hi\n");
    for r in rows {
        let fields = [
            r.model.clone(),
            r.grid.clone(),
            r.k.to_string(),
            format_real(r.mechanistic.value),
            format_real(r.mechanistic.lower),
            format_real(r.mechanistic.upper),
            format_real(r.spurious.value),
            format_real(r.spurious.lower),
            format_real(r.spurious.upper),
            format_real(r.contrast.delta),
            format_real(r.contrast.lower),
            format_real(r.contrast.upper),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Distinct `(seed, operator, class, metric, grid)` keys of a model's rows.
pub fn row_keys(report: &MetricReport, model: &str) -> BTreeSet<(SeedKey, String, String, String, String)> {
    report
        .rows
        .iter()
        .filter(|r| r.model == model)
        .map(|r| (r.seed, r.operator.clone(), r.class.clone(), r.metric.clone(), r.grid.clone()))
        .collect()
}
