//! Report tables and their on-disk form.
//!
//! Reals are written with 9 significant digits in positional notation
//! (scientific outside `[1e-4, 1e9)`), `.` decimal separator, `\n` endings.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::intervention::CoverageStats;

/// Per-seed row or the aggregate across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SeedKey {
    Seed(u64),
    All,
}

impl fmt::Display for SeedKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedKey::Seed(s) => write!(f, "{s}"),
            SeedKey::All => f.write_str("all"),
        }
    }
}

impl Serialize for SeedKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Grid column for metrics that take no quantile grid.
pub const NO_GRID: &str = "-";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub model: String,
    pub seed: SeedKey,
    pub operator: String,
    pub class: String,
    pub metric: String,
    pub grid: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContrastRow {
    pub model: String,
    pub seed: SeedKey,
    pub operator: String,
    pub metric: String,
    pub grid: String,
    pub mechanistic: f64,
    pub spurious: f64,
    pub delta: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AurocRow {
    pub model: String,
    pub seed: SeedKey,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub master_seed: u64,
    /// The configuration as loaded, for provenance.
    pub config: serde_json::Value,
    pub coverage: CoverageStats,
    /// Grid id treated as the headline QBM grid.
    pub primary_grid: String,
    pub rows: Vec<MetricRow>,
    pub contrasts: Vec<ContrastRow>,
    pub auroc: Vec<AurocRow>,
}

impl MetricReport {
    pub fn find_row(&self, model: &str, seed: SeedKey, operator: &str, class: &str, metric: &str, grid: &str) -> Option<&MetricRow> {
        self.rows.iter().find(|r| {
            r.model == model
                && r.seed == seed
                && r.operator == operator
                && r.class == class
                && r.metric == metric
                && r.grid == grid
        })
    }

    pub fn find_contrast(&self, model: &str, seed: SeedKey, operator: &str, metric: &str, grid: &str) -> Option<&ContrastRow> {
        self.contrasts.iter().find(|r| {
            r.model == model && r.seed == seed && r.operator == operator && r.metric == metric && r.grid == grid
        })
    }

    /// Metric label for contrast tables: plain name on the headline grid,
    /// `QBM@<grid>` on any other.
    fn contrast_label(&self, row: &ContrastRow) -> String {
        if row.grid == NO_GRID || row.grid == self.primary_grid {
            row.metric.clone()
        } else {
            format!("{}@{}", row.metric, row.grid)
        }
    }
}

/// Fixed 9-significant-digit rendering of a finite real.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        return sci;
    }
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let body = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else {
        let split = exp as usize + 1;
        if split >= digits.len() {
            format!("{}{}", digits, "0".repeat(split - digits.len()))
        } else {
            format!("{}.{}", &digits[..split], &digits[split..])
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

fn csv_line(fields: &[String]) -> String {
    let mut line = fields.join(",");
    line.push('\n');
    line
}

pub fn metrics_csv(report: &MetricReport) -> String {
    let mut out = String::from("model,seed,operator,class,metric,grid,value,lo,hi,degenerate\n");
    for r in &report.rows {
        out.push_str(&csv_line(&[
            r.model.clone(),
            r.seed.to_string(),
            r.operator.clone(),
            r.class.clone(),
            r.metric.clone(),
            r.grid.clone(),
            format_real(r.value),
            format_real(r.lower),
            format_real(r.upper),
            r.degenerate.to_string(),
        ]));
    }
    out
}

/// Seed-aggregated contrasts only.
pub fn contrasts_csv(report: &MetricReport) -> String {
    let mut out = String::from("model,operator,metric,delta,lo,hi\n");
    for r in report.contrasts.iter().filter(|r| r.seed == SeedKey::All) {
        out.push_str(&csv_line(&[
            r.model.clone(),
            r.operator.clone(),
            report.contrast_label(r),
            format_real(r.delta),
            format_real(r.lower),
            format_real(r.upper),
        ]));
    }
    out
}

/// Grouped bar chart of deltas: operator `all`, headline grid, all seeds.
/// Error bars are distances from the bar to the interval ends.
pub fn plot_data_csv(report: &MetricReport) -> String {
    let mut out = String::from("model,metric,delta,err_lo,err_hi\n");
    for r in report.contrasts.iter().filter(|r| {
        r.seed == SeedKey::All && r.operator == "all" && (r.grid == NO_GRID || r.grid == report.primary_grid)
    }) {
        out.push_str(&csv_line(&[
            r.model.clone(),
            r.metric.clone(),
            format_real(r.delta),
            format_real(r.delta - r.lower),
            format_real(r.upper - r.delta),
        ]));
    }
    out
}

pub fn summary_json(report: &MetricReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub const METRICS_FILE: &str = "metrics.csv";
pub const CONTRASTS_FILE: &str = "contrasts.csv";
pub const PLOT_FILE: &str = "plot_data.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Writes the four report files and returns their paths.
pub fn emit_report(report: &MetricReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = [
        (METRICS_FILE, metrics_csv(report)),
        (CONTRASTS_FILE, contrasts_csv(report)),
        (PLOT_FILE, plot_data_csv(report)),
        (SUMMARY_FILE, summary_json(report)),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = out_dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty_report() -> MetricReport {
        MetricReport {
            master_seed: 1,
            config: serde_json::json!({}),
            coverage: CoverageStats::default(),
            primary_grid: "K3".into(),
            rows: vec![],
            contrasts: vec![],
            auroc: vec![],
        }
    }

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(0.093), "0.0930000000");
        assert_eq!(format_real(0.039), "0.0390000000");
        assert_eq!(format_real(-1.0), "-1.00000000");
        assert_eq!(format_real(1.0), "1.00000000");
        assert_eq!(format_real(0.0), "0");
        assert_eq!(format_real(-0.0), "0");
        assert_eq!(format_real(123456789.0), "123456789");
        assert_eq!(format_real(1234567891.0), "1.23456789e9");
        assert_eq!(format_real(0.00012345), "0.000123450000");
        assert_eq!(format_real(0.000012345), "1.23450000e-5");
        assert_eq!(format_real(2.0 / 3.0), "0.666666667");
        assert_eq!(format_real(1.0 - 1.0 / 2f64.sqrt()), "0.292893219");
    }

    #[test]
    fn contrast_row_shape() {
        let mut r = empty_report();
        r.contrasts.push(ContrastRow {
            model: "modelX".into(),
            seed: SeedKey::All,
            operator: "all".into(),
            metric: "QBM".into(),
            grid: "K3".into(),
            mechanistic: 0.5,
            spurious: 0.593,
            delta: 0.093,
            lower: 0.039,
            upper: 0.147,
        });
        let csv = contrasts_csv(&r);
        assert_eq!(csv.lines().nth(1).unwrap(), "modelX,all,QBM,0.0930000000,0.0390000000,0.147000000");
        let plot = plot_data_csv(&r);
        assert_eq!(plot.lines().count(), 2);
    }

    #[test]
    fn empty_sections_write_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&empty_report(), dir.path()).unwrap();
        assert_eq!(files.len(), 4);
        assert_eq!(fs::read_to_string(dir.path().join(CONTRASTS_FILE)).unwrap(), "model,operator,metric,delta,lo,hi\n");
        assert_eq!(fs::read_to_string(dir.path().join(PLOT_FILE)).unwrap(), "model,metric,delta,err_lo,err_hi\n");
        let before = fs::read(dir.path().join(SUMMARY_FILE)).unwrap();
        emit_report(&empty_report(), dir.path()).unwrap();
        assert_eq!(before, fs::read(dir.path().join(SUMMARY_FILE)).unwrap());
    }
}
