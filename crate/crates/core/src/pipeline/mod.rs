//! Config-driven audit runs: ingestion, scoring, statistics, and reports.

pub mod config;
pub mod io;
pub mod report;
pub mod run;
pub mod synth;

pub use config::{AdapterConfig, AuditConfig, ModelConfig, NamedGrid, PathsConfig, SyntheticParams};
pub use report::{emit_report, format_real, ContrastRow, MetricReport, MetricRow, SeedKey};
pub use run::{qbm_sensitivity, run_audit, run_audit_with, AuditInputs, SensitivityRow};
pub use synth::SynthSpec;
