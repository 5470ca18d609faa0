use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use isafe::error::{Error, Result};
use isafe::metrics::{evaluate, MetricKind, QuantileGrid};
use isafe::pipeline::io::{align_scores, load_score_csv};
use isafe::pipeline::report::{emit_report, format_real};
use isafe::pipeline::run::{qbm_sensitivity, run_audit, sensitivity_csv};
use isafe::pipeline::synth::{write_synthetic_bundle, SynthSpec};
use isafe::pipeline::AuditConfig;
use isafe::stats::{bootstrap_ci, BootstrapConfig};

#[derive(Parser)]
#[command(name = "audit", version, about = "Interventional coherence audits for sequence scoring models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured audit and write metrics, contrasts, plot data, and a summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `paths.output_dir`, then `report`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `master_seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Coherence metrics for one pair of `pair_id,score` files.
    Metrics {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        perturbed: PathBuf,
        /// qbm, wcm, tiwcm, or all.
        #[arg(long, default_value = "all")]
        metric: String,
        /// Comma-separated quantile levels for QBM.
        #[arg(long, default_value = "0.25,0.5,0.75")]
        grid: QuantileGrid,
        /// Bootstrap replicates; 0 skips intervals.
        #[arg(long, default_value_t = 0)]
        bootstrap: usize,
        #[arg(long, default_value_t = 0)]
        boot_seed: u64,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
    },
    /// QBM contrast across K3, K5, and K9 grids.
    Sensitivity {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic audit set, priors, config, and score files.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { config, out, seed } => {
            let mut cfg = AuditConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let out = out.unwrap_or_else(|| match &cfg.paths.output_dir {
                Some(d) => cfg.resolve(d),
                None => PathBuf::from("report"),
            });
            let report = run_audit(&cfg)?;
            for path in emit_report(&report, &out)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Metrics {
            original,
            perturbed,
            metric,
            grid,
            bootstrap,
            boot_seed,
            confidence,
        } => {
            let kinds = if metric.eq_ignore_ascii_case("all") {
                MetricKind::ALL.to_vec()
            } else {
                vec![metric.parse::<MetricKind>()?]
            };
            let profile = align_scores(&load_score_csv(&original)?, &load_score_csv(&perturbed)?)?;
            let boot = BootstrapConfig {
                replicates: bootstrap,
                confidence,
                boot_seed,
            };
            if bootstrap > 0 {
                boot.validate()?;
            }
            println!("metric,value,lo,hi,degenerate");
            for kind in kinds {
                let v = evaluate(kind, &profile, &grid);
                let (lo, hi) = if bootstrap > 0 {
                    let ci = bootstrap_ci(std::slice::from_ref(&profile), |ps| Ok(evaluate(kind, &ps[0], &grid).value), &boot)?;
                    (format_real(ci.lower), format_real(ci.upper))
                } else {
                    (String::new(), String::new())
                };
                println!("{kind},{},{lo},{hi},{}", format_real(v.value), v.degenerate);
            }
            Ok(())
        }
        Command::Sensitivity { config, out } => {
            let cfg = AuditConfig::load(&config)?;
            let rows = qbm_sensitivity(&cfg)?;
            write(&out, "sensitivity.csv", &sensitivity_csv(&rows))
        }
        Command::Synth { spec, out } => {
            let text = fs::read_to_string(&spec).map_err(|e| Error::Io { path: spec.clone(), source: e })?;
            let spec: SynthSpec =
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", spec.display())))?;
            for path in write_synthetic_bundle(&spec, &out)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn write(dir: &Path, name: &str, body: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    println!("{}", path.display());
    Ok(())
}
