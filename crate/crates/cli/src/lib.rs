//! `onebit-mimo` command-line driver: config parsing, figure presets and
//! CSV output on top of the `onebit_mimo` engine.

pub mod config;
pub mod presets;
pub mod table;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};
use onebit_mimo::montecarlo::{run_oracle, run_soft_histogram, run_sweep, CsiMode, ExperimentSpec, Method, Metric, SweepCell, SweepRow};
use onebit_mimo::receivers::FilterKind;
use onebit_mimo::signal::QuantizerMode;
use onebit_mimo::Execution;

use config::{parse_config, ConfigSource, ExplicitSpec, RunConfig};
use presets::{figure_plan, scale_experiment, FigurePlan, HistogramPlan, Scale};
use table::{render_histograms, render_results, sort_rows, write_atomic, ResultRow};

#[derive(Debug, Parser)]
#[command(name = "onebit-mimo", version, about = "Massive MIMO uplink with 1-bit ADCs: Monte Carlo, analytic and exact evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output CSV; overrides `output` in the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed; overrides `master_seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Multiplies M and the trial counts (for quick runs).
    #[arg(long, global = true)]
    pub scale: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Monte Carlo sweep of an explicit config or a figure preset.
    Simulate,
    /// Channel-averaged analytic curves (MRC, full CSI, 1-bit).
    Analytic,
    /// Exact enumeration on a small instance, next to Monte Carlo and analytic values.
    Oracle,
    /// Runs a figure preset.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=8))]
        id: u8,
    },
    /// Parses and checks a config without running it.
    ValidateConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0:#}")]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    /// 2 for usage and config problems, 1 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

/// What a successful command did.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: Option<PathBuf>,
    pub rows: usize,
    pub failed_rows: usize,
    /// Human-readable summary for stdout.
    pub report: String,
}

/// Runs one command, inside a pool of `--workers` threads if given.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match cli.workers {
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        #[cfg(feature = "parallel")]
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building the worker pool")?;
            pool.install(|| dispatch(cli))
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => dispatch(cli),
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let scale = match cli.scale {
        None => Scale::FULL,
        Some(f) => Scale::new(f).ok_or_else(|| CliError::Usage(format!("--scale must be positive and finite, got {f}")))?,
    };
    let config = cli.config.as_deref().map(load_config).transpose()?;
    let seed = cli.seed.or(config.as_ref().map(|c| c.master_seed)).unwrap_or(0);
    let configured_out = cli.out.clone().or_else(|| config.as_ref().and_then(|c| c.output.clone()));
    let output = |default: String| configured_out.clone().unwrap_or_else(|| PathBuf::from(default));

    match cli.command {
        Command::ValidateConfig => {
            let config = config.ok_or_else(|| CliError::Usage("validate-config needs --config".into()))?;
            let what = match &config.source {
                ConfigSource::Figure(id) => format!("figure preset {id}"),
                ConfigSource::Explicit(s) => format!(
                    "M = {}, K = {}, {} with {} CSI, {} SNR points",
                    s.num_antennas,
                    s.num_users,
                    s.filter.name(),
                    s.csi.name(),
                    s.snr_db.len()
                ),
            };
            Ok(Outcome {
                output: None,
                rows: 0,
                failed_rows: 0,
                report: format!("config OK: {what}\n"),
            })
        }
        Command::Figure { id } => {
            if let Some(c) = &config {
                match c.source {
                    ConfigSource::Figure(other) if other != id => {
                        return Err(CliError::Usage(format!("config names figure {other} but the command asks for figure {id}")))
                    }
                    ConfigSource::Explicit(_) => return Err(CliError::Usage("`figure` takes a figure config, not an explicit experiment".into())),
                    _ => {}
                }
            }
            run_figure(id, seed, scale, &output(format!("figure{id}.csv")))
        }
        Command::Simulate => {
            let config = config.ok_or_else(|| CliError::Usage("simulate needs --config".into()))?;
            match &config.source {
                ConfigSource::Figure(id) => run_figure(*id, seed, scale, &output(format!("figure{id}.csv"))),
                ConfigSource::Explicit(s) => {
                    let cell = explicit_cell(s, seed, scale, Method::MonteCarlo, &s.metrics);
                    let rows = run_sweep(&[cell]);
                    finish_sweep(&rows, &output("simulate.csv".into()), String::new())
                }
            }
        }
        Command::Analytic => {
            let s = explicit(config.as_ref(), "analytic")?;
            if (s.filter, s.csi, s.quantizer) != (FilterKind::Mrc, CsiMode::Full, QuantizerMode::OneBit) {
                return Err(anyhow::anyhow!(
                    "the analytic path covers MRC with full CSI and 1-bit ADCs only (config has {}, {} CSI, {})",
                    s.filter.name(),
                    s.csi.name(),
                    s.quantizer.name()
                )
                .into());
            }
            let cell = explicit_cell(s, seed, scale, Method::Analytic, &s.metrics);
            let rows = run_sweep(&[cell]);
            finish_sweep(&rows, &output("analytic.csv".into()), String::new())
        }
        Command::Oracle => {
            let s = explicit(config.as_ref(), "oracle")?;
            let probe = ExperimentSpec {
                snr_db_grid: Vec::new(),
                ..scale_experiment(&s.to_experiment(seed), &[Metric::MiHard, Metric::Ser], scale)
            };
            run_oracle(&probe).context("oracle")?;
            let wanted = [Metric::MiHard, Metric::Ser];
            let analytic = (s.filter, s.csi, s.quantizer) == (FilterKind::Mrc, CsiMode::Full, QuantizerMode::OneBit);
            let mut cell = explicit_cell(s, seed, scale, Method::Oracle, &wanted);
            cell.metrics.extend(wanted.map(|m| (m, Method::MonteCarlo)));
            if analytic {
                cell.metrics.extend(wanted.map(|m| (m, Method::Analytic)));
            }
            let rows = run_sweep(&[cell]);
            let table = oracle_table(&rows, analytic);
            finish_sweep(&rows, &output("oracle.csv".into()), table)
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn explicit<'a>(config: Option<&'a RunConfig>, command: &str) -> Result<&'a ExplicitSpec, CliError> {
    match config.map(|c| &c.source) {
        Some(ConfigSource::Explicit(s)) => Ok(s),
        Some(ConfigSource::Figure(_)) => Err(CliError::Usage(format!("{command} needs an explicit experiment config, not a figure preset"))),
        None => Err(CliError::Usage(format!("{command} needs --config"))),
    }
}

fn explicit_cell(s: &ExplicitSpec, seed: u64, scale: Scale, method: Method, metrics: &[Metric]) -> SweepCell {
    SweepCell {
        spec: scale_experiment(&s.to_experiment(seed), metrics, scale),
        metrics: metrics.iter().map(|&m| (m, method)).collect(),
    }
}

fn run_figure(id: u8, seed: u64, scale: Scale, out: &Path) -> Result<Outcome, CliError> {
    match figure_plan(id, seed, scale).ok_or_else(|| CliError::Usage(format!("no figure preset {id}")))? {
        FigurePlan::Histogram(plan) => run_histogram_figure(&plan, out),
        FigurePlan::Sweep(cells) => {
            let rows = run_sweep(&cells);
            finish_sweep(&rows, out, String::new())
        }
    }
}

fn run_histogram_figure(plan: &HistogramPlan, out: &Path) -> Result<Outcome, CliError> {
    let spec = &plan.spec;
    let snr = spec.snr_db_grid[0];
    let cfg = spec.system_at(snr).context("histogram system")?;
    let mut panels = Vec::with_capacity(plan.channels);
    let mut report = String::new();
    for c in 0..plan.channels {
        let h = spec.channel_for(c, &cfg);
        let hist = run_soft_histogram(&h, &cfg, &plan.histogram, spec.master_seed, c, Execution::Parallel)
            .with_context(|| format!("histogram panel {}", c + 1))?;
        let _ = writeln!(
            report,
            "panel {}: TV(re) = {:.4}, TV(im) = {:.4}",
            c + 1,
            hist.real.tv_distance,
            hist.imag.tv_distance
        );
        panels.push(hist);
    }
    let rows = panels.iter().map(|p| p.real.centers.len() + p.imag.centers.len()).sum();
    write_atomic(out, &render_histograms(&panels)).with_context(|| format!("writing {}", out.display()))?;
    let _ = writeln!(report, "wrote {rows} histogram rows to {}", out.display());
    Ok(Outcome {
        output: Some(out.to_path_buf()),
        rows,
        failed_rows: 0,
        report,
    })
}

fn finish_sweep(rows: &[SweepRow], out: &Path, mut report: String) -> Result<Outcome, CliError> {
    let mut table: Vec<ResultRow> = rows.iter().map(ResultRow::from).collect();
    sort_rows(&mut table);
    write_atomic(out, &render_results(&table)).with_context(|| format!("writing {}", out.display()))?;
    let failed = table.iter().filter(|r| r.error.is_some()).count();
    let _ = writeln!(report, "wrote {} rows to {} ({failed} failed)", table.len(), out.display());
    if !table.is_empty() && failed == table.len() {
        let first = table[0].error.clone().unwrap_or_default();
        return Err(anyhow::anyhow!("every row failed (first error: {first}); see the error column of {}", out.display()).into());
    }
    Ok(Outcome {
        output: Some(out.to_path_buf()),
        rows: table.len(),
        failed_rows: failed,
        report,
    })
}

fn oracle_table(rows: &[SweepRow], analytic: bool) -> String {
    let cell = |snr: f64, metric: Metric, method: Method| -> String {
        match rows.iter().find(|r| r.snr_db == snr && r.metric == metric && r.method == method) {
            Some(SweepRow { value: Some(v), std_error: Some(se), .. }) if method == Method::MonteCarlo => format!("{v:.6} ± {se:.1e}"),
            Some(SweepRow { value: Some(v), .. }) => format!("{v:.6}"),
            _ => "failed".into(),
        }
    };
    let mut snrs: Vec<f64> = rows.iter().map(|r| r.snr_db).collect();
    snrs.dedup();
    let mut out = format!("{:>8}  {:<8}  {:>10}  {:>20}", "snr_db", "metric", "oracle", "monte carlo");
    if analytic {
        out.push_str(&format!("  {:>10}", "analytic"));
    }
    out.push('\n');
    for snr in snrs {
        for metric in [Metric::MiHard, Metric::Ser] {
            let _ = write!(
                out,
                "{snr:>8}  {:<8}  {:>10}  {:>20}",
                metric.name(),
                cell(snr, metric, Method::Oracle),
                cell(snr, metric, Method::MonteCarlo)
            );
            if analytic {
                let _ = write!(out, "  {:>10}", cell(snr, metric, Method::Analytic));
            }
            out.push('\n');
        }
    }
    out
}
