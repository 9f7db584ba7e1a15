//! Experiment engine.
//!
//! Monte Carlo estimates of hard/soft mutual information and SER,
//! soft-output histograms, channel-averaged analytic curves, the exact
//! enumeration oracle and multi-cell sweeps.
//!
//! Streams are derived from `(master_seed, purpose, trial, draw)` only, so
//! every SNR point and every sweep cell sharing a seed sees the same
//! channels, pilot symbols and unit-variance noise (common random numbers).

mod analytic_avg;
mod engine;
mod histogram;
mod oracle;
mod sweep;

pub use analytic_avg::run_mrc_analytic;
pub use engine::{
    build_filter, run_mc, run_mi_hard_mc, run_mi_soft_mc, run_ser_mc, simulate_filter, FilterCounts, DRAWS_PER_TASK,
};
pub use histogram::{run_soft_histogram, AxisHistogram, HistogramSpec, SoftHistogram};
pub use oracle::{
    exact_enumeration_oracle, exact_enumeration_oracle_all, run_oracle, OracleResult, ORACLE_MAX_ANTENNAS, ORACLE_MAX_USERS};
pub use sweep::{run_sweep, SweepCell, SweepRow};

use std::fmt;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::math::{RandomStream, StreamPurpose};
use crate::receivers::{FilterKind, LsOptions, PilotStyle};
use crate::signal::{sample_channel, ChannelMatrix, QuantizerMode, SystemConfig};

/// Where the receiver's filter comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CsiMode {
    /// Receiver knows `H`.
    Full,
    /// LS from `pilots` training slots, redrawn for every channel realization.
    Estimated { pilots: usize },
}

impl CsiMode {
    pub fn name(self) -> &'static str {
        match self {
            CsiMode::Full => "full",
            CsiMode::Estimated { .. } => "estimated",
        }
    }

    pub fn pilot_len(self) -> usize {
        match self {
            CsiMode::Full => 0,
            CsiMode::Estimated { pilots } => pilots,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSource {
    /// Fresh i.i.d. CN(0, 1) matrix per channel trial.
    Random,
    /// The same matrix for every trial.
    Fixed(ChannelMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub antennas: usize,
    pub users: usize,
    /// `σ_N²`; the SNR grid sets `Pt = σ_N²·10^(snr/10)`.
    pub noise_variance: f64,
    pub snr_db_grid: Vec<f64>,
    pub filter: FilterKind,
    pub csi: CsiMode,
    pub quantizer: QuantizerMode,
    pub channel_trials: usize,
    /// Symbol and noise draws per channel realization.
    pub inner_trials: usize,
    pub master_seed: u64,
    pub channel: ChannelSource,
    pub pilot_style: PilotStyle,
    pub ls_options: LsOptions,
    /// Finite bins per axis for the Monte Carlo soft-MI histogram.
    pub soft_bins: usize,
    pub execution: Execution,
}

impl ExperimentSpec {
    /// Full-CSI, 1-bit spec with the default MI trial counts
    /// (10² channels × 10² draws) and an empty SNR grid.
    pub fn new(antennas: usize, users: usize, filter: FilterKind) -> Self {
        Self {
            antennas,
            users,
            noise_variance: 1.0,
            snr_db_grid: Vec::new(),
            filter,
            csi: CsiMode::Full,
            quantizer: QuantizerMode::OneBit,
            channel_trials: 100,
            inner_trials: 100,
            master_seed: 0,
            channel: ChannelSource::Random,
            pilot_style: PilotStyle::Random,
            ls_options: LsOptions::default(),
            soft_bins: 8,
            execution: Execution::default(),
        }
    }

    pub fn system_at(&self, snr_db: f64) -> Result<SystemConfig> {
        let base = SystemConfig::new(self.antennas, self.users, 1.0, self.noise_variance)?;
        Ok(base.with_snr_db(snr_db))
    }

    pub fn validate(&self) -> Result<()> {
        SystemConfig::new(self.antennas, self.users, 1.0, self.noise_variance)?;
        if self.channel_trials == 0 {
            return Err(Error::invalid("channel_trials must be at least 1"));
        }
        if self.inner_trials == 0 {
            return Err(Error::invalid("inner_trials must be at least 1"));
        }
        if let Some(bad) = self.snr_db_grid.iter().find(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("SNR grid contains {bad}")));
        }
        if let ChannelSource::Fixed(h) = &self.channel {
            if h.shape() != (self.antennas, self.users) {
                return Err(Error::ShapeMismatch {
                    expected: format!("{}x{} channel", self.antennas, self.users),
                    actual: format!("{}x{}", h.rows(), h.cols()),
                });
            }
        }
        if self.soft_bins < 8 {
            return Err(Error::invalid("soft_bins must be at least 8"));
        }
        match (self.filter, self.csi) {
            (FilterKind::DirectLs, CsiMode::Full) => {
                return Err(Error::Unsupported("the direct LS filter is built from pilots and needs estimated CSI".into()))
            }
            (FilterKind::DirectLs, CsiMode::Estimated { pilots }) if pilots < self.antennas => {
                return Err(Error::InsufficientPilots {
                    required: self.antennas,
                    available: pilots,
                })
            }
            (_, CsiMode::Estimated { pilots }) if pilots < self.users => {
                return Err(Error::InsufficientPilots {
                    required: self.users,
                    available: pilots,
                })
            }
            _ => {}
        }
        Ok(())
    }

    /// Channel realization of trial `t`.
    pub fn channel_for(&self, trial: usize, config: &SystemConfig) -> ChannelMatrix {
        match &self.channel {
            ChannelSource::Fixed(h) => h.clone(),
            ChannelSource::Random => {
                sample_channel(config, &mut RandomStream::derive(self.master_seed, StreamPurpose::Channel, trial, 0))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    MiHard,
    MiSoft,
    Ser,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::MiHard => "mi_hard",
            Metric::MiSoft => "mi_soft",
            Metric::Ser => "ser",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    MonteCarlo,
    Analytic,
    Oracle,
}

impl Method {
    pub fn suffix(self) -> &'static str {
        match self {
            Method::MonteCarlo => "mc",
            Method::Analytic => "analytic",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricPoint {
    pub snr_db: f64,
    pub value: f64,
    pub std_error: f64,
    /// Channel/symbol/noise triplets (or channel draws for analytic curves).
    pub trials: usize,
}

/// One curve: a metric evaluated at every SNR of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricEstimate {
    pub metric: Metric,
    pub method: Method,
    pub points: Vec<MetricPoint>,
}

impl MetricEstimate {
    /// CSV name such as `mi_hard_mc`.
    pub fn label(&self) -> String {
        format!("{}_{}", self.metric.name(), self.method.suffix())
    }

    pub fn at(&self, snr_db: f64) -> Option<&MetricPoint> {
        self.points.iter().find(|p| p.snr_db == snr_db)
    }
}

impl fmt::Display for MetricEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.label())?;
        for p in &self.points {
            write!(f, " [{} dB: {:.6} ± {:.2e}]", p.snr_db, p.value, p.std_error)?;
        }
        Ok(())
    }
}

/// Mean and standard error of the mean (zero for fewer than two samples).
pub(crate) fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_bad_specs() {
        let mut spec = ExperimentSpec::new(4, 2, FilterKind::Mrc);
        assert!(spec.validate().is_ok());
        spec.channel_trials = 0;
        assert!(spec.validate().is_err());

        let mut spec = ExperimentSpec::new(8, 2, FilterKind::DirectLs);
        assert!(matches!(spec.validate(), Err(Error::Unsupported(_))));
        spec.csi = CsiMode::Estimated { pilots: 7 };
        assert!(matches!(spec.validate(), Err(Error::InsufficientPilots { required: 8, .. })));
        spec.csi = CsiMode::Estimated { pilots: 8 };
        assert!(spec.validate().is_ok());

        let mut spec = ExperimentSpec::new(8, 3, FilterKind::Zf);
        spec.csi = CsiMode::Estimated { pilots: 2 };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn std_error_of_constant_is_zero() {
        assert_eq!(mean_and_std_error(&[0.5; 10]), (0.5, 0.0));
        let (m, se) = mean_and_std_error(&[0.0, 1.0]);
        assert_eq!(m, 0.5);
        assert!((se - 0.5).abs() < 1e-15);
    }
}
