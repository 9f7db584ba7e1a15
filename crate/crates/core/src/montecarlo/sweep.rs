use super::{run_mc, run_mrc_analytic, run_oracle, CsiMode, ExperimentSpec, Method, Metric, MetricEstimate};
use crate::error::Result;
use crate::receivers::FilterKind;
use crate::signal::QuantizerMode;

/// One curve family of a sweep: a spec and the metrics to evaluate on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub spec: ExperimentSpec,
    pub metrics: Vec<(Metric, Method)>,
}

/// One `(cell, SNR, metric)` result. A failed evaluation keeps its row
/// with `value = None` and the message in `error`. Analytic and oracle rows
/// report `inner_trials = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cell: usize,
    pub snr_db: f64,
    pub filter: FilterKind,
    pub csi: CsiMode,
    pub quantizer: QuantizerMode,
    pub metric: Metric,
    pub method: Method,
    pub value: Option<f64>,
    pub std_error: Option<f64>,
    pub channel_trials: usize,
    pub inner_trials: usize,
    pub master_seed: u64,
    pub antennas: usize,
    pub users: usize,
    pub error: Option<String>,
}

impl SweepRow {
    /// CSV metric name such as `ser_mc`.
    pub fn label(&self) -> String {
        format!("{}_{}", self.metric.name(), self.method.suffix())
    }
}

/// Evaluates every cell at every SNR of its grid. Errors are recorded per
/// `(cell, SNR, method)` and the sweep carries on.
pub fn run_sweep(cells: &[SweepCell]) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for (index, cell) in cells.iter().enumerate() {
        let spec = &cell.spec;
        for &snr in &spec.snr_db_grid {
            let single = ExperimentSpec {
                snr_db_grid: vec![snr],
                ..spec.clone()
            };
            for method in [Method::MonteCarlo, Method::Analytic, Method::Oracle] {
                let wanted: Vec<Metric> = cell.metrics.iter().filter(|(_, m)| *m == method).map(|(x, _)| *x).collect();
                if wanted.is_empty() {
                    continue;
                }
                let result: Result<Vec<MetricEstimate>> = match method {
                    Method::MonteCarlo => run_mc(&single, &wanted),
                    Method::Analytic => run_mrc_analytic(&single),
                    Method::Oracle => run_oracle(&single),
                };
                for metric in wanted {
                    let mut row = SweepRow {
                        cell: index,
                        snr_db: snr,
                        filter: spec.filter,
                        csi: spec.csi,
                        quantizer: spec.quantizer,
                        metric,
                        method,
                        value: None,
                        std_error: None,
                        channel_trials: spec.channel_trials,
                        inner_trials: if method == Method::MonteCarlo { spec.inner_trials } else { 0 },
                        master_seed: spec.master_seed,
                        antennas: spec.antennas,
                        users: spec.users,
                        error: None,
                    };
                    match &result {
                        Ok(curves) => match curves.iter().find(|c| c.metric == metric).and_then(|c| c.points.first()) {
                            Some(p) => {
                                row.value = Some(p.value);
                                row.std_error = Some(p.std_error);
                            }
                            None => row.error = Some(format!("{} is not available from the {} path", metric.name(), method.suffix())),
                        },
                        Err(e) => row.error = Some(e.to_string()),
                    }
                    rows.push(row);
                }
            }
        }
    }
    rows
}
