use super::{mean_and_std_error, CsiMode, ExperimentSpec, Method, Metric, MetricEstimate, MetricPoint};
use crate::analytic::{analyze_channel, DiscretizationGrid};
use crate::error::{Error, Result};
use crate::receivers::FilterKind;
use crate::signal::QuantizerMode;

/// Analytic hard MI, soft MI and SER of full-CSI MRC with 1-bit ADCs,
/// averaged over `spec.channel_trials` channel draws (the same draws the
/// Monte Carlo engine uses for that seed). Returns the three curves in
/// that order.
pub fn run_mrc_analytic(spec: &ExperimentSpec) -> Result<Vec<MetricEstimate>> {
    spec.validate()?;
    if spec.filter != FilterKind::Mrc || spec.csi != CsiMode::Full || spec.quantizer != QuantizerMode::OneBit {
        return Err(Error::Unsupported(format!(
            "the analytic path covers MRC with full CSI and 1-bit ADCs only (got {}, {} CSI, {})",
            spec.filter.name(),
            spec.csi.name(),
            spec.quantizer.name()
        )));
    }
    let mut curves: Vec<MetricEstimate> = [Metric::MiHard, Metric::MiSoft, Metric::Ser]
        .into_iter()
        .map(|metric| MetricEstimate {
            metric,
            method: Method::Analytic,
            points: Vec::new(),
        })
        .collect();
    for &snr in &spec.snr_db_grid {
        let config = spec.system_at(snr)?;
        let per_channel = spec.execution.map(spec.channel_trials, |t| -> Result<[f64; 3]> {
            let h = spec.channel_for(t, &config);
            let users = analyze_channel(&h, &config, DiscretizationGrid::DEFAULT_BINS)?;
            let k = users.len() as f64;
            Ok([
                users.iter().map(|u| u.mi_hard).sum::<f64>() / k,
                users.iter().map(|u| u.mi_soft).sum::<f64>() / k,
                users.iter().map(|u| u.ser).sum::<f64>() / k,
            ])
        });
        let per_channel: Vec<[f64; 3]> = per_channel.into_iter().collect::<Result<_>>().map_err(|e| e.at_snr(snr))?;
        for (i, curve) in curves.iter_mut().enumerate() {
            let values: Vec<f64> = per_channel.iter().map(|v| v[i]).collect();
            let (value, std_error) = mean_and_std_error(&values);
            curve.points.push(MetricPoint {
                snr_db: snr,
                value,
                std_error,
                trials: spec.channel_trials,
            });
        }
    }
    Ok(curves)
}
