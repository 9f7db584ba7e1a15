use num_complex::Complex64;

use super::DRAWS_PER_TASK;
use crate::analytic::{soft_moments, SoftEstimateMoments};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::math::{erfc, RandomStream, StreamPurpose};
use crate::receivers::{mrc_filter, ChannelEstimate};
use crate::signal::{quantize_sample, ChannelMatrix, QpskSymbol, SystemConfig};

/// Empirical marginal of the MRC soft estimate of one user at a fixed
/// channel and a fixed transmitted symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramSpec {
    pub user: usize,
    pub symbol: QpskSymbol,
    pub draws: usize,
    pub bins: usize,
    /// Histogram range; defaults to the analytic mean ± 5 per-axis standard
    /// deviations.
    pub range: Option<(f64, f64)>,
}

impl HistogramSpec {
    pub fn new(user: usize, symbol: QpskSymbol, draws: usize) -> Self {
        Self {
            user,
            symbol,
            draws,
            bins: 50,
            range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisHistogram {
    pub axis: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub centers: Vec<f64>,
    pub empirical_density: Vec<f64>,
    pub analytic_density: Vec<f64>,
    /// `½ Σ |p̂_b − p_b|` over the bins plus the two tails outside the range.
    pub tv_distance: f64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub analytic_mean: f64,
    pub analytic_variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftHistogram {
    pub moments: SoftEstimateMoments,
    pub draws: usize,
    pub real: AxisHistogram,
    pub imag: AxisHistogram,
}

/// Soft-output histogram of `x̃_k` under full-CSI MRC with 1-bit
/// observations, against the Gaussian model of the analytic module. The
/// interferers and noise are redrawn for every sample; `x_k` is fixed.
/// Streams are `(seed, Auxiliary, trial, task)`.
pub fn run_soft_histogram(
    h: &ChannelMatrix,
    config: &SystemConfig,
    spec: &HistogramSpec,
    master_seed: u64,
    trial: usize,
    execution: Execution,
) -> Result<SoftHistogram> {
    config.validate()?;
    if spec.bins < 10 {
        return Err(Error::invalid(format!("histograms need at least 10 bins, got {}", spec.bins)));
    }
    if spec.user >= config.users || h.shape() != (config.antennas, config.users) {
        return Err(Error::invalid("histogram user index or channel shape out of range"));
    }
    if spec.draws == 0 {
        return Err(Error::invalid("histograms need at least one draw"));
    }
    let moments = soft_moments(h, spec.user, spec.symbol, config)?;
    let filter = mrc_filter(&ChannelEstimate::full(h))?;
    let column: Vec<Complex64> = filter.matrix().column(spec.user);

    let tasks = spec.draws.div_ceil(DRAWS_PER_TASK);
    let samples: Vec<Complex64> = execution
        .map(tasks, |t| {
            let n = DRAWS_PER_TASK.min(spec.draws - t * DRAWS_PER_TASK);
            let mut stream = RandomStream::derive(master_seed, StreamPurpose::Auxiliary, trial, t);
            draw_soft(h, config, &column, spec, &mut stream, n)
        })
        .into_iter()
        .flatten()
        .collect();

    let axis = |name, pick: fn(Complex64) -> f64| {
        let values: Vec<f64> = samples.iter().map(|&z| pick(z)).collect();
        axis_histogram(name, &values, pick(moments.mean), moments.variance / 2.0, spec)
    };
    Ok(SoftHistogram {
        moments,
        draws: spec.draws,
        real: axis("re", |z| z.re)?,
        imag: axis("im", |z| z.im)?,
    })
}

fn draw_soft(
    h: &ChannelMatrix,
    config: &SystemConfig,
    column: &[Complex64],
    spec: &HistogramSpec,
    stream: &mut RandomStream,
    draws: usize,
) -> Vec<Complex64> {
    let (m, k) = h.shape();
    let amp = config.transmit_power.sqrt();
    let noise_std = config.noise_std();
    let mut x = vec![Complex64::new(0.0, 0.0); k];
    let mut out = Vec::with_capacity(draws);
    for _ in 0..draws {
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = if j == spec.user {
                spec.symbol.value()
            } else {
                QpskSymbol::ALL[stream.index_below(4)].value()
            };
        }
        let mut z = Complex64::new(0.0, 0.0);
        for i in 0..m {
            let hx: Complex64 = h.row(i).iter().zip(&x).map(|(a, b)| a * b).sum();
            let y = quantize_sample(hx * amp + stream.unit_complex_gaussian() * noise_std);
            z += column[i].conj() * y;
        }
        out.push(z);
    }
    out
}

fn axis_histogram(axis: &'static str, values: &[f64], mean: f64, variance: f64, spec: &HistogramSpec) -> Result<AxisHistogram> {
    let sd = variance.sqrt();
    let (lo, hi) = spec.range.unwrap_or((mean - 5.0 * sd, mean + 5.0 * sd));
    if !(hi > lo) {
        return Err(Error::invalid(format!("histogram range [{lo}, {hi}] is empty")));
    }
    let bins = spec.bins;
    let width = (hi - lo) / bins as f64;
    // cells: [0] below lo, [1..=bins] finite bins, [bins + 1] at or above hi
    let mut counts = vec![0u64; bins + 2];
    for &v in values {
        let cell = if v < lo {
            0
        } else if v >= hi {
            bins + 1
        } else {
            1 + (((v - lo) / width) as usize).min(bins - 1)
        };
        counts[cell] += 1;
    }
    let n = values.len() as f64;
    let cdf_upper = |t: f64| -> f64 {
        // P(X ≥ t)
        if sd > 0.0 {
            0.5 * erfc((t - mean) / (sd * std::f64::consts::SQRT_2))
        } else if t <= mean {
            1.0
        } else {
            0.0
        }
    };
    let edge = |b: usize| lo + width * b as f64;
    let mut model = Vec::with_capacity(bins + 2);
    model.push(1.0 - cdf_upper(lo));
    for b in 0..bins {
        model.push((cdf_upper(edge(b)) - cdf_upper(edge(b + 1))).max(0.0));
    }
    model.push(cdf_upper(hi));
    let tv = 0.5
        * counts
            .iter()
            .zip(&model)
            .map(|(&c, &p)| (c as f64 / n - p).abs())
            .sum::<f64>();

    let emp_mean = values.iter().sum::<f64>() / n;
    let emp_var = values.iter().map(|v| (v - emp_mean) * (v - emp_mean)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(AxisHistogram {
        axis,
        lo,
        hi,
        centers: (0..bins).map(|b| lo + width * (b as f64 + 0.5)).collect(),
        empirical_density: counts[1..=bins].iter().map(|&c| c as f64 / (n * width)).collect(),
        analytic_density: model[1..=bins].iter().map(|p| p / width).collect(),
        tv_distance: tv,
        empirical_mean: emp_mean,
        empirical_variance: emp_var,
        analytic_mean: mean,
        analytic_variance: variance,
    })
}
