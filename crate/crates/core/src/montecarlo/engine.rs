use num_complex::Complex64;

use super::{mean_and_std_error, CsiMode, ExperimentSpec, Method, Metric, MetricEstimate, MetricPoint};
use crate::analytic::{mi_hard, mutual_information_uniform, DiscretizationGrid, TransitionPmf};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::math::{RandomStream, StreamPurpose};
use crate::receivers::{
    ls_channel_estimate, ls_direct_filter, mrc_filter, zf_filter, ChannelEstimate, FilterKind, PilotBlock, ReceiveFilter,
};
use crate::signal::{quantize_sample, ChannelMatrix, QpskSymbol, QuantizerMode, SystemConfig};

/// Symbol/noise draws handled by one task; each task owns the stream
/// `(seed, Data, trial, chunk)`.
pub const DRAWS_PER_TASK: usize = 4096;

/// What one filter did on one channel over a batch of symbol/noise draws.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterCounts {
    /// `transitions[k][x][x̂]`.
    pub transitions: Vec<[[u64; 4]; 4]>,
    pub draws: u64,
    /// Σ over draws of the number of users in error, and of its square.
    pub errors: u64,
    pub errors_sq: u64,
    /// Soft estimates per user, grouped by the transmitted symbol.
    pub soft: Option<Vec<[Vec<Complex64>; 4]>>,
}

impl FilterCounts {
    fn empty(users: usize, collect_soft: bool) -> Self {
        Self {
            transitions: vec![[[0; 4]; 4]; users],
            draws: 0,
            errors: 0,
            errors_sq: 0,
            soft: collect_soft.then(|| (0..users).map(|_| Default::default()).collect()),
        }
    }

    fn merge(&mut self, other: FilterCounts) {
        for (a, b) in self.transitions.iter_mut().zip(&other.transitions) {
            for (ra, rb) in a.iter_mut().zip(b) {
                for (x, y) in ra.iter_mut().zip(rb) {
                    *x += y;
                }
            }
        }
        self.draws += other.draws;
        self.errors += other.errors;
        self.errors_sq += other.errors_sq;
        if let (Some(mine), Some(theirs)) = (&mut self.soft, other.soft) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                for (va, vb) in a.iter_mut().zip(b) {
                    va.extend(vb);
                }
            }
        }
    }

    pub fn users(&self) -> usize {
        self.transitions.len()
    }

    /// Error fraction over all draws and users.
    pub fn ser(&self) -> f64 {
        self.errors as f64 / (self.draws as f64 * self.users() as f64)
    }

    /// Standard error of [`FilterCounts::ser`] treating draws as independent
    /// and users within a draw as correlated.
    pub fn ser_std_error(&self) -> f64 {
        let n = self.draws as f64;
        if self.draws < 2 {
            return 0.0;
        }
        let k = self.users() as f64;
        let mean = self.errors as f64 / (n * k);
        let second = self.errors_sq as f64 / (n * k * k);
        let var = ((second - mean * mean) * n / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }

    /// Plug-in hard MI of each user (uniform prior, per-row empirical pmfs).
    pub fn mi_hard_per_user(&self) -> Vec<f64> {
        self.transitions
            .iter()
            .map(|c| mi_hard(&TransitionPmf::from_counts(c)).expect("empirical pmf is valid"))
            .collect()
    }

    /// Plug-in soft MI of each user on a zero-aligned grid spanning the
    /// samples. `None` unless soft samples were collected.
    pub fn mi_soft_per_user(&self, bins: usize) -> Option<Result<Vec<f64>>> {
        let soft = self.soft.as_ref()?;
        Some(soft.iter().map(|groups| plug_in_soft_mi(groups, bins)).collect())
    }
}

fn plug_in_soft_mi(groups: &[Vec<Complex64>; 4], bins: usize) -> Result<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for z in groups.iter().flatten() {
        lo = lo.min(z.re.min(z.im));
        hi = hi.max(z.re.max(z.im));
    }
    if !lo.is_finite() {
        return Err(Error::invalid("no soft samples collected"));
    }
    let pad = 1e-9 * lo.abs().max(hi.abs()).max(1e-300);
    let grid = DiscretizationGrid::zero_aligned(bins, lo.min(-pad), hi.max(pad))?;
    let cells = grid.cells_per_axis();
    let rows: Vec<Vec<f64>> = groups
        .iter()
        .map(|samples| {
            if samples.is_empty() {
                return vec![1.0 / (cells * cells) as f64; cells * cells];
            }
            let mut counts = vec![0.0; cells * cells];
            for z in samples {
                counts[grid.cell_of(z.re) * cells + grid.cell_of(z.im)] += 1.0;
            }
            let n = samples.len() as f64;
            counts.iter_mut().for_each(|c| *c /= n);
            counts
        })
        .collect();
    Ok(mutual_information_uniform(&rows).min(2.0))
}

/// Builds the receive filter of one channel trial: from `H` directly for
/// full CSI, otherwise from a fresh pilot block on stream `(seed, Pilot, trial)`.
pub fn build_filter(spec: &ExperimentSpec, h: &ChannelMatrix, config: &SystemConfig, trial: usize) -> Result<ReceiveFilter> {
    let estimate = match spec.csi {
        CsiMode::Full => ChannelEstimate::full(h),
        CsiMode::Estimated { pilots } => {
            let mut stream = RandomStream::derive(spec.master_seed, StreamPurpose::Pilot, trial, 0);
            let block = PilotBlock::transmit(h, config, pilots, spec.pilot_style, spec.quantizer, &mut stream)?;
            if spec.filter == FilterKind::DirectLs {
                return ls_direct_filter(&block, spec.ls_options);
            }
            ls_channel_estimate(&block, config, spec.ls_options)?
        }
    };
    match spec.filter {
        FilterKind::Mrc => mrc_filter(&estimate),
        FilterKind::Zf => zf_filter(&estimate),
        FilterKind::DirectLs => Err(Error::Unsupported("the direct LS filter needs estimated CSI".into())),
    }
}

fn simulate_chunk(
    h: &ChannelMatrix,
    config: &SystemConfig,
    filter: &ReceiveFilter,
    quantizer: QuantizerMode,
    stream: &mut RandomStream,
    draws: usize,
    collect_soft: bool,
) -> FilterCounts {
    let (m, k) = h.shape();
    let amp = config.transmit_power.sqrt();
    let noise_std = config.noise_std();
    let hd = h.as_slice();
    let ad = filter.matrix().as_slice();
    let mut out = FilterCounts::empty(k, collect_soft);
    let mut idx = vec![0usize; k];
    let mut x = vec![Complex64::new(0.0, 0.0); k];
    let mut soft = vec![Complex64::new(0.0, 0.0); k];
    for _ in 0..draws {
        for (i, xi) in idx.iter_mut().zip(x.iter_mut()) {
            *i = stream.index_below(4);
            *xi = QpskSymbol::ALL[*i].value();
        }
        soft.iter_mut().for_each(|s| *s = Complex64::new(0.0, 0.0));
        for i in 0..m {
            let row = &hd[i * k..(i + 1) * k];
            let hx: Complex64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
            let r = hx * amp + stream.unit_complex_gaussian() * noise_std;
            let y = match quantizer {
                QuantizerMode::OneBit => quantize_sample(r),
                QuantizerMode::Bypass => r,
            };
            for (s, a) in soft.iter_mut().zip(&ad[i * k..(i + 1) * k]) {
                *s += a.conj() * y;
            }
        }
        let mut wrong = 0u64;
        for (user, (&sent, &z)) in idx.iter().zip(&soft).enumerate() {
            let decided = QpskSymbol::from_quadrant(z).index();
            out.transitions[user][sent][decided] += 1;
            wrong += u64::from(decided != sent);
            if let Some(s) = &mut out.soft {
                s[user][sent].push(z);
            }
        }
        out.errors += wrong;
        out.errors_sq += wrong * wrong;
    }
    out.draws = draws as u64;
    out
}

/// Runs `draws` symbol/noise realizations through a fixed channel and
/// filter. Work is split into tasks of [`DRAWS_PER_TASK`] draws whose
/// streams are `(seed, Data, trial, task)`, and merged in task order.
#[allow(clippy::too_many_arguments)]
pub fn simulate_filter(
    h: &ChannelMatrix,
    config: &SystemConfig,
    filter: &ReceiveFilter,
    quantizer: QuantizerMode,
    draws: usize,
    master_seed: u64,
    trial: usize,
    execution: Execution,
    collect_soft: bool,
) -> Result<FilterCounts> {
    if h.shape() != filter.matrix().shape() || h.shape() != (config.antennas, config.users) {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{} channel and filter", config.antennas, config.users),
            actual: format!("{:?} channel, {:?} filter", h.shape(), filter.matrix().shape()),
        });
    }
    let tasks = draws.div_ceil(DRAWS_PER_TASK);
    let parts = execution.map(tasks, |t| {
        let n = DRAWS_PER_TASK.min(draws - t * DRAWS_PER_TASK);
        let mut stream = RandomStream::derive(master_seed, StreamPurpose::Data, trial, t);
        simulate_chunk(h, config, filter, quantizer, &mut stream, n, collect_soft)
    });
    let mut total = FilterCounts::empty(config.users, collect_soft);
    for p in parts {
        total.merge(p);
    }
    Ok(total)
}

/// Monte Carlo estimates of the requested metrics, one curve per metric in
/// request order.
///
/// Standard errors are batch means over channel realizations when there
/// are at least two; with a single channel the SER uses per-draw
/// variability and the MI uses the spread over users.
pub fn run_mc(spec: &ExperimentSpec, metrics: &[Metric]) -> Result<Vec<MetricEstimate>> {
    spec.validate()?;
    let collect_soft = metrics.contains(&Metric::MiSoft);
    let mut curves: Vec<MetricEstimate> = metrics
        .iter()
        .map(|&metric| MetricEstimate {
            metric,
            method: Method::MonteCarlo,
            points: Vec::with_capacity(spec.snr_db_grid.len()),
        })
        .collect();
    for &snr in &spec.snr_db_grid {
        let config = spec.system_at(snr)?;
        let outcomes = spec.execution.map(spec.channel_trials, |t| -> Result<FilterCounts> {
            let h = spec.channel_for(t, &config);
            let filter = build_filter(spec, &h, &config, t)?;
            simulate_filter(&h, &config, &filter, spec.quantizer, spec.inner_trials, spec.master_seed, t, spec.execution, collect_soft)
        });
        let outcomes: Vec<FilterCounts> = outcomes.into_iter().collect::<Result<_>>().map_err(|e| e.at_snr(snr))?;
        let trials = spec.channel_trials * spec.inner_trials;
        for curve in &mut curves {
            let (value, std_error) = match curve.metric {
                Metric::Ser => ser_point(&outcomes),
                Metric::MiHard => mi_point(outcomes.iter().map(|o| o.mi_hard_per_user()).collect()),
                Metric::MiSoft => {
                    let per_trial = outcomes
                        .iter()
                        .map(|o| o.mi_soft_per_user(spec.soft_bins).expect("soft samples collected"))
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| e.at_snr(snr))?;
                    mi_point(per_trial)
                }
            };
            curve.points.push(MetricPoint {
                snr_db: snr,
                value,
                std_error,
                trials,
            });
        }
    }
    Ok(curves)
}

fn ser_point(outcomes: &[FilterCounts]) -> (f64, f64) {
    if outcomes.len() >= 2 {
        let per_trial: Vec<f64> = outcomes.iter().map(FilterCounts::ser).collect();
        let (m, se) = mean_and_std_error(&per_trial);
        (m.clamp(0.0, 1.0), se)
    } else {
        (outcomes[0].ser(), outcomes[0].ser_std_error())
    }
}

fn mi_point(per_trial_users: Vec<Vec<f64>>) -> (f64, f64) {
    let (m, se) = if per_trial_users.len() >= 2 {
        let per_trial: Vec<f64> = per_trial_users.iter().map(|u| u.iter().sum::<f64>() / u.len() as f64).collect();
        mean_and_std_error(&per_trial)
    } else {
        mean_and_std_error(&per_trial_users[0])
    };
    (m.clamp(0.0, 2.0), se)
}

fn single(spec: &ExperimentSpec, metric: Metric) -> Result<MetricEstimate> {
    Ok(run_mc(spec, &[metric])?.remove(0))
}

/// Fraction of `(H, x, n)` triplets with `x̂_k ≠ x_k`, averaged over users.
pub fn run_ser_mc(spec: &ExperimentSpec) -> Result<MetricEstimate> {
    single(spec, Metric::Ser)
}

/// Plug-in MI of the empirical `x_k → x̂_k` channel per realization of `H`,
/// averaged over users and channels. Needs at least 16 draws per channel.
pub fn run_mi_hard_mc(spec: &ExperimentSpec) -> Result<MetricEstimate> {
    if spec.inner_trials < 16 {
        return Err(Error::invalid("MI estimation needs at least 16 inner trials per channel"));
    }
    single(spec, Metric::MiHard)
}

/// Plug-in MI of the discretized soft estimate on a per-channel zero-aligned
/// grid of `spec.soft_bins` bins per axis.
pub fn run_mi_soft_mc(spec: &ExperimentSpec) -> Result<MetricEstimate> {
    if spec.inner_trials < 16 {
        return Err(Error::invalid("MI estimation needs at least 16 inner trials per channel"));
    }
    single(spec, Metric::MiSoft)
}
