//! Figure presets at M = 400, K = 20 and the `--scale` reduction.

use onebit_mimo::montecarlo::{CsiMode, ExperimentSpec, HistogramSpec, Method, Metric, SweepCell};
use onebit_mimo::receivers::{FilterKind, PilotLength};
use onebit_mimo::signal::{QpskSymbol, QuantizerMode};

pub const PRESET_ANTENNAS: usize = 400;
pub const PRESET_USERS: usize = 20;
/// Channel × inner draws for MI curves.
pub const MI_TRIALS: (usize, usize) = (100, 100);
/// Channel × inner draws for SER curves (10⁵ triplets).
pub const SER_TRIALS: (usize, usize) = (1000, 100);
pub const HISTOGRAM_SNR_DB: f64 = -20.0;
pub const HISTOGRAM_CHANNELS: usize = 3;
pub const HISTOGRAM_DRAWS: usize = 100_000;
pub const HISTOGRAM_BINS: usize = 50;

/// −30, −25, …, 10 dB.
pub fn figure_snr_grid() -> Vec<f64> {
    (-6..=2).map(|i| 5.0 * i as f64).collect()
}

/// Multiplies `M` and the trial counts. A scaled `M` never drops below
/// `K` (unless it started there), MI inner draws never below 16 and
/// counts never below 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scale(f64);

impl Scale {
    pub const FULL: Scale = Scale(1.0);

    pub fn new(factor: f64) -> Option<Self> {
        (factor.is_finite() && factor > 0.0).then_some(Scale(factor))
    }

    pub fn factor(self) -> f64 {
        self.0
    }

    fn count(self, n: usize) -> usize {
        ((n as f64 * self.0).round() as usize).max(1)
    }

    pub fn antennas(self, m: usize, k: usize) -> usize {
        self.count(m).max(k.min(m))
    }

    pub fn trials(self, n: usize) -> usize {
        self.count(n)
    }

    pub fn inner_trials(self, n: usize, needs_mi: bool) -> usize {
        let scaled = self.count(n);
        if needs_mi {
            scaled.max(16.min(n))
        } else {
            scaled
        }
    }
}

/// Applies `scale` to an explicit experiment. Pilot lengths keep their
/// ratio to `M` and still meet the filter's minimum.
pub fn scale_experiment(spec: &ExperimentSpec, metrics: &[Metric], scale: Scale) -> ExperimentSpec {
    let mut out = spec.clone();
    out.antennas = scale.antennas(spec.antennas, spec.users);
    out.channel_trials = scale.trials(spec.channel_trials);
    let needs_mi = metrics.iter().any(|m| matches!(m, Metric::MiHard | Metric::MiSoft));
    out.inner_trials = scale.inner_trials(spec.inner_trials, needs_mi);
    if let CsiMode::Estimated { pilots } = spec.csi {
        let min = if spec.filter == FilterKind::DirectLs { out.antennas } else { out.users };
        let ratio = out.antennas as f64 / spec.antennas as f64;
        out.csi = CsiMode::Estimated {
            pilots: ((pilots as f64 * ratio).round() as usize).max(min),
        };
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramPlan {
    /// Template: MRC, full CSI, 1-bit, one SNR, one channel trial per panel.
    pub spec: ExperimentSpec,
    pub channels: usize,
    pub histogram: HistogramSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FigurePlan {
    Histogram(HistogramPlan),
    Sweep(Vec<SweepCell>),
}

struct Curve {
    filter: FilterKind,
    pilots: Option<PilotLength>,
    quantizer: QuantizerMode,
}

fn curve(filter: FilterKind, pilots: Option<PilotLength>) -> Curve {
    Curve {
        filter,
        pilots,
        quantizer: QuantizerMode::OneBit,
    }
}

fn cells(curves: &[Curve], metrics: &[(Metric, Method)], trials: (usize, usize), seed: u64, scale: Scale) -> Vec<SweepCell> {
    let users = PRESET_USERS;
    let antennas = scale.antennas(PRESET_ANTENNAS, users);
    let needs_mi = metrics.iter().any(|(m, _)| matches!(m, Metric::MiHard | Metric::MiSoft));
    curves
        .iter()
        .map(|c| {
            let mut spec = ExperimentSpec::new(antennas, users, c.filter);
            spec.snr_db_grid = figure_snr_grid();
            spec.csi = match c.pilots {
                None => CsiMode::Full,
                Some(len) => CsiMode::Estimated {
                    pilots: len.resolve(antennas, users),
                },
            };
            spec.quantizer = c.quantizer;
            spec.channel_trials = scale.trials(trials.0);
            spec.inner_trials = scale.inner_trials(trials.1, needs_mi);
            spec.master_seed = seed;
            SweepCell {
                spec,
                metrics: metrics.to_vec(),
            }
        })
        .collect()
}

fn pilot_study() -> Vec<Curve> {
    let mut out = Vec::new();
    for filter in [FilterKind::Mrc, FilterKind::Zf] {
        for pilots in [None, Some(PilotLength::FIVE_K), Some(PilotLength::TEN_K), Some(PilotLength::FIFTY_K)] {
            out.push(curve(filter, pilots));
        }
    }
    out
}

fn quantizer_study() -> Vec<Curve> {
    let mut out = Vec::new();
    for quantizer in [QuantizerMode::OneBit, QuantizerMode::Bypass] {
        for pilots in [None, Some(PilotLength::FIFTY_K)] {
            out.push(Curve {
                filter: FilterKind::Zf,
                pilots,
                quantizer,
            });
        }
    }
    out
}

/// The experiment behind figure `id` (1 to 8).
///
/// 1. soft-output histograms, MRC full CSI, −20 dB, three channels
/// 2. MI of MRC/ZF (full CSI, N = 5M) and DirectLS (N = 5M, 50M)
/// 3. MI of MRC/ZF with full CSI and N = 5K, 10K, 50K
/// 4. SER of the figure 3 cells
/// 5. MI of ZF, full CSI and N = 50K, with and without the quantizer
/// 6. SER of the figure 5 cells
/// 7. MRC full CSI hard and soft MI, Monte Carlo against analytic
/// 8. MRC full CSI SER, Monte Carlo against analytic
pub fn figure_plan(id: u8, seed: u64, scale: Scale) -> Option<FigurePlan> {
    let mc = |m| (m, Method::MonteCarlo);
    let plan = match id {
        1 => {
            let antennas = scale.antennas(PRESET_ANTENNAS, PRESET_USERS);
            let mut spec = ExperimentSpec::new(antennas, PRESET_USERS, FilterKind::Mrc);
            spec.snr_db_grid = vec![HISTOGRAM_SNR_DB];
            spec.master_seed = seed;
            spec.channel_trials = HISTOGRAM_CHANNELS;
            spec.inner_trials = scale.trials(HISTOGRAM_DRAWS);
            let mut histogram = HistogramSpec::new(0, QpskSymbol::ALL[0], spec.inner_trials);
            histogram.bins = HISTOGRAM_BINS;
            FigurePlan::Histogram(HistogramPlan {
                spec,
                channels: HISTOGRAM_CHANNELS,
                histogram,
            })
        }
        2 => {
            let curves = [
                curve(FilterKind::Mrc, None),
                curve(FilterKind::Mrc, Some(PilotLength::FIVE_M)),
                curve(FilterKind::Zf, None),
                curve(FilterKind::Zf, Some(PilotLength::FIVE_M)),
                curve(FilterKind::DirectLs, Some(PilotLength::FIVE_M)),
                curve(FilterKind::DirectLs, Some(PilotLength::FIFTY_M)),
            ];
            FigurePlan::Sweep(cells(&curves, &[mc(Metric::MiHard)], MI_TRIALS, seed, scale))
        }
        3 => FigurePlan::Sweep(cells(&pilot_study(), &[mc(Metric::MiHard)], MI_TRIALS, seed, scale)),
        4 => FigurePlan::Sweep(cells(&pilot_study(), &[mc(Metric::Ser)], SER_TRIALS, seed, scale)),
        5 => FigurePlan::Sweep(cells(&quantizer_study(), &[mc(Metric::MiHard)], MI_TRIALS, seed, scale)),
        6 => FigurePlan::Sweep(cells(&quantizer_study(), &[mc(Metric::Ser)], SER_TRIALS, seed, scale)),
        7 => {
            let metrics = [
                mc(Metric::MiHard),
                mc(Metric::MiSoft),
                (Metric::MiHard, Method::Analytic),
                (Metric::MiSoft, Method::Analytic),
            ];
            FigurePlan::Sweep(cells(&[curve(FilterKind::Mrc, None)], &metrics, MI_TRIALS, seed, scale))
        }
        8 => {
            let metrics = [mc(Metric::Ser), (Metric::Ser, Method::Analytic)];
            FigurePlan::Sweep(cells(&[curve(FilterKind::Mrc, None)], &metrics, SER_TRIALS, seed, scale))
        }
        _ => return None,
    };
    Some(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep(id: u8, scale: Scale) -> Vec<SweepCell> {
        match figure_plan(id, 0, scale).unwrap() {
            FigurePlan::Sweep(c) => c,
            FigurePlan::Histogram(_) => panic!("figure {id} is a histogram"),
        }
    }

    #[test]
    fn every_preset_validates() {
        for id in 2..=8 {
            for scale in [Scale::FULL, Scale::new(0.05).unwrap()] {
                for cell in sweep(id, scale) {
                    cell.spec.validate().unwrap();
                }
            }
        }
        assert!(matches!(figure_plan(1, 0, Scale::FULL), Some(FigurePlan::Histogram(_))));
        assert!(figure_plan(0, 0, Scale::FULL).is_none() && figure_plan(9, 0, Scale::FULL).is_none());
    }

    #[test]
    fn figure_two_curves() {
        let cells = sweep(2, Scale::FULL);
        let curves: Vec<_> = cells.iter().map(|c| (c.spec.filter, c.spec.csi)).collect();
        assert_eq!(curves.len(), 6);
        assert!(curves.contains(&(FilterKind::DirectLs, CsiMode::Estimated { pilots: 20_000 })));
        assert!(curves.contains(&(FilterKind::Zf, CsiMode::Estimated { pilots: 2000 })));
        assert!(cells.iter().all(|c| (c.spec.antennas, c.spec.users) == (400, 20) && c.spec.snr_db_grid == figure_snr_grid()));
    }

    #[test]
    fn figure_four_is_ser_over_pilot_lengths() {
        let cells = sweep(4, Scale::FULL);
        assert_eq!(cells.len(), 8);
        let pilots: Vec<_> = cells.iter().map(|c| c.spec.csi.pilot_len()).collect();
        assert_eq!(pilots, [0, 100, 200, 1000, 0, 100, 200, 1000]);
        assert!(cells.iter().all(|c| c.metrics == [(Metric::Ser, Method::MonteCarlo)]));
        assert_eq!(cells[0].spec.channel_trials * cells[0].spec.inner_trials, 100_000);
    }

    #[test]
    fn scaling_keeps_ratios_and_floors() {
        let s = Scale::new(0.05).unwrap();
        assert_eq!(s.antennas(400, 20), 20);
        assert_eq!(s.antennas(400, 30), 30);
        assert_eq!(Scale::FULL.antennas(2, 3), 2);
        assert_eq!(s.inner_trials(100, true), 16);
        assert_eq!(s.inner_trials(100, false), 5);
        let dls = sweep(2, s);
        assert_eq!(dls[5].spec.csi, CsiMode::Estimated { pilots: 1000 });

        let mut spec = ExperimentSpec::new(40, 4, FilterKind::DirectLs);
        spec.csi = CsiMode::Estimated { pilots: 200 };
        let scaled = scale_experiment(&spec, &[Metric::Ser], Scale::new(0.25).unwrap());
        assert_eq!((scaled.antennas, scaled.csi.pilot_len()), (10, 50));
        assert!(Scale::new(0.0).is_none() && Scale::new(f64::NAN).is_none());
    }
}
