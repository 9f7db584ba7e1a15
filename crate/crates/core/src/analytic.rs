//! Closed-form performance of the full-CSI MRC receiver.
//!
//! Conditioned on the target symbol `x_k` and the channel, each antenna's
//! received sample is modelled as `CN(√Pt·h_ik·x_k, σ_I² + σ_N²)`, the
//! interference of the other `K − 1` users being treated as Gaussian. The
//! four quantizer-output probabilities `p_ic` then follow from `erfc` on
//! each axis, and summing the per-antenna contributions of the matched
//! filter gives a complex Gaussian model of the soft estimate
//! `x̃_k ~ CN(Σμ_i, Σσ_i²)`. Everything downstream (hard-decision
//! transition pmf, mutual information, SER) is computed from that model.
//!
//! Averaging over channel realizations is the caller's job; see
//! [`crate::montecarlo::run_mrc_analytic`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{erfc, norm_sqr};
use crate::signal::{ChannelMatrix, QpskSymbol, SystemConfig, QUADRANT_POINTS};

/// Quantizer outputs `s_1 = 1+j, s_2 = 1−j, s_3 = −1−j, s_4 = −1+j`.
pub const QUANTIZER_CONSTELLATION: [Complex64; 4] = QUADRANT_POINTS;

/// Tolerance on pmf normalization accepted by the MI/SER functions.
const PMF_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceStats {
    /// `σ_I² = Pt·Σ_{j≠k}|h_ij|²`.
    pub variance: f64,
}

/// Variance of the multi-user interference seen by `antenna` when decoding `user`.
pub fn interference_variance(h: &ChannelMatrix, antenna: usize, user: usize, config: &SystemConfig) -> InterferenceStats {
    let row = h.row(antenna);
    let others: f64 = row
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != user)
        .map(|(_, z)| z.norm_sqr())
        .sum();
    InterferenceStats {
        variance: config.transmit_power * others,
    }
}

/// `p_i1..p_i4 = Prob(y_i = s_c | x_k, H)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaOutputPmf {
    pub antenna: usize,
    pub probs: [f64; 4],
}

impl AntennaOutputPmf {
    /// `Σ_c p_ic·s_c`, the conditional mean of the quantizer output.
    pub fn expected_output(&self) -> Complex64 {
        expected_output(&self.probs)
    }
}

fn expected_output(probs: &[f64; 4]) -> Complex64 {
    probs.iter().zip(QUANTIZER_CONSTELLATION).map(|(&p, s)| s * p).sum()
}

/// Probability that `CN(mean, variance)` (per-axis variance `variance/2`)
/// falls in each quadrant, in `s_1..s_4` order. A zero variance gives a
/// point mass on the quadrant of the mean (zero coordinates count as +).
pub fn quadrant_pmf(mean: Complex64, variance: f64) -> [f64; 4] {
    let (re_pos, re_neg) = axis_split(mean.re, variance);
    let (im_pos, im_neg) = axis_split(mean.im, variance);
    [re_pos * im_pos, re_pos * im_neg, re_neg * im_neg, re_neg * im_pos]
}

/// `(P(axis ≥ 0), P(axis < 0))` for an axis with mean `m` and variance `variance/2`.
fn axis_split(m: f64, variance: f64) -> (f64, f64) {
    if variance > 0.0 {
        let z = m / variance.sqrt();
        (0.5 * erfc(-z), 0.5 * erfc(z))
    } else if m >= 0.0 {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    }
}

/// Quantizer-output pmf of one antenna given `x_k` under the Gaussian
/// interference-plus-noise model.
pub fn antenna_output_pmf(
    h: &ChannelMatrix,
    antenna: usize,
    user: usize,
    symbol: QpskSymbol,
    config: &SystemConfig,
) -> AntennaOutputPmf {
    let interference = interference_variance(h, antenna, user, config);
    let mean = h[(antenna, user)] * symbol.value() * config.transmit_power.sqrt();
    AntennaOutputPmf {
        antenna,
        probs: quadrant_pmf(mean, interference.variance + config.noise_variance),
    }
}

/// Mean and variance of the Gaussian model of `x̃_k | x_k, H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftEstimateMoments {
    pub mean: Complex64,
    /// Total (complex) variance; each axis carries half of it.
    pub variance: f64,
}

/// Combines per-antenna output pmfs through the matched filter of column `h_k`:
/// `μ_i = h_ik*/‖h_k‖²·Σ_c p_ic s_c`, `σ_i² = |h_ik|²/‖h_k‖⁴·(2 − |Σ_c p_ic s_c|²)`.
pub fn soft_moments_from_pmfs(column: &[Complex64], pmfs: &[[f64; 4]]) -> Result<SoftEstimateMoments> {
    if column.len() != pmfs.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} pmfs", column.len()),
            actual: format!("{}", pmfs.len()),
        });
    }
    let energy = norm_sqr(column);
    if energy == 0.0 {
        return Err(Error::DegenerateChannel { column: 0 });
    }
    let mut mean = Complex64::new(0.0, 0.0);
    let mut variance = 0.0;
    for (h, p) in column.iter().zip(pmfs) {
        let e = expected_output(p);
        mean += h.conj() / energy * e;
        variance += h.norm_sqr() / (energy * energy) * (2.0 - e.norm_sqr()).max(0.0);
    }
    Ok(SoftEstimateMoments { mean, variance })
}

/// Gaussian model of the MRC soft estimate for one user and symbol.
pub fn soft_moments(h: &ChannelMatrix, user: usize, symbol: QpskSymbol, config: &SystemConfig) -> Result<SoftEstimateMoments> {
    UserModel::new(h, user, config)?.moments(symbol)
}

/// Per-user quantities that do not depend on the transmitted symbol,
/// cached so that the four symbols share them.
#[derive(Debug, Clone)]
pub struct UserModel {
    column: Vec<Complex64>,
    // √(σ_I² + σ_N²) per antenna
    total_variance: Vec<f64>,
    amplitude: f64,
}

impl UserModel {
    pub fn new(h: &ChannelMatrix, user: usize, config: &SystemConfig) -> Result<Self> {
        let column = h.column(user);
        if norm_sqr(&column) == 0.0 {
            return Err(Error::DegenerateChannel { column: user });
        }
        let total_variance = (0..h.rows())
            .map(|i| interference_variance(h, i, user, config).variance + config.noise_variance)
            .collect();
        Ok(Self {
            column,
            total_variance,
            amplitude: config.transmit_power.sqrt(),
        })
    }

    pub fn antenna_pmfs(&self, symbol: QpskSymbol) -> Vec<[f64; 4]> {
        let x = symbol.value() * self.amplitude;
        self.column
            .iter()
            .zip(&self.total_variance)
            .map(|(h, &v)| quadrant_pmf(h * x, v))
            .collect()
    }

    pub fn moments(&self, symbol: QpskSymbol) -> Result<SoftEstimateMoments> {
        soft_moments_from_pmfs(&self.column, &self.antenna_pmfs(symbol))
    }
}

/// Hard-decision pmf `p(x̂_k | x_k, H)` (quadrants in `s_1..s_4` order)
/// from the Gaussian soft-estimate model.
pub fn hard_transition_pmf(moments: &SoftEstimateMoments) -> [f64; 4] {
    quadrant_pmf(moments.mean, moments.variance)
}

/// `p(x̂ | x)`: row = transmitted symbol index, column = decided index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionPmf(pub [[f64; 4]; 4]);

impl TransitionPmf {
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self(m)
    }

    pub fn uniform() -> Self {
        Self([[0.25; 4]; 4])
    }

    /// Symmetric channel: `correct` on the diagonal, the rest shared equally.
    pub fn symmetric(correct: f64) -> Self {
        let off = (1.0 - correct) / 3.0;
        let mut m = [[off; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = correct;
        }
        Self(m)
    }

    /// Normalizes integer counts row by row. Rows without samples become
    /// uniform.
    pub fn from_counts(counts: &[[u64; 4]; 4]) -> Self {
        let mut m = [[0.25; 4]; 4];
        for (row, c) in m.iter_mut().zip(counts) {
            let total: u64 = c.iter().sum();
            if total > 0 {
                for (p, &n) in row.iter_mut().zip(c) {
                    *p = n as f64 / total as f64;
                }
            }
        }
        Self(m)
    }

    pub fn validate(&self) -> Result<()> {
        validate_rows(self.0.iter().map(|r| r.as_slice()))
    }
}

fn validate_rows<'a>(rows: impl Iterator<Item = &'a [f64]>) -> Result<()> {
    for (i, row) in rows.enumerate() {
        if row.iter().any(|&p| !(0.0..=1.0 + PMF_TOLERANCE).contains(&p)) {
            return Err(Error::InvalidPmf(format!("row {i} has an entry outside [0, 1]")));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::InvalidPmf(format!("row {i} sums to {s}")));
        }
    }
    Ok(())
}

/// `I(X; Y)` in bits for a uniform input over the rows, with `0·log 0 = 0`.
pub(crate) fn mutual_information_uniform<R: AsRef<[f64]>>(rows: &[R]) -> f64 {
    let n_in = rows.len() as f64;
    let width = rows[0].as_ref().len();
    let mut mi = 0.0;
    for y in 0..width {
        let marginal: f64 = rows.iter().map(|r| r.as_ref()[y]).sum::<f64>() / n_in;
        if marginal <= 0.0 {
            continue;
        }
        for r in rows {
            let p = r.as_ref()[y];
            if p > 0.0 {
                mi += p / n_in * (p / marginal).log2();
            }
        }
    }
    mi.max(0.0)
}

/// Mutual information (bits) of the discrete channel `x_k → x̂_k` with a
/// uniform QPSK prior.
pub fn mi_hard(transition: &TransitionPmf) -> Result<f64> {
    transition.validate()?;
    Ok(mutual_information_uniform(&transition.0).min(2.0))
}

/// `Σ_x p(x)·Σ_{x̂≠x} p(x̂|x)` with a uniform prior.
pub fn ser_analytic(transition: &TransitionPmf) -> Result<f64> {
    transition.validate()?;
    let correct: f64 = (0..4).map(|i| transition.0[i][i]).sum::<f64>() / 4.0;
    Ok((1.0 - correct).clamp(0.0, 1.0))
}

/// Bin edges shared by the real and imaginary axes of `x̃_k`.
///
/// There are `bins` finite bins between `lo` and `hi`, two open tail bins
/// outside, and `0` is always one of the edges, so every bin lies inside a
/// single decision quadrant.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationGrid {
    edges: Vec<f64>,
}

impl DiscretizationGrid {
    pub const MIN_BINS: usize = 8;
    pub const DEFAULT_BINS: usize = 64;
    /// Half-width of the region each conditional Gaussian must lie in, in
    /// per-axis standard deviations.
    pub const COVERAGE_SIGMAS: f64 = 5.0;

    pub fn zero_aligned(bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins < Self::MIN_BINS {
            return Err(Error::invalid(format!("discretization needs at least {} bins, got {bins}", Self::MIN_BINS)));
        }
        if !(lo < 0.0 && hi > 0.0) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!("discretization range must straddle 0, got [{lo}, {hi}]")));
        }
        let below = ((bins as f64) * (-lo) / (hi - lo)).round().clamp(1.0, (bins - 1) as f64) as usize;
        let above = bins - below;
        let mut edges = Vec::with_capacity(bins + 1);
        for i in 0..below {
            edges.push(lo * (below - i) as f64 / below as f64);
        }
        edges.push(0.0);
        for i in 1..=above {
            edges.push(hi * i as f64 / above as f64);
        }
        // exact end points, whatever the rounding of the scaled steps
        edges[0] = lo;
        edges[bins] = hi;
        Ok(Self { edges })
    }

    /// Smallest zero-aligned grid covering every mean ± 5 per-axis standard
    /// deviations on both axes.
    pub fn covering(moments: &[SoftEstimateMoments], bins: usize) -> Result<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for m in moments {
            let reach = Self::COVERAGE_SIGMAS * (m.variance / 2.0).sqrt();
            for c in [m.mean.re, m.mean.im] {
                lo = lo.min(c - reach);
                hi = hi.max(c + reach);
            }
        }
        let pad = 1e-9 * lo.abs().max(hi.abs()).max(1e-300);
        Self::zero_aligned(bins, lo.min(-pad), hi.max(pad))
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        *self.edges.last().expect("grid has edges")
    }

    /// Number of cells per axis, including the two open tails.
    pub fn cells_per_axis(&self) -> usize {
        self.edges.len() + 1
    }

    /// Cell index of a coordinate; cells are closed below, open above.
    pub fn cell_of(&self, v: f64) -> usize {
        self.edges.partition_point(|&e| e <= v)
    }

    /// Probability mass of `N(mean, variance/2)` in every cell of this axis.
    pub fn axis_masses(&self, mean: f64, variance: f64) -> Vec<f64> {
        let n = self.cells_per_axis();
        if !(variance > 0.0) {
            let mut out = vec![0.0; n];
            out[self.cell_of(mean)] = 1.0;
            return out;
        }
        let scale = variance.sqrt();
        let bound = |i: usize| -> f64 {
            match i {
                0 => f64::NEG_INFINITY,
                _ if i == n => f64::INFINITY,
                _ => self.edges[i - 1],
            }
        };
        (0..n)
            .map(|i| {
                let (a, b) = (bound(i), bound(i + 1));
                // evaluate on the side of the mean that avoids cancellation
                if a >= mean {
                    0.5 * (erfc((a - mean) / scale) - erfc((b - mean) / scale))
                } else if b <= mean {
                    0.5 * (erfc((mean - b) / scale) - erfc((mean - a) / scale))
                } else {
                    1.0 - 0.5 * erfc((mean - a) / scale) - 0.5 * erfc((b - mean) / scale)
                }
            })
            .map(|p| p.max(0.0))
            .collect()
    }

    fn check_covers(&self, moments: &SoftEstimateMoments) -> Result<()> {
        let reach = Self::COVERAGE_SIGMAS * (moments.variance / 2.0).sqrt();
        for (axis, c) in [("real", moments.mean.re), ("imaginary", moments.mean.im)] {
            if c - reach < self.lo() || c + reach > self.hi() {
                return Err(Error::GridCoverage(format!(
                    "{axis} axis: mean {c} ± {reach} outside [{}, {}]",
                    self.lo(),
                    self.hi()
                )));
            }
        }
        Ok(())
    }
}

/// Mutual information (bits) between `x_k` and the discretized soft
/// estimate `x̃_k^Δ`, one Gaussian model per transmitted symbol.
pub fn mi_soft_discretized(moments: &[SoftEstimateMoments; 4], grid: &DiscretizationGrid) -> Result<f64> {
    for m in moments {
        grid.check_covers(m)?;
    }
    let rows: Vec<Vec<f64>> = moments
        .iter()
        .map(|m| {
            let re = grid.axis_masses(m.mean.re, m.variance);
            let im = grid.axis_masses(m.mean.im, m.variance);
            re.iter().flat_map(|&a| im.iter().map(move |&b| a * b)).collect()
        })
        .collect();
    Ok(mutual_information_uniform(&rows).min(2.0))
}

/// Analytic results for one user on one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct UserAnalysis {
    pub moments: [SoftEstimateMoments; 4],
    pub transition: TransitionPmf,
    pub mi_hard: f64,
    pub mi_soft: f64,
    pub ser: f64,
}

/// Runs the whole analytic chain for one user.
pub fn analyze_user(h: &ChannelMatrix, user: usize, config: &SystemConfig, soft_bins: usize) -> Result<UserAnalysis> {
    let model = UserModel::new(h, user, config)?;
    let mut moments = [SoftEstimateMoments {
        mean: Complex64::new(0.0, 0.0),
        variance: 0.0,
    }; 4];
    let mut rows = [[0.0; 4]; 4];
    for s in QpskSymbol::ALL {
        let m = model.moments(s)?;
        moments[s.index()] = m;
        rows[s.index()] = hard_transition_pmf(&m);
    }
    let transition = TransitionPmf(rows);
    let grid = DiscretizationGrid::covering(&moments, soft_bins)?;
    Ok(UserAnalysis {
        moments,
        transition,
        mi_hard: mi_hard(&transition)?,
        mi_soft: mi_soft_discretized(&moments, &grid)?,
        ser: ser_analytic(&transition)?,
    })
}

/// [`analyze_user`] for every user of a channel realization.
pub fn analyze_channel(h: &ChannelMatrix, config: &SystemConfig, soft_bins: usize) -> Result<Vec<UserAnalysis>> {
    (0..h.cols()).map(|k| analyze_user(h, k, config, soft_bins)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{ComplexMatrix, RandomStream};
    use crate::signal::sample_channel;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn interference_examples() {
        let cfg = SystemConfig::new(1, 3, 2.0, 1.0).unwrap();
        let h = ComplexMatrix::new(1, 3, vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]).unwrap();
        // k = 2 in one-based numbering is column 1
        assert!((interference_variance(&h, 0, 1, &cfg).variance - 4.0).abs() < 1e-15);
        let single = ComplexMatrix::new(1, 1, vec![c(0.3, 0.4)]).unwrap();
        let cfg1 = SystemConfig::new(1, 1, 2.0, 1.0).unwrap();
        assert_eq!(interference_variance(&single, 0, 0, &cfg1).variance, 0.0);
    }

    #[test]
    fn interference_matches_brute_force() {
        let cfg = SystemConfig::new(6, 5, 0.7, 1.0).unwrap();
        let h = sample_channel(&cfg, &mut RandomStream::new(8, 0));
        for i in 0..6 {
            for k in 0..5 {
                let mut brute = 0.0;
                for j in 0..5 {
                    if j != k {
                        brute += h[(i, j)].re * h[(i, j)].re + h[(i, j)].im * h[(i, j)].im;
                    }
                }
                brute *= 0.7;
                assert!((interference_variance(&h, i, k, &cfg).variance - brute).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_gain_gives_uniform_outputs() {
        let cfg = SystemConfig::new(1, 2, 1.0, 1.0).unwrap();
        let h = ComplexMatrix::new(1, 2, vec![c(0.0, 0.0), c(1.0, 1.0)]).unwrap();
        let pmf = antenna_output_pmf(&h, 0, 0, QpskSymbol::ALL[0], &cfg);
        for p in pmf.probs {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn high_snr_single_user_concentrates() {
        let cfg = SystemConfig::new(1, 1, 1e8, 1.0).unwrap();
        let h = ComplexMatrix::new(1, 1, vec![c(1.0, 0.0)]).unwrap();
        let pmf = antenna_output_pmf(&h, 0, 0, QpskSymbol::ALL[0], &cfg);
        assert!(pmf.probs[0] > 1.0 - 1e-12);
        assert!(pmf.probs[1..].iter().all(|&p| p < 1e-12));
    }

    #[test]
    fn injected_pmfs_give_textbook_moments() {
        let column = vec![c(1.0, 2.0), c(-0.5, 0.0)];
        let energy = 5.0 + 0.25;
        let m = soft_moments_from_pmfs(&column, &[[0.25; 4], [0.25; 4]]).unwrap();
        assert!(m.mean.norm() < 1e-15);
        let expected = 2.0 * (5.0 + 0.25) / (energy * energy);
        assert!((m.variance - expected).abs() < 1e-15);

        let point = soft_moments_from_pmfs(&column[..1], &[[1.0, 0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(point.variance, 0.0);
        assert!((point.mean - c(1.0, -2.0) / 5.0 * c(1.0, 1.0)).norm() < 1e-15);
        assert!(soft_moments_from_pmfs(&[c(0.0, 0.0)], &[[0.25; 4]]).is_err());
    }

    #[test]
    fn quadrant_pmf_symmetry_and_concentration() {
        assert_eq!(quadrant_pmf(c(0.0, 0.0), 1.0), [0.25; 4]);
        let p = quadrant_pmf(c(10.0, 10.0), 1.0);
        assert!(p[0] > 1.0 - 1e-10);
        assert_eq!(quadrant_pmf(c(-1.0, 0.0), 0.0), [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn mi_hard_reference_channels() {
        assert!((mi_hard(&TransitionPmf::identity()).unwrap() - 2.0).abs() < 1e-15);
        assert!(mi_hard(&TransitionPmf::uniform()).unwrap().abs() < 1e-15);
        // 2 − H(0.7, 0.1, 0.1, 0.1), evaluated at 40 digits
        let expected = 0.6432203505529605273;
        assert!((mi_hard(&TransitionPmf::symmetric(0.7)).unwrap() - expected).abs() < 1e-14);
        let mut bad = TransitionPmf::identity();
        bad.0[2][2] = 0.9;
        assert!(matches!(mi_hard(&bad), Err(Error::InvalidPmf(_))));
    }

    #[test]
    fn ser_reference_channels() {
        assert_eq!(ser_analytic(&TransitionPmf::identity()).unwrap(), 0.0);
        assert!((ser_analytic(&TransitionPmf::uniform()).unwrap() - 0.75).abs() < 1e-15);
        assert!((ser_analytic(&TransitionPmf::symmetric(0.7)).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn soft_mi_limits() {
        let same = [SoftEstimateMoments { mean: c(0.1, -0.2), variance: 0.3 }; 4];
        let grid = DiscretizationGrid::covering(&same, 64).unwrap();
        assert!(mi_soft_discretized(&same, &grid).unwrap().abs() < 1e-12);

        let separated = QpskSymbol::ALL.map(|s| SoftEstimateMoments { mean: s.value(), variance: 1e-30 });
        let grid = DiscretizationGrid::covering(&separated, 64).unwrap();
        assert!((mi_soft_discretized(&separated, &grid).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn grid_shape_and_validation() {
        let g = DiscretizationGrid::zero_aligned(8, -1.0, 3.0).unwrap();
        assert_eq!(g.edges().len(), 9);
        assert!(g.edges().contains(&0.0));
        assert_eq!(g.cells_per_axis(), 10);
        assert_eq!(g.cell_of(-5.0), 0);
        assert_eq!(g.cell_of(5.0), 9);
        assert_eq!(g.cell_of(0.0), g.cell_of(1e-9));
        assert!(DiscretizationGrid::zero_aligned(7, -1.0, 1.0).is_err());
        assert!(DiscretizationGrid::zero_aligned(8, 0.5, 1.0).is_err());
        let masses = g.axis_masses(0.3, 0.8);
        assert!((masses.iter().sum::<f64>() - 1.0).abs() < 1e-14);

        let narrow = DiscretizationGrid::zero_aligned(8, -0.1, 0.1).unwrap();
        let wide = [SoftEstimateMoments { mean: c(1.0, 1.0), variance: 0.1 }; 4];
        assert!(matches!(mi_soft_discretized(&wide, &narrow), Err(Error::GridCoverage(_))));
    }

    #[test]
    fn rotating_the_symbol_permutes_outputs() {
        let cfg = SystemConfig::new(4, 3, 1.3, 0.8).unwrap();
        let h = sample_channel(&cfg, &mut RandomStream::new(12, 0));
        for i in 0..4 {
            for s in QpskSymbol::ALL {
                let rotated = QpskSymbol::new((s.index() + 3) % 4).unwrap();
                assert!((rotated.value() - s.value() * c(0.0, 1.0)).norm() < 1e-15);
                let p = antenna_output_pmf(&h, i, 1, s, &cfg).probs;
                let q = antenna_output_pmf(&h, i, 1, rotated, &cfg).probs;
                // multiplying by j maps s1→s4, s2→s1, s3→s2, s4→s3
                let expected = [p[1], p[2], p[3], p[0]];
                for c in 0..4 {
                    assert!((q[c] - expected[c]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn analysis_chain_is_consistent() {
        let cfg = SystemConfig::from_snr_db(32, 4, -5.0).unwrap();
        let h = sample_channel(&cfg, &mut RandomStream::new(21, 0));
        let users = analyze_channel(&h, &cfg, 64).unwrap();
        assert_eq!(users.len(), 4);
        for u in users {
            assert!((0.0..=2.0).contains(&u.mi_hard));
            assert!(u.mi_soft >= u.mi_hard - 1e-9);
            assert!((0.0..=1.0).contains(&u.ser));
        }
    }
}
