use num_complex::Complex64;

use super::pilots::PilotBlock;
use super::{ChannelEstimate, EstimateProvenance, FilterKind, ReceiveFilter};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::math::{ln_half_erfc, solve_hermitian_loaded, ComplexMatrix};
use crate::signal::{QuantizerMode, SystemConfig};

/// Options shared by the two least-squares constructions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LsOptions {
    /// Add `1e-6·trace/dim` to the Gram diagonal before solving. Off by
    /// default so that a singular Gram surfaces as an error.
    pub diagonal_loading: bool,
}

/// `Σ_n y⁽ⁿ⁾x⁽ⁿ⁾ᴴ`, `M×K`.
fn cross_correlation(pilots: &PilotBlock) -> ComplexMatrix {
    let (m, k) = (pilots.antennas(), pilots.users());
    let mut acc = vec![Complex64::new(0.0, 0.0); m * k];
    for (x, y) in pilots.slots() {
        for (i, yi) in y.iter().enumerate() {
            let row = &mut acc[i * k..(i + 1) * k];
            for (a, xj) in row.iter_mut().zip(x) {
                *a += yi * xj.conj();
            }
        }
    }
    ComplexMatrix::from_raw(m, k, acc)
}

/// `Σ_n v⁽ⁿ⁾v⁽ⁿ⁾ᴴ` for vectors of length `dim`, exactly Hermitian.
fn outer_sum<'a>(dim: usize, vectors: impl Iterator<Item = &'a [Complex64]>) -> ComplexMatrix {
    let mut g = vec![Complex64::new(0.0, 0.0); dim * dim];
    for v in vectors {
        for i in 0..dim {
            let vi = v[i];
            let row = &mut g[i * dim + i..(i + 1) * dim];
            for (dst, vj) in row.iter_mut().zip(&v[i..]) {
                *dst += vi * vj.conj();
            }
        }
    }
    for i in 0..dim {
        g[i * dim + i].im = 0.0;
        for j in 0..i {
            g[i * dim + j] = g[j * dim + i].conj();
        }
    }
    ComplexMatrix::from_raw(dim, dim, g)
}

/// Receive filter fitted straight from pilots:
/// `Aᴴ = (Σ x⁽ⁿ⁾y⁽ⁿ⁾ᴴ)(Σ y⁽ⁿ⁾y⁽ⁿ⁾ᴴ)⁻¹`, the minimizer of
/// `(1/N)Σ‖Ãᴴy⁽ⁿ⁾ − x⁽ⁿ⁾‖²`. Needs `N ≥ M`.
pub fn ls_direct_filter(pilots: &PilotBlock, options: LsOptions) -> Result<ReceiveFilter> {
    let m = pilots.antennas();
    let n = pilots.num_slots();
    if n < m {
        return Err(Error::InsufficientPilots {
            required: m,
            available: n,
        });
    }
    let gram = outer_sum(m, pilots.slots().map(|(_, y)| y));
    // A = G⁻¹ (Σ y xᴴ) because G is Hermitian.
    let a = solve_hermitian_loaded(&gram, &cross_correlation(pilots), options.diagonal_loading).map_err(|e| match e {
        Error::Singular { dimension } => Error::SingularObservationGram { dimension },
        other => other,
    })?;
    Ok(ReceiveFilter::from_parts(a, FilterKind::DirectLs))
}

/// LS channel estimate
/// `Ĥ = (Σ √Pt·y⁽ⁿ⁾x⁽ⁿ⁾ᴴ)(Σ Pt·x⁽ⁿ⁾x⁽ⁿ⁾ᴴ)⁻¹`. Needs `N ≥ K`.
pub fn ls_channel_estimate(pilots: &PilotBlock, config: &SystemConfig, options: LsOptions) -> Result<ChannelEstimate> {
    let k = pilots.users();
    let n = pilots.num_slots();
    if n < k {
        return Err(Error::InsufficientPilots {
            required: k,
            available: n,
        });
    }
    let pt = config.transmit_power;
    let gram = outer_sum(k, pilots.slots().map(|(x, _)| x)).scale(Complex64::new(pt, 0.0));
    let cross = cross_correlation(pilots).scale(Complex64::new(pt.sqrt(), 0.0));
    // Ĥᴴ = G⁻¹·crossᴴ since G is Hermitian.
    let h_hat_h = solve_hermitian_loaded(&gram, &cross.hermitian(), options.diagonal_loading).map_err(|e| match e {
        Error::Singular { dimension } => Error::SingularPilotGram { dimension },
        other => other,
    })?;
    Ok(ChannelEstimate::new(h_hat_h.hermitian(), EstimateProvenance::LeastSquares))
}

/// Finite search alphabet `𝒜` for each channel coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct MapGrid {
    points: Vec<Complex64>,
}

/// Largest number of candidate rows `|𝒜|ᴷ` a MAP search may visit.
pub const MAP_SEARCH_CAP: u128 = 1_000_000;

impl MapGrid {
    /// Square lattice `{a + jb : a, b ∈ axis}` with `points_per_axis`
    /// evenly spaced values over `[−extent, extent]`.
    pub fn square(extent: f64, points_per_axis: usize) -> Result<Self> {
        if points_per_axis < 2 || !(extent > 0.0) {
            return Err(Error::invalid("MAP grid needs at least 2 points per axis and a positive extent"));
        }
        let step = 2.0 * extent / (points_per_axis - 1) as f64;
        // mirror the lower half so the lattice is exactly symmetric
        let n = points_per_axis;
        let axis: Vec<f64> = (0..n)
            .map(|i| if 2 * i + 1 < n { -extent + step * i as f64 } else if 2 * i + 1 == n { 0.0 } else { extent - step * (n - 1 - i) as f64 })
            .collect();
        let points = axis
            .iter()
            .flat_map(|&re| axis.iter().map(move |&im| Complex64::new(re, im)))
            .collect();
        Self::from_points(points)
    }

    /// Arbitrary alphabet; must have at least two points and be closed
    /// under negation.
    pub fn from_points(points: Vec<Complex64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("MAP grid needs at least 2 points"));
        }
        let key = |z: &Complex64| (z.re.to_bits(), z.im.to_bits());
        let canon = |z: Complex64| Complex64::new(z.re + 0.0, z.im + 0.0);
        let mut forward: Vec<_> = points.iter().map(|&z| key(&canon(z))).collect();
        let mut mirrored: Vec<_> = points.iter().map(|&z| key(&canon(-z))).collect();
        forward.sort_unstable();
        mirrored.sort_unstable();
        if forward != mirrored {
            return Err(Error::invalid("MAP grid must be symmetric about 0"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Default for MapGrid {
    /// 25 points per axis over [−3, 3] (625 complex points).
    fn default() -> Self {
        Self::square(3.0, 25).expect("default grid is valid")
    }
}

/// Log posterior (up to a constant) of one channel row `h_i` given that
/// antenna's quantized pilot observations: the exact sign likelihood under
/// Gaussian noise plus the CN(0, I) prior.
pub fn map_log_posterior(row: &[Complex64], pilots: &PilotBlock, antenna: usize, config: &SystemConfig) -> f64 {
    let amp = config.transmit_power.sqrt();
    let sigma = config.noise_std();
    let prior: f64 = -row.iter().map(|h| h.norm_sqr()).sum::<f64>();
    let likelihood: f64 = pilots
        .slots()
        .map(|(x, y)| {
            let mean: Complex64 = row.iter().zip(x).map(|(h, s)| h * s).sum::<Complex64>() * amp;
            let yi = y[antenna];
            // P(sign = y) = ½·erfc(−y·m/σ) per axis
            ln_half_erfc(-yi.re * mean.re / sigma) + ln_half_erfc(-yi.im * mean.im / sigma)
        })
        .sum();
    prior + likelihood
}

/// Per-antenna MAP channel estimate by exhaustive search over `𝒜ᴷ`.
///
/// Ties keep the first candidate in mixed-radix order (user 0 varying
/// slowest). Antennas are searched in parallel.
pub fn map_channel_estimate(
    pilots: &PilotBlock,
    config: &SystemConfig,
    grid: &MapGrid,
    execution: Execution,
) -> Result<ChannelEstimate> {
    if pilots.quantizer() != QuantizerMode::OneBit {
        return Err(Error::Unsupported("MAP estimation is defined for 1-bit observations only".into()));
    }
    if !(config.noise_variance > 0.0) {
        return Err(Error::invalid("MAP estimation needs a positive noise variance"));
    }
    let k = pilots.users();
    let m = pilots.antennas();
    let evaluations = (grid.len() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if evaluations > MAP_SEARCH_CAP {
        return Err(Error::ComplexityCap {
            evaluations,
            cap: MAP_SEARCH_CAP,
        });
    }
    let total = evaluations as usize;
    let alphabet = grid.points();
    let rows = execution.map(m, |antenna| {
        let mut digits = vec![0usize; k];
        let mut row = vec![alphabet[0]; k];
        let mut best = (f64::NEG_INFINITY, row.clone());
        for _ in 0..total {
            for (slot, &d) in row.iter_mut().zip(&digits) {
                *slot = alphabet[d];
            }
            let score = map_log_posterior(&row, pilots, antenna, config);
            if score > best.0 {
                best = (score, row.clone());
            }
            // increment mixed-radix counter, last user fastest
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < alphabet.len() {
                    break;
                }
                *d = 0;
            }
        }
        best.1
    });
    let data = rows.into_iter().flatten().collect();
    Ok(ChannelEstimate::new(ComplexMatrix::from_raw(m, k, data), EstimateProvenance::Map))
}
