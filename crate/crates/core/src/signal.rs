//! Physical model: `r = √Pt·H·x + n`, followed by a per-axis sign quantizer
//! `y = sign(Re r) + j·sign(Im r)` (sign(0) = +1) or an unquantized bypass.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Deref;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{ComplexMatrix, RandomStream};

/// The `M×K` channel matrix (`h_ij`: antenna `i`, user `j`).
pub type ChannelMatrix = ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub antennas: usize,
    pub users: usize,
    /// Linear transmit power per user, `Pt`.
    pub transmit_power: f64,
    /// Linear noise variance `σ_N²`. Zero disables noise.
    pub noise_variance: f64,
}

impl SystemConfig {
    pub fn new(antennas: usize, users: usize, transmit_power: f64, noise_variance: f64) -> Result<Self> {
        let cfg = Self {
            antennas,
            users,
            transmit_power,
            noise_variance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Unit noise variance with `Pt = 10^(snr_db/10)`.
    pub fn from_snr_db(antennas: usize, users: usize, snr_db: f64) -> Result<Self> {
        Self::new(antennas, users, db_to_linear(snr_db), 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(Error::invalid("num_antennas must be at least 1"));
        }
        if self.users == 0 {
            return Err(Error::invalid("num_users must be at least 1"));
        }
        if !(self.transmit_power > 0.0) || !self.transmit_power.is_finite() {
            return Err(Error::invalid(format!("transmit power must be positive, got {}", self.transmit_power)));
        }
        if !(self.noise_variance >= 0.0) || !self.noise_variance.is_finite() {
            return Err(Error::invalid(format!("noise variance must be non-negative, got {}", self.noise_variance)));
        }
        Ok(())
    }

    /// Keeps `σ_N²` and sets `Pt` so that `Pt/σ_N²` equals the given SNR.
    /// A noiseless configuration is given `Pt = 10^(snr/10)` directly.
    pub fn with_snr_db(&self, snr_db: f64) -> Self {
        let scale = if self.noise_variance > 0.0 { self.noise_variance } else { 1.0 };
        Self {
            transmit_power: db_to_linear(snr_db) * scale,
            ..*self
        }
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (self.transmit_power / self.noise_variance).log10()
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_variance.sqrt()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// QPSK symbol, indexed by quadrant in the order `1+j, 1−j, −1−j, −1+j`
/// (the same order as the quantizer outputs `s_1..s_4`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QpskSymbol(u8);

/// Unnormalized quadrant points `s_1..s_4`.
pub const QUADRANT_POINTS: [Complex64; 4] = [
    Complex64::new(1.0, 1.0),
    Complex64::new(1.0, -1.0),
    Complex64::new(-1.0, -1.0),
    Complex64::new(-1.0, 1.0),
];

impl QpskSymbol {
    pub const ALL: [QpskSymbol; 4] = [QpskSymbol(0), QpskSymbol(1), QpskSymbol(2), QpskSymbol(3)];

    pub fn new(index: usize) -> Result<Self> {
        if index < 4 {
            Ok(Self(index as u8))
        } else {
            Err(Error::invalid(format!("QPSK index must be < 4, got {index}")))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Unit-modulus constellation point `(±1 ± j)/√2`.
    pub fn value(self) -> Complex64 {
        QUADRANT_POINTS[self.index()] * FRAC_1_SQRT_2
    }

    /// Quadrant of a complex value, with ties (zero coordinates) resolved to +1.
    pub fn from_quadrant(z: Complex64) -> Self {
        match (z.re >= 0.0, z.im >= 0.0) {
            (true, true) => Self(0),
            (true, false) => Self(1),
            (false, false) => Self(2),
            (false, true) => Self(3),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolVector(Vec<QpskSymbol>);

impl SymbolVector {
    pub fn new(symbols: Vec<QpskSymbol>) -> Self {
        Self(symbols)
    }

    pub fn symbols(&self) -> &[QpskSymbol] {
        &self.0
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.0.iter().map(|s| s.value()).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Pre-quantization samples `r`, one per antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedVector(pub Vec<Complex64>);

/// 1-bit ADC output; every coordinate is exactly ±1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedVector(Vec<Complex64>);

impl QuantizedVector {
    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}

impl Deref for ReceivedVector {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl Deref for QuantizedVector {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuantizerMode {
    OneBit,
    /// No quantization; `r` is passed through unchanged.
    Bypass,
}

impl QuantizerMode {
    pub fn name(self) -> &'static str {
        match self {
            QuantizerMode::OneBit => "one_bit",
            QuantizerMode::Bypass => "bypass",
        }
    }
}

/// What the receiver observes: either the quantized or the raw vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    Quantized(QuantizedVector),
    Unquantized(ReceivedVector),
}

impl Deref for Observation {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        match self {
            Observation::Quantized(q) => q,
            Observation::Unquantized(r) => r,
        }
    }
}

/// i.i.d. CN(0, 1) channel.
pub fn sample_channel(config: &SystemConfig, stream: &mut RandomStream) -> ChannelMatrix {
    ComplexMatrix::from_fn(config.antennas, config.users, |_, _| stream.unit_complex_gaussian())
}

/// `K` i.i.d. uniform QPSK symbols.
pub fn sample_symbols(config: &SystemConfig, stream: &mut RandomStream) -> SymbolVector {
    SymbolVector((0..config.users).map(|_| QpskSymbol(stream.index_below(4) as u8)).collect())
}

/// `r = √Pt·H·x + n` with `n ~ CN(0, σ_N² I_M)`.
///
/// The unit-variance noise is always drawn (then scaled), so the stream
/// advances identically whatever the SNR.
pub fn propagate(
    h: &ChannelMatrix,
    x: &SymbolVector,
    config: &SystemConfig,
    stream: &mut RandomStream,
) -> Result<ReceivedVector> {
    if h.rows() != config.antennas || h.cols() != config.users || x.len() != config.users {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{} channel and {} symbols", config.antennas, config.users, config.users),
            actual: format!("{}x{} channel and {} symbols", h.rows(), h.cols(), x.len()),
        });
    }
    let noise: Vec<Complex64> = (0..config.antennas).map(|_| stream.unit_complex_gaussian()).collect();
    received_signal(h, &x.values(), config.transmit_power, config.noise_std(), &noise)
}

/// Deterministic part of [`propagate`]: `√pt·H·symbols + noise_std·unit_noise`.
/// `symbols` need not be QPSK, which makes linearity checks possible.
pub fn received_signal(
    h: &ChannelMatrix,
    symbols: &[Complex64],
    transmit_power: f64,
    noise_std: f64,
    unit_noise: &[Complex64],
) -> Result<ReceivedVector> {
    if unit_noise.len() != h.rows() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} noise samples", h.rows()),
            actual: format!("{}", unit_noise.len()),
        });
    }
    let amp = transmit_power.sqrt();
    let mut r = h.mul_vec(symbols)?;
    for (ri, ni) in r.iter_mut().zip(unit_noise) {
        *ri = *ri * amp + ni * noise_std;
    }
    Ok(ReceivedVector(r))
}

/// `Q(v) = sign(Re v) + j·sign(Im v)` with sign(0) = +1.
#[inline]
pub fn quantize_sample(v: Complex64) -> Complex64 {
    Complex64::new(sign(v.re), sign(v.im))
}

#[inline]
pub(crate) fn sign(u: f64) -> f64 {
    if u >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

pub fn quantize(r: ReceivedVector, mode: QuantizerMode) -> Observation {
    match mode {
        QuantizerMode::OneBit => Observation::Quantized(QuantizedVector(r.0.into_iter().map(quantize_sample).collect())),
        QuantizerMode::Bypass => Observation::Unquantized(r),
    }
}
