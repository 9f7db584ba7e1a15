use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::RandomStream;
use crate::signal::{quantize_sample, ChannelMatrix, QpskSymbol, QuantizerMode, SystemConfig};

/// Training length, either absolute or proportional to `K` or `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PilotLength {
    Slots(usize),
    PerUser(usize),
    PerAntenna(usize),
}

impl PilotLength {
    pub const FIVE_K: PilotLength = PilotLength::PerUser(5);
    pub const TEN_K: PilotLength = PilotLength::PerUser(10);
    pub const FIFTY_K: PilotLength = PilotLength::PerUser(50);
    pub const FIVE_M: PilotLength = PilotLength::PerAntenna(5);
    pub const FIFTY_M: PilotLength = PilotLength::PerAntenna(50);

    pub fn resolve(self, antennas: usize, users: usize) -> usize {
        match self {
            PilotLength::Slots(n) => n,
            PilotLength::PerUser(c) => c * users,
            PilotLength::PerAntenna(c) => c * antennas,
        }
    }
}

/// How the `K×N` pilot symbols are chosen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum PilotStyle {
    /// i.i.d. uniform QPSK.
    #[default]
    Random,
    /// Walsh–Hadamard rows times `(1+j)/√2`: QPSK entries with
    /// `Σ_n x⁽ⁿ⁾x⁽ⁿ⁾ᴴ = N·I`. Needs `N` to be a multiple of the smallest
    /// power of two that is at least `K`.
    Orthogonal,
}

/// `N` training slots: pilot symbols `x⁽ⁿ⁾ ∈ ℂᴷ` and observations `y⁽ⁿ⁾ ∈ ℂᴹ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotBlock {
    users: usize,
    antennas: usize,
    quantizer: QuantizerMode,
    // slot-major: slot n occupies [n*K, (n+1)*K)
    symbols: Vec<Complex64>,
    // slot-major: slot n occupies [n*M, (n+1)*M)
    observations: Vec<Complex64>,
}

impl PilotBlock {
    /// Wraps precomputed symbols and observations (slot-major).
    pub fn from_parts(
        users: usize,
        antennas: usize,
        quantizer: QuantizerMode,
        symbols: Vec<Complex64>,
        observations: Vec<Complex64>,
    ) -> Result<Self> {
        if users == 0 || antennas == 0 {
            return Err(Error::invalid("pilot block needs K >= 1 and M >= 1"));
        }
        if symbols.len() % users != 0 || observations.len() % antennas != 0 || symbols.len() / users != observations.len() / antennas {
            return Err(Error::ShapeMismatch {
                expected: "equal slot counts for symbols and observations".into(),
                actual: format!("{} symbols, {} observations", symbols.len(), observations.len()),
            });
        }
        Ok(Self {
            users,
            antennas,
            quantizer,
            symbols,
            observations,
        })
    }

    /// Draws pilot symbols, sends them through `h` at the configured power
    /// and noise, and records the (optionally quantized) observations.
    pub fn transmit(
        h: &ChannelMatrix,
        config: &SystemConfig,
        slots: usize,
        style: PilotStyle,
        quantizer: QuantizerMode,
        stream: &mut RandomStream,
    ) -> Result<Self> {
        let (m, k) = (config.antennas, config.users);
        if h.shape() != (m, k) {
            return Err(Error::ShapeMismatch {
                expected: format!("{m}x{k} channel"),
                actual: format!("{}x{}", h.rows(), h.cols()),
            });
        }
        let symbols = match style {
            PilotStyle::Random => (0..slots * k)
                .map(|_| QpskSymbol::ALL[stream.index_below(4)].value())
                .collect(),
            PilotStyle::Orthogonal => orthogonal_pilots(k, slots)?,
        };
        let amp = config.transmit_power.sqrt();
        let noise_std = config.noise_std();
        let mut observations = Vec::with_capacity(slots * m);
        for n in 0..slots {
            let x = &symbols[n * k..(n + 1) * k];
            for i in 0..m {
                let hx: Complex64 = h.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
                let r = hx * amp + stream.unit_complex_gaussian() * noise_std;
                observations.push(match quantizer {
                    QuantizerMode::OneBit => quantize_sample(r),
                    QuantizerMode::Bypass => r,
                });
            }
        }
        Self::from_parts(k, m, quantizer, symbols, observations)
    }

    pub fn num_slots(&self) -> usize {
        self.symbols.len() / self.users
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn quantizer(&self) -> QuantizerMode {
        self.quantizer
    }

    /// `(x⁽ⁿ⁾, y⁽ⁿ⁾)`.
    pub fn slot(&self, n: usize) -> (&[Complex64], &[Complex64]) {
        (
            &self.symbols[n * self.users..(n + 1) * self.users],
            &self.observations[n * self.antennas..(n + 1) * self.antennas],
        )
    }

    pub fn slots(&self) -> impl Iterator<Item = (&[Complex64], &[Complex64])> {
        self.symbols
            .chunks_exact(self.users)
            .zip(self.observations.chunks_exact(self.antennas))
    }
}

/// QPSK Walsh–Hadamard pilots, slot-major `N×K`.
pub fn orthogonal_pilots(users: usize, slots: usize) -> Result<Vec<Complex64>> {
    let order = users.next_power_of_two();
    if slots == 0 || slots % order != 0 {
        return Err(Error::invalid(format!(
            "orthogonal pilots for K = {users} need N to be a positive multiple of {order}, got {slots}"
        )));
    }
    let unit = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
    let mut out = Vec::with_capacity(slots * users);
    for n in 0..slots {
        let col = n % order;
        for j in 0..users {
            // Sylvester construction: H[j][col] = (-1)^popcount(j & col)
            let s = if (j & col).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            out.push(unit * s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        assert_eq!(PilotLength::FIVE_K.resolve(400, 20), 100);
        assert_eq!(PilotLength::TEN_K.resolve(400, 20), 200);
        assert_eq!(PilotLength::FIFTY_K.resolve(400, 20), 1000);
        assert_eq!(PilotLength::FIVE_M.resolve(400, 20), 2000);
        assert_eq!(PilotLength::FIFTY_M.resolve(400, 20), 20000);
        assert_eq!(PilotLength::Slots(7).resolve(400, 20), 7);
    }

    #[test]
    fn orthogonal_pilots_have_scaled_identity_gram() {
        let (k, n) = (3, 8);
        let x = orthogonal_pilots(k, n).unwrap();
        for a in 0..k {
            for b in 0..k {
                let g: Complex64 = (0..n).map(|t| x[t * k + a] * x[t * k + b].conj()).sum();
                let expected = if a == b { n as f64 } else { 0.0 };
                assert!((g - expected).norm() < 1e-12);
            }
        }
        assert!(x.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
        assert!(orthogonal_pilots(3, 6).is_err());
    }

    #[test]
    fn quantized_observations_are_signs() {
        let cfg = SystemConfig::new(5, 2, 1.0, 1.0).unwrap();
        let mut s = RandomStream::new(1, 1);
        let h = crate::signal::sample_channel(&cfg, &mut s);
        let p = PilotBlock::transmit(&h, &cfg, 12, PilotStyle::Random, QuantizerMode::OneBit, &mut s).unwrap();
        assert_eq!(p.num_slots(), 12);
        for (x, y) in p.slots() {
            assert_eq!(x.len(), 2);
            assert!(y.iter().all(|z| z.re.abs() == 1.0 && z.im.abs() == 1.0));
        }
    }
}
