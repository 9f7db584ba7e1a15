use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// What a derived stream is used for. Each purpose gets a disjoint slice of
/// the 64-bit stream index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum StreamPurpose {
    Channel = 1,
    Pilot = 2,
    Data = 3,
    Auxiliary = 4,
}

const TRIAL_BITS: u32 = 28;
const DRAW_BITS: u32 = 32;

/// Seeded ChaCha8 stream. Equal `(master_seed, stream_index)` pairs produce
/// identical sequences; different indices select independent ChaCha streams.
#[derive(Debug, Clone)]
pub struct RandomStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            rng,
        }
    }

    /// Stream for one `(purpose, trial, draw)` unit of work.
    ///
    /// Layout of the index: 4 bits purpose, 28 bits trial, 32 bits draw.
    pub fn derive(master_seed: u64, purpose: StreamPurpose, trial: usize, draw: usize) -> Self {
        assert!((trial as u64) < (1 << TRIAL_BITS), "trial index {trial} out of range");
        assert!((draw as u64) < (1 << DRAW_BITS), "draw index {draw} out of range");
        let index = ((purpose as u64) << (TRIAL_BITS + DRAW_BITS)) | ((trial as u64) << DRAW_BITS) | draw as u64;
        Self::new(master_seed, index)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform integer in `0..n`.
    pub fn index_below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// One CN(0, 1) draw.
    pub fn unit_complex_gaussian(&mut self) -> Complex64 {
        let re = self.standard_normal();
        let im = self.standard_normal();
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// `n` i.i.d. CN(0, variance) samples: real and imaginary parts independent,
/// each N(0, variance/2).
pub fn sample_complex_gaussian(stream: &mut RandomStream, n: usize, variance: f64) -> Result<Vec<Complex64>> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::invalid(format!("variance must be positive, got {variance}")));
    }
    let sd = variance.sqrt();
    Ok((0..n).map(|_| stream.unit_complex_gaussian() * sd).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_moment_and_mean() {
        let mut s = RandomStream::new(42, 0);
        let v = sample_complex_gaussian(&mut s, 100_000, 1.0).unwrap();
        let n = v.len() as f64;
        let power = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        let mean: Complex64 = v.iter().sum::<Complex64>() / n;
        assert!((power - 1.0).abs() < 0.02, "power {power}");
        assert!(mean.re.abs() < 0.02 && mean.im.abs() < 0.02, "mean {mean}");
        let re_var = v.iter().map(|z| z.re * z.re).sum::<f64>() / n;
        assert!((re_var - 0.5).abs() < 0.02);
    }

    #[test]
    fn scales_with_variance() {
        let mut s = RandomStream::new(3, 9);
        let v = sample_complex_gaussian(&mut s, 50_000, 4.0).unwrap();
        let power = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64;
        assert!((power - 4.0).abs() < 0.1);
    }

    #[test]
    fn deterministic_per_seed_and_index() {
        let a = sample_complex_gaussian(&mut RandomStream::new(5, 17), 8, 1.0).unwrap();
        let b = sample_complex_gaussian(&mut RandomStream::new(5, 17), 8, 1.0).unwrap();
        let c = sample_complex_gaussian(&mut RandomStream::new(5, 18), 8, 1.0).unwrap();
        let d = sample_complex_gaussian(&mut RandomStream::new(6, 17), 8, 1.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn rejects_non_positive_variance() {
        let mut s = RandomStream::new(0, 0);
        assert!(sample_complex_gaussian(&mut s, 4, 0.0).is_err());
        assert!(sample_complex_gaussian(&mut s, 4, -1.0).is_err());
        assert!(sample_complex_gaussian(&mut s, 4, f64::NAN).is_err());
    }

    #[test]
    fn derived_streams_are_disjoint() {
        let a = RandomStream::derive(1, StreamPurpose::Channel, 3, 0);
        let b = RandomStream::derive(1, StreamPurpose::Data, 3, 0);
        let c = RandomStream::derive(1, StreamPurpose::Channel, 3, 1);
        assert_ne!(a.stream_index(), b.stream_index());
        assert_ne!(a.stream_index(), c.stream_index());
        assert_eq!(a.master_seed(), 1);
    }

    #[test]
    fn streams_are_uncorrelated() {
        let x = sample_complex_gaussian(&mut RandomStream::new(1, 0), 50_000, 1.0).unwrap();
        let y = sample_complex_gaussian(&mut RandomStream::new(1, 1), 50_000, 1.0).unwrap();
        let corr: Complex64 = x.iter().zip(&y).map(|(a, b)| a * b.conj()).sum::<Complex64>() / 50_000.0;
        assert!(corr.norm() < 0.02);
    }
}
