//! Uplink simulation and analysis for massive MIMO base stations whose
//! antennas each sample with a 1-bit ADC.
//!
//! The crate is organised bottom-up:
//!
//! * [`math`]: dense complex matrices, LU/QR solves, `erfc`, and seeded
//!   random streams that can be derived per trial.
//! * [`signal`]: system configuration, channel/symbol/noise sampling and the
//!   sign quantizer (with an unquantized bypass).
//! * [`receivers`]: pilot blocks, LS/MAP channel estimation, MRC/ZF/direct-LS
//!   filters, soft detection and QPSK decisions.
//! * [`analytic`]: the Gaussian/erfc machinery that predicts the MRC soft
//!   estimate and from it the hard/soft mutual information and SER.
//! * [`montecarlo`]: the experiment engine: Monte Carlo MI/SER, soft-output
//!   histograms, sweeps, channel-averaged analytic curves and an exact
//!   enumeration oracle for small systems.
//!
//! Work is spread over rayon when the `parallel` feature is enabled (the
//! default). Every random draw comes from a stream derived from
//! `(master_seed, purpose, trial, draw)`, so results are bit-identical
//! whether the engine runs on one thread or many.

pub mod analytic;
pub mod error;
pub mod exec;
pub mod math;
pub mod montecarlo;
pub mod receivers;
pub mod signal;

pub use error::{Error, Result};
pub use exec::Execution;
pub use math::{ComplexMatrix, RandomStream};
pub use num_complex::Complex64;
