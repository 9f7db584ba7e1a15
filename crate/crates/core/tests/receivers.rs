use num_complex::Complex64;
use onebit_mimo::math::{erfc, ComplexMatrix, RandomStream};
use onebit_mimo::receivers::*;
use onebit_mimo::signal::{sample_channel, QuantizerMode, SystemConfig};
use onebit_mimo::{Error, Execution};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn empirical_error(ah: &ComplexMatrix, pilots: &PilotBlock) -> f64 {
    pilots
        .slots()
        .map(|(x, y)| {
            let est = ah.mul_vec(y).unwrap();
            est.iter().zip(x).map(|(e, x)| (e - x).norm_sqr()).sum::<f64>()
        })
        .sum::<f64>()
        / pilots.num_slots() as f64
}

#[test]
fn direct_ls_is_a_strict_local_minimum() {
    let cfg = SystemConfig::from_snr_db(4, 2, 0.0).unwrap();
    let mut s = RandomStream::new(11, 0);
    let h = sample_channel(&cfg, &mut s);
    let pilots = PilotBlock::transmit(&h, &cfg, 16, PilotStyle::Random, QuantizerMode::OneBit, &mut s).unwrap();
    let a = ls_direct_filter(&pilots, LsOptions::default()).unwrap();
    let ah = a.matrix().hermitian();
    let best = empirical_error(&ah, &pilots);
    for _ in 0..100 {
        let dir = ComplexMatrix::from_fn(2, 4, |_, _| s.unit_complex_gaussian());
        let dir = dir.scale(c(1e-3 / dir.frobenius_norm(), 0.0));
        let perturbed = ah.add(&dir).unwrap();
        assert!(empirical_error(&perturbed, &pilots) > best);
    }
}

#[test]
fn direct_ls_needs_n_at_least_m() {
    let cfg = SystemConfig::from_snr_db(6, 2, 0.0).unwrap();
    let mut s = RandomStream::new(1, 0);
    let h = sample_channel(&cfg, &mut s);
    let pilots = PilotBlock::transmit(&h, &cfg, 5, PilotStyle::Random, QuantizerMode::OneBit, &mut s).unwrap();
    assert_eq!(
        ls_direct_filter(&pilots, LsOptions::default()),
        Err(Error::InsufficientPilots { required: 6, available: 5 })
    );
}

#[test]
fn direct_ls_inverts_a_noiseless_identity_channel() {
    let cfg = SystemConfig::new(4, 4, 1.0, 0.0).unwrap();
    let h = ComplexMatrix::identity(4);
    let pilots = PilotBlock::transmit(&h, &cfg, 8, PilotStyle::Orthogonal, QuantizerMode::Bypass, &mut RandomStream::new(0, 0)).unwrap();
    let a = ls_direct_filter(&pilots, LsOptions::default()).unwrap();
    for (x, y) in pilots.slots() {
        let est = soft_detect(&a, y).unwrap();
        for (e, x) in est.iter().zip(x) {
            assert!((e - x).norm() < 1e-8);
        }
    }
}

#[test]
fn singular_observation_gram_is_reported_or_loaded() {
    // every slot sees the same observation: rank-one Gram
    let y = vec![c(1.0, 1.0), c(1.0, -1.0)];
    let obs: Vec<Complex64> = y.iter().cycle().take(8).copied().collect();
    let x = vec![c(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2); 4];
    let pilots = PilotBlock::from_parts(1, 2, QuantizerMode::OneBit, x, obs).unwrap();
    assert!(matches!(
        ls_direct_filter(&pilots, LsOptions::default()),
        Err(Error::SingularObservationGram { dimension: 2 })
    ));
    assert!(ls_direct_filter(&pilots, LsOptions { diagonal_loading: true }).is_ok());
}

#[test]
fn ls_estimate_is_exact_for_noiseless_orthogonal_training() {
    let cfg = SystemConfig::new(6, 3, 1.0, 0.0).unwrap();
    let h = sample_channel(&cfg, &mut RandomStream::new(5, 5));
    let pilots = PilotBlock::transmit(&h, &cfg, 8, PilotStyle::Orthogonal, QuantizerMode::Bypass, &mut RandomStream::new(0, 0)).unwrap();
    let est = ls_channel_estimate(&pilots, &cfg, LsOptions::default()).unwrap();
    assert_eq!(est.provenance(), EstimateProvenance::LeastSquares);
    assert!(est.matrix().max_abs_diff(&h) < 1e-10);
}

#[test]
fn ls_estimate_errors() {
    let cfg = SystemConfig::from_snr_db(6, 3, 0.0).unwrap();
    let mut s = RandomStream::new(1, 0);
    let h = sample_channel(&cfg, &mut s);
    let short = PilotBlock::transmit(&h, &cfg, 2, PilotStyle::Random, QuantizerMode::OneBit, &mut s).unwrap();
    assert!(matches!(
        ls_channel_estimate(&short, &cfg, LsOptions::default()),
        Err(Error::InsufficientPilots { required: 3, available: 2 })
    ));
    // identical pilot vectors in every slot: rank-one pilot Gram
    let x = vec![c(1.0, 0.0); 3 * 4];
    let y = vec![c(1.0, 1.0); 6 * 4];
    let same = PilotBlock::from_parts(3, 6, QuantizerMode::OneBit, x, y).unwrap();
    assert!(matches!(
        ls_channel_estimate(&same, &cfg, LsOptions::default()),
        Err(Error::SingularPilotGram { dimension: 3 })
    ));
}

#[test]
fn quantized_correlation_terms_respect_the_alphabet_bound() {
    let cfg = SystemConfig::from_snr_db(8, 2, 7.0).unwrap();
    let mut s = RandomStream::new(2, 0);
    let h = sample_channel(&cfg, &mut s);
    let pilots = PilotBlock::transmit(&h, &cfg, 30, PilotStyle::Random, QuantizerMode::OneBit, &mut s).unwrap();
    let bound = 2.0 * (2.0 * cfg.transmit_power).sqrt();
    for (x, y) in pilots.slots() {
        for yi in y {
            for xj in x {
                assert!((yi * xj.conj() * cfg.transmit_power.sqrt()).norm() <= bound + 1e-12);
            }
        }
    }
}

/// Independent log posterior: explicit products of sign probabilities.
fn reference_log_posterior(h: Complex64, pilots: &PilotBlock, cfg: &SystemConfig) -> f64 {
    let mut lp = -h.norm_sqr();
    for (x, y) in pilots.slots() {
        let m = h * x[0] * cfg.transmit_power.sqrt();
        let sd = cfg.noise_variance.sqrt();
        let p_re = if y[0].re > 0.0 { 0.5 * erfc(-m.re / sd) } else { 0.5 * erfc(m.re / sd) };
        let p_im = if y[0].im > 0.0 { 0.5 * erfc(-m.im / sd) } else { 0.5 * erfc(m.im / sd) };
        lp += p_re.ln() + p_im.ln();
    }
    lp
}

#[test]
fn map_returns_the_exhaustive_argmax() {
    let grid = MapGrid::square(1.0, 5).unwrap();
    assert_eq!(grid.len(), 25);
    let cfg = SystemConfig::from_snr_db(1, 1, 10.0).unwrap();
    let h = ComplexMatrix::new(1, 1, vec![c(0.5, -1.0)]).unwrap();
    let pilots = PilotBlock::transmit(&h, &cfg, 50, PilotStyle::Random, QuantizerMode::OneBit, &mut RandomStream::new(3, 0)).unwrap();
    let est = map_channel_estimate(&pilots, &cfg, &grid, Execution::Sequential).unwrap();
    assert_eq!(est.provenance(), EstimateProvenance::Map);
    let best = grid
        .points()
        .iter()
        .copied()
        .max_by(|a, b| reference_log_posterior(*a, &pilots, &cfg).total_cmp(&reference_log_posterior(*b, &pilots, &cfg)))
        .unwrap();
    assert_eq!(est.matrix()[(0, 0)], best);
    for &p in grid.points() {
        let lib = map_log_posterior(&[p], &pilots, 0, &cfg);
        assert!((lib - reference_log_posterior(p, &pilots, &cfg)).abs() < 1e-9);
    }
}

#[test]
fn map_without_pilots_returns_the_prior_mode() {
    let cfg = SystemConfig::from_snr_db(3, 2, 0.0).unwrap();
    let pilots = PilotBlock::from_parts(2, 3, QuantizerMode::OneBit, vec![], vec![]).unwrap();
    let est = map_channel_estimate(&pilots, &cfg, &MapGrid::square(3.0, 7).unwrap(), Execution::Parallel).unwrap();
    assert!(est.matrix().as_slice().iter().all(|z| z.norm() == 0.0));
}

#[test]
fn map_search_cap_boundary() {
    let cfg = SystemConfig::from_snr_db(1, 3, 0.0).unwrap();
    let h = sample_channel(&cfg, &mut RandomStream::new(0, 0));
    let pilots = PilotBlock::transmit(&h, &cfg, 1, PilotStyle::Random, QuantizerMode::OneBit, &mut RandomStream::new(0, 1)).unwrap();
    // 100 points: 10 × 10 lattice, 100³ = 10⁶ candidates is allowed
    let allowed = MapGrid::square(2.0, 10).unwrap();
    assert!(map_channel_estimate(&pilots, &cfg, &allowed, Execution::Parallel).is_ok());
    // 101 points (0 plus 50 symmetric pairs): 101³ > 10⁶
    let mut pts = vec![c(0.0, 0.0)];
    for i in 1..=50 {
        pts.push(c(i as f64 * 0.05, 0.0));
        pts.push(c(-(i as f64) * 0.05, 0.0));
    }
    let refused = MapGrid::from_points(pts).unwrap();
    assert!(matches!(
        map_channel_estimate(&pilots, &cfg, &refused, Execution::Parallel),
        Err(Error::ComplexityCap { evaluations: 1_030_301, cap: 1_000_000 })
    ));
}

#[test]
fn map_needs_quantized_pilots_and_symmetric_grid() {
    let cfg = SystemConfig::from_snr_db(2, 1, 0.0).unwrap();
    let h = sample_channel(&cfg, &mut RandomStream::new(0, 0));
    let pilots = PilotBlock::transmit(&h, &cfg, 4, PilotStyle::Random, QuantizerMode::Bypass, &mut RandomStream::new(0, 1)).unwrap();
    assert!(matches!(
        map_channel_estimate(&pilots, &cfg, &MapGrid::default(), Execution::Parallel),
        Err(Error::Unsupported(_))
    ));
    assert!(MapGrid::from_points(vec![c(1.0, 0.0), c(0.5, 0.0)]).is_err());
    assert_eq!(MapGrid::default().len(), 625);
}

#[test]
fn noiseless_matched_and_zero_forcing_outputs() {
    let cfg = SystemConfig::new(5, 1, 1.0, 0.0).unwrap();
    let mut s = RandomStream::new(8, 0);
    let h = sample_channel(&cfg, &mut s);
    let x = onebit_mimo::signal::sample_symbols(&cfg, &mut s);
    let r = onebit_mimo::signal::propagate(&h, &x, &cfg, &mut s).unwrap();
    let mrc = mrc_filter(&ChannelEstimate::full(&h)).unwrap();
    assert!((soft_detect(&mrc, &r).unwrap()[0] - x.values()[0]).norm() < 1e-12);

    let cfg = SystemConfig::new(6, 3, 4.0, 0.0).unwrap();
    let h = sample_channel(&cfg, &mut s);
    let x = onebit_mimo::signal::sample_symbols(&cfg, &mut s);
    let r = onebit_mimo::signal::propagate(&h, &x, &cfg, &mut s).unwrap();
    let zf = zf_filter(&ChannelEstimate::full(&h)).unwrap();
    let soft = soft_detect(&zf, &r).unwrap();
    for (e, x) in soft.iter().zip(x.values()) {
        assert!((e - x * 2.0).norm() < 1e-8);
    }
    assert_eq!(demodulate(&soft), x.symbols());
}
