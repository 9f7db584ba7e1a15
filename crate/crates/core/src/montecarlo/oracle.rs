use num_complex::Complex64;

use crate::analytic::{mi_hard, quadrant_pmf, ser_analytic, TransitionPmf, QUANTIZER_CONSTELLATION};
use crate::error::{Error, Result};
use crate::receivers::ReceiveFilter;
use crate::signal::{ChannelMatrix, QpskSymbol, QuantizerMode, SystemConfig};

use super::{build_filter, mean_and_std_error, ExperimentSpec, Method, Metric, MetricEstimate, MetricPoint};

pub const ORACLE_MAX_ANTENNAS: usize = 6;
pub const ORACLE_MAX_USERS: usize = 3;
const ORACLE_MAX_TERMS: u128 = 100_000_000;

/// Exact `p(x̂_k | x_k, H)` with its MI and SER.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub user: usize,
    pub transition: TransitionPmf,
    pub mi: f64,
    pub ser: f64,
}

fn check_cap(config: &SystemConfig) -> Result<()> {
    let (m, k) = (config.antennas, config.users);
    let terms = 4u128.checked_pow((m + k) as u32).unwrap_or(u128::MAX);
    if m > ORACLE_MAX_ANTENNAS || k > ORACLE_MAX_USERS || terms > ORACLE_MAX_TERMS {
        return Err(Error::OracleCap {
            antennas: m,
            users: k,
            max_antennas: ORACLE_MAX_ANTENNAS,
            max_users: ORACLE_MAX_USERS,
        });
    }
    Ok(())
}

/// Exact enumeration for every user at once.
///
/// Given the full symbol vector `x`, each quantized axis of each antenna is
/// an independent Gaussian sign, so `P(y | x, H)` factorizes exactly. The
/// sum runs over all `4ᴷ` symbol vectors and all `4ᴹ` quantizer outputs,
/// pushing each `y` through the filter and the quadrant decision. No
/// Gaussian approximation of the interference is involved.
pub fn exact_enumeration_oracle_all(h: &ChannelMatrix, config: &SystemConfig, filter: &ReceiveFilter) -> Result<Vec<OracleResult>> {
    config.validate()?;
    check_cap(config)?;
    let (m, k) = (config.antennas, config.users);
    if h.shape() != (m, k) || filter.matrix().shape() != (m, k) {
        return Err(Error::ShapeMismatch {
            expected: format!("{m}x{k} channel and filter"),
            actual: format!("{:?} channel, {:?} filter", h.shape(), filter.matrix().shape()),
        });
    }
    let outputs = 1usize << (2 * m);
    // decisions[y * k + user] for every output pattern y (base-4 digits, antenna 0 slowest)
    let mut decisions = vec![0usize; outputs * k];
    let mut y = vec![Complex64::new(0.0, 0.0); m];
    for code in 0..outputs {
        fill_output(code, &mut y);
        let soft = filter.matrix().hermitian_mul_vec(&y)?;
        for (user, z) in soft.iter().enumerate() {
            decisions[code * k + user] = QpskSymbol::from_quadrant(*z).index();
        }
    }

    let amp = config.transmit_power.sqrt();
    let patterns = 1usize << (2 * k);
    let weight = 1.0 / (patterns / 4) as f64;
    let mut joint = vec![[[0.0f64; 4]; 4]; k];
    let mut x = vec![Complex64::new(0.0, 0.0); k];
    let mut sent = vec![0usize; k];
    let mut out_prob = vec![0.0; outputs];
    for pattern in 0..patterns {
        for j in 0..k {
            sent[j] = (pattern >> (2 * (k - 1 - j))) & 3;
            x[j] = QpskSymbol::ALL[sent[j]].value();
        }
        let per_antenna: Vec<[f64; 4]> = (0..m)
            .map(|i| {
                let mean: Complex64 = h.row(i).iter().zip(&x).map(|(a, b)| a * b).sum::<Complex64>() * amp;
                quadrant_pmf(mean, config.noise_variance)
            })
            .collect();
        output_distribution(&per_antenna, &mut out_prob);
        for (code, &p) in out_prob.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for user in 0..k {
                joint[user][sent[user]][decisions[code * k + user]] += p * weight;
            }
        }
    }
    joint
        .into_iter()
        .enumerate()
        .map(|(user, rows)| {
            let mut t = rows;
            for row in t.iter_mut() {
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|p| *p /= s);
            }
            let transition = TransitionPmf(t);
            Ok(OracleResult {
                user,
                transition,
                mi: mi_hard(&transition)?,
                ser: ser_analytic(&transition)?,
            })
        })
        .collect()
}

/// Exact enumeration for a single user; see [`exact_enumeration_oracle_all`].
pub fn exact_enumeration_oracle(h: &ChannelMatrix, config: &SystemConfig, filter: &ReceiveFilter, user: usize) -> Result<OracleResult> {
    if user >= config.users {
        return Err(Error::invalid(format!("user {user} out of range for K = {}", config.users)));
    }
    Ok(exact_enumeration_oracle_all(h, config, filter)?.swap_remove(user))
}

/// Oracle hard MI and SER averaged over users and over the channel draws
/// of `spec` (filters built exactly as the Monte Carlo engine builds them).
/// Returns `[mi_hard, ser]` curves.
pub fn run_oracle(spec: &ExperimentSpec) -> Result<Vec<MetricEstimate>> {
    spec.validate()?;
    if spec.quantizer != QuantizerMode::OneBit {
        return Err(Error::Unsupported("the enumeration oracle covers 1-bit observations only".into()));
    }
    check_cap(&SystemConfig::new(spec.antennas, spec.users, 1.0, spec.noise_variance)?)?;
    let mut curves: Vec<MetricEstimate> = [Metric::MiHard, Metric::Ser]
        .into_iter()
        .map(|metric| MetricEstimate {
            metric,
            method: Method::Oracle,
            points: Vec::new(),
        })
        .collect();
    for &snr in &spec.snr_db_grid {
        let config = spec.system_at(snr)?;
        let per_channel = spec.execution.map(spec.channel_trials, |t| -> Result<[f64; 2]> {
            let h = spec.channel_for(t, &config);
            let filter = build_filter(spec, &h, &config, t)?;
            let users = exact_enumeration_oracle_all(&h, &config, &filter)?;
            let k = users.len() as f64;
            Ok([users.iter().map(|u| u.mi).sum::<f64>() / k, users.iter().map(|u| u.ser).sum::<f64>() / k])
        });
        let per_channel: Vec<[f64; 2]> = per_channel.into_iter().collect::<Result<_>>().map_err(|e| e.at_snr(snr))?;
        for (i, curve) in curves.iter_mut().enumerate() {
            let values: Vec<f64> = per_channel.iter().map(|v| v[i]).collect();
            let (value, std_error) = mean_and_std_error(&values);
            curve.points.push(MetricPoint {
                snr_db: snr,
                value,
                std_error,
                trials: spec.channel_trials,
            });
        }
    }
    Ok(curves)
}

fn fill_output(code: usize, y: &mut [Complex64]) {
    let m = y.len();
    for (i, yi) in y.iter_mut().enumerate() {
        *yi = QUANTIZER_CONSTELLATION[(code >> (2 * (m - 1 - i))) & 3];
    }
}

/// `P(y) = Π_i p_i(y_i)` for every output pattern, built antenna by antenna.
fn output_distribution(per_antenna: &[[f64; 4]], out: &mut [f64]) {
    out[0] = 1.0;
    let mut len = 1;
    for p in per_antenna {
        // expand in place from the back so earlier entries are still unread
        for idx in (0..len).rev() {
            let base = out[idx];
            for c in (0..4).rev() {
                out[idx * 4 + c] = base * p[c];
            }
        }
        len *= 4;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{erfc, ComplexMatrix, RandomStream};
    use crate::receivers::{mrc_filter, ChannelEstimate};
    use crate::signal::sample_channel;

    fn mrc(h: &ChannelMatrix) -> ReceiveFilter {
        mrc_filter(&ChannelEstimate::full(h)).unwrap()
    }

    #[test]
    fn very_low_snr_is_uniform() {
        // the deviation from 1/4 is first order in √Pt, about 4e-6 at −100 dB
        for (snr, tol) in [(-100.0, 1e-4), (-120.0, 1e-6)] {
            let cfg = SystemConfig::from_snr_db(3, 2, snr).unwrap();
            let h = sample_channel(&cfg, &mut RandomStream::new(2, 0));
            for r in exact_enumeration_oracle_all(&h, &cfg, &mrc(&h)).unwrap() {
                for row in r.transition.0 {
                    for p in row {
                        assert!((p - 0.25).abs() < tol, "p = {p} at {snr} dB");
                    }
                }
                assert!(r.mi <= 1e-5);
                assert!((r.ser - 0.75).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn single_antenna_single_user_closed_form() {
        // real positive h: the MRC output is y/h, so the decision is y itself
        let cfg = SystemConfig::new(1, 1, 2.0, 0.7).unwrap();
        let h = ComplexMatrix::new(1, 1, vec![Complex64::new(0.8, 0.0)]).unwrap();
        let r = exact_enumeration_oracle(&h, &cfg, &mrc(&h), 0).unwrap();
        let a = 2f64.sqrt() * 0.8 * std::f64::consts::FRAC_1_SQRT_2;
        let q = 0.5 * erfc(-a / 0.7f64.sqrt());
        for s in 0..4 {
            assert!((r.transition.0[s][s] - q * q).abs() < 1e-12);
        }
        assert!((r.ser - (1.0 - q * q)).abs() < 1e-12);
    }

    #[test]
    fn output_distribution_sums_to_one() {
        let p = [[0.1, 0.2, 0.3, 0.4], [0.25; 4], [0.7, 0.1, 0.1, 0.1]];
        let mut out = vec![0.0; 64];
        output_distribution(&p, &mut out);
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        // code 0b00_01_11: antenna 0 → s1, antenna 1 → s2, antenna 2 → s4
        assert!((out[0b000111] - 0.1 * 0.25 * 0.1).abs() < 1e-16);
    }

    #[test]
    fn cap_rejects_seven_antennas() {
        let cfg = SystemConfig::from_snr_db(7, 1, 0.0).unwrap();
        let h = ComplexMatrix::zeros(7, 1);
        let f = ReceiveFilter::from_parts(ComplexMatrix::zeros(7, 1), crate::receivers::FilterKind::Mrc);
        let err = exact_enumeration_oracle_all(&h, &cfg, &f).unwrap_err();
        assert!(matches!(err, Error::OracleCap { antennas: 7, .. }));
        assert!(err.to_string().contains("1e8"));
    }
}
