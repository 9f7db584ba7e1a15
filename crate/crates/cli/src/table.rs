//! CSV emission. Results and histograms are rendered in memory and then
//! written through a temp file in the destination directory, renamed into
//! place.

use std::io::Write;
use std::path::Path;

use onebit_mimo::montecarlo::{SoftHistogram, SweepRow};

pub const RESULT_HEADER: [&str; 14] = [
    "snr_db",
    "filter",
    "csi_mode",
    "quantizer_mode",
    "pilot_len_N",
    "metric",
    "value",
    "std_error",
    "channel_trials",
    "inner_trials",
    "master_seed",
    "M",
    "K",
    "error",
];

pub const HISTOGRAM_HEADER: [&str; 5] = ["panel", "axis", "bin_center", "empirical_density", "analytic_density"];

/// One CSV line of a results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub snr_db: f64,
    pub filter: String,
    pub csi_mode: String,
    pub quantizer_mode: String,
    pub pilot_len: usize,
    pub metric: String,
    pub value: Option<f64>,
    pub std_error: Option<f64>,
    pub channel_trials: usize,
    pub inner_trials: usize,
    pub master_seed: u64,
    pub antennas: usize,
    pub users: usize,
    pub error: Option<String>,
}

impl From<&SweepRow> for ResultRow {
    fn from(r: &SweepRow) -> Self {
        Self {
            snr_db: r.snr_db,
            filter: r.filter.name().to_string(),
            csi_mode: r.csi.name().to_string(),
            quantizer_mode: r.quantizer.name().to_string(),
            pilot_len: r.csi.pilot_len(),
            metric: r.label(),
            value: r.value,
            std_error: r.std_error,
            channel_trials: r.channel_trials,
            inner_trials: r.inner_trials,
            master_seed: r.master_seed,
            antennas: r.antennas,
            users: r.users,
            error: r.error.clone(),
        }
    }
}

/// Sort key `(metric, filter, snr_db)`, then CSI mode, quantizer and `N`
/// so that the order is total.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.metric
            .cmp(&b.metric)
            .then_with(|| a.filter.cmp(&b.filter))
            .then_with(|| a.snr_db.total_cmp(&b.snr_db))
            .then_with(|| a.csi_mode.cmp(&b.csi_mode))
            .then_with(|| a.quantizer_mode.cmp(&b.quantizer_mode))
            .then_with(|| a.pilot_len.cmp(&b.pilot_len))
    });
}

/// `printf("%.9g")`.
pub fn format_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    const P: i32 = 9;
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= P {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_g9).unwrap_or_default()
}

pub fn render_results(rows: &[ResultRow]) -> Vec<u8> {
    let mut w = ::csv::Writer::from_writer(Vec::new());
    w.write_record(RESULT_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            format_g9(r.snr_db),
            r.filter.clone(),
            r.csi_mode.clone(),
            r.quantizer_mode.clone(),
            r.pilot_len.to_string(),
            r.metric.clone(),
            opt(r.value),
            opt(r.std_error),
            r.channel_trials.to_string(),
            r.inner_trials.to_string(),
            r.master_seed.to_string(),
            r.antennas.to_string(),
            r.users.to_string(),
            r.error.clone().unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Panels are numbered from 1 in the order given.
pub fn render_histograms(panels: &[SoftHistogram]) -> Vec<u8> {
    let mut w = ::csv::Writer::from_writer(Vec::new());
    w.write_record(HISTOGRAM_HEADER).expect("in-memory write");
    for (p, hist) in panels.iter().enumerate() {
        for axis in [&hist.real, &hist.imag] {
            for ((c, e), a) in axis.centers.iter().zip(&axis.empirical_density).zip(&axis.analytic_density) {
                w.write_record([(p + 1).to_string(), axis.axis.to_string(), format_g9(*c), format_g9(*e), format_g9(*a)])
                    .expect("in-memory write");
            }
        }
    }
    w.into_inner().expect("in-memory flush")
}

/// Writes `bytes` to `path` via a sibling temp file and a rename, so a
/// reader never sees a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
