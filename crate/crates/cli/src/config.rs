//! Run configuration: a flat TOML document, strictly validated.
//!
//! ```toml
//! format_version = 1
//! master_seed = 7
//! num_antennas = 4
//! num_users = 2
//! snr_db = [0.0]
//! filter = "mrc"          # mrc | zf | direct_ls
//! csi = "full"            # full | estimated (then pilot_len is required)
//! quantizer = "one_bit"   # one_bit | bypass
//! ```
//!
//! A config names either a figure preset (`figure = 1..8`) or an explicit
//! experiment, never both.

use std::fmt;
use std::path::PathBuf;

use onebit_mimo::montecarlo::{CsiMode, ExperimentSpec, Metric};
use onebit_mimo::receivers::{FilterKind, LsOptions, PilotStyle};
use onebit_mimo::signal::QuantizerMode;
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub format_version: u32,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub source: ConfigSource,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigSource {
    Figure(u8),
    Explicit(ExplicitSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitSpec {
    pub num_antennas: usize,
    pub num_users: usize,
    pub snr_db: Vec<f64>,
    pub filter: FilterKind,
    pub csi: CsiMode,
    pub quantizer: QuantizerMode,
    pub metrics: Vec<Metric>,
    pub channel_trials: usize,
    pub inner_trials: usize,
    pub noise_variance: f64,
    pub pilot_style: PilotStyle,
    pub diagonal_loading: bool,
    pub soft_bins: usize,
}

impl ExplicitSpec {
    pub fn to_experiment(&self, master_seed: u64) -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(self.num_antennas, self.num_users, self.filter);
        spec.snr_db_grid = self.snr_db.clone();
        spec.csi = self.csi;
        spec.quantizer = self.quantizer;
        spec.channel_trials = self.channel_trials;
        spec.inner_trials = self.inner_trials;
        spec.noise_variance = self.noise_variance;
        spec.pilot_style = self.pilot_style;
        spec.ls_options = LsOptions {
            diagonal_loading: self.diagonal_loading,
        };
        spec.soft_bins = self.soft_bins;
        spec.master_seed = master_seed;
        spec
    }
}

/// A rejected config: the offending key (when known) and its line.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "`{key}`: ")?;
        }
        write!(f, "{}", self.message)
    }
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    format_version: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    figure: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_antennas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_users: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    snr_db: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    filter: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    csi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pilot_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quantizer: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metrics: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    channel_trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inner_trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pilot_style: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagonal_loading: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    soft_bins: Option<usize>,
}

const EXPLICIT_KEYS: [&str; 13] = [
    "num_antennas",
    "num_users",
    "snr_db",
    "filter",
    "csi",
    "pilot_len",
    "quantizer",
    "metrics",
    "channel_trials",
    "inner_trials",
    "noise_variance",
    "pilot_style",
    "diagonal_loading",
];

/// 1-based line of the first `key = ...` assignment in `text`.
fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let t = l.trim_start();
        t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

struct Diagnostics<'a> {
    text: &'a str,
}

impl Diagnostics<'_> {
    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            key: Some(key.to_string()),
            line: line_of(self.text, key),
            message: message.into(),
        }
    }
}

fn parse_filter(s: &str) -> Option<FilterKind> {
    match s {
        "mrc" => Some(FilterKind::Mrc),
        "zf" => Some(FilterKind::Zf),
        "direct_ls" => Some(FilterKind::DirectLs),
        _ => None,
    }
}

fn parse_quantizer(s: &str) -> Option<QuantizerMode> {
    match s {
        "one_bit" => Some(QuantizerMode::OneBit),
        "bypass" => Some(QuantizerMode::Bypass),
        _ => None,
    }
}

fn parse_metric(s: &str) -> Option<Metric> {
    match s {
        "mi_hard" => Some(Metric::MiHard),
        "mi_soft" => Some(Metric::MiSoft),
        "ser" => Some(Metric::Ser),
        _ => None,
    }
}

fn pilot_style_name(p: PilotStyle) -> &'static str {
    match p {
        PilotStyle::Random => "random",
        PilotStyle::Orthogonal => "orthogonal",
    }
}

/// Parses and validates a config. Missing optional keys take their
/// defaults: seed 0, full CSI, 1-bit quantizer, metrics `mi_hard` and
/// `ser`, 100 × 100 trials, unit noise variance, random pilots, no
/// diagonal loading, 8 soft-MI bins.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        ConfigError {
            key: None,
            line,
            message: e.message().trim().to_string(),
        }
    })?;
    let d = Diagnostics { text };

    let format_version = raw.format_version.unwrap_or(FORMAT_VERSION);
    if format_version != FORMAT_VERSION {
        return Err(d.err("format_version", format!("unsupported version {format_version}, expected {FORMAT_VERSION}")));
    }
    let master_seed = raw.master_seed.unwrap_or(0);
    let output = raw.output.clone().map(PathBuf::from);

    if let Some(figure) = raw.figure {
        if !(1..=8).contains(&figure) {
            return Err(d.err("figure", format!("figure presets are 1 to 8, got {figure}")));
        }
        let present = [
            raw.num_antennas.is_some(),
            raw.num_users.is_some(),
            raw.snr_db.is_some(),
            raw.filter.is_some(),
            raw.csi.is_some(),
            raw.pilot_len.is_some(),
            raw.quantizer.is_some(),
            raw.metrics.is_some(),
            raw.channel_trials.is_some(),
            raw.inner_trials.is_some(),
            raw.noise_variance.is_some(),
            raw.pilot_style.is_some(),
            raw.diagonal_loading.is_some(),
        ];
        if let Some(i) = present.iter().position(|&p| p) {
            return Err(d.err(EXPLICIT_KEYS[i], "cannot be combined with a figure preset"));
        }
        if raw.soft_bins.is_some() {
            return Err(d.err("soft_bins", "cannot be combined with a figure preset"));
        }
        return Ok(RunConfig {
            format_version,
            master_seed,
            output,
            source: ConfigSource::Figure(figure),
        });
    }

    let required = |v: Option<usize>, key: &str| -> Result<usize, ConfigError> {
        match v {
            None => Err(d.err(key, "missing required key")),
            Some(0) => Err(d.err(key, "must be at least 1")),
            Some(n) => Ok(n),
        }
    };
    let num_antennas = required(raw.num_antennas, "num_antennas")?;
    let num_users = required(raw.num_users, "num_users")?;
    let snr_db = raw.snr_db.clone().ok_or_else(|| d.err("snr_db", "missing required key"))?;
    if let Some(bad) = snr_db.iter().find(|s| !s.is_finite()) {
        return Err(d.err("snr_db", format!("SNR values must be finite, got {bad}")));
    }
    let filter_name = raw.filter.as_deref().ok_or_else(|| d.err("filter", "missing required key"))?;
    let filter = parse_filter(filter_name).ok_or_else(|| d.err("filter", format!("unknown filter {filter_name:?}, expected mrc, zf or direct_ls")))?;
    let quantizer = match raw.quantizer.as_deref() {
        None => QuantizerMode::OneBit,
        Some(q) => parse_quantizer(q).ok_or_else(|| d.err("quantizer", format!("unknown quantizer {q:?}, expected one_bit or bypass")))?,
    };
    let csi = match (raw.csi.as_deref().unwrap_or("full"), raw.pilot_len) {
        ("full", None) => CsiMode::Full,
        ("full", Some(_)) => return Err(d.err("pilot_len", "only meaningful with csi = \"estimated\"")),
        ("estimated", None) => return Err(d.err("pilot_len", "required with csi = \"estimated\"")),
        ("estimated", Some(n)) => {
            let min = if filter == FilterKind::DirectLs { num_antennas } else { num_users };
            if n < min {
                return Err(d.err("pilot_len", format!("needs at least {min} slots for {}, got {n}", filter.name())));
            }
            CsiMode::Estimated { pilots: n }
        }
        (other, _) => return Err(d.err("csi", format!("unknown CSI mode {other:?}, expected full or estimated"))),
    };
    if filter == FilterKind::DirectLs && csi == CsiMode::Full {
        return Err(d.err("csi", "direct_ls is trained from pilots and needs csi = \"estimated\""));
    }
    let metrics = match &raw.metrics {
        None => vec![Metric::MiHard, Metric::Ser],
        Some(list) => {
            if list.is_empty() {
                return Err(d.err("metrics", "must name at least one metric"));
            }
            let mut out = Vec::new();
            for m in list {
                let metric = parse_metric(m).ok_or_else(|| d.err("metrics", format!("unknown metric {m:?}, expected mi_hard, mi_soft or ser")))?;
                if out.contains(&metric) {
                    return Err(d.err("metrics", format!("{m:?} listed twice")));
                }
                out.push(metric);
            }
            out
        }
    };
    let channel_trials = required(Some(raw.channel_trials.unwrap_or(100)), "channel_trials")?;
    let inner_trials = required(Some(raw.inner_trials.unwrap_or(100)), "inner_trials")?;
    if metrics.iter().any(|m| matches!(m, Metric::MiHard | Metric::MiSoft)) && inner_trials < 16 {
        return Err(d.err("inner_trials", "mutual information needs at least 16 inner trials per channel"));
    }
    let noise_variance = raw.noise_variance.unwrap_or(1.0);
    if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
        return Err(d.err("noise_variance", format!("must be finite and non-negative, got {noise_variance}")));
    }
    let pilot_style = match raw.pilot_style.as_deref() {
        None | Some("random") => PilotStyle::Random,
        Some("orthogonal") => PilotStyle::Orthogonal,
        Some(other) => return Err(d.err("pilot_style", format!("unknown pilot style {other:?}, expected random or orthogonal"))),
    };
    let soft_bins = raw.soft_bins.unwrap_or(8);
    if soft_bins < 8 {
        return Err(d.err("soft_bins", format!("must be at least 8, got {soft_bins}")));
    }

    Ok(RunConfig {
        format_version,
        master_seed,
        output,
        source: ConfigSource::Explicit(ExplicitSpec {
            num_antennas,
            num_users,
            snr_db,
            filter,
            csi,
            quantizer,
            metrics,
            channel_trials,
            inner_trials,
            noise_variance,
            pilot_style,
            diagonal_loading: raw.diagonal_loading.unwrap_or(false),
            soft_bins,
        }),
    })
}

/// Writes every field explicitly, so that `parse_config(&emit_config(c)) == c`.
pub fn emit_config(config: &RunConfig) -> String {
    let mut raw = RawConfig {
        format_version: Some(config.format_version),
        master_seed: Some(config.master_seed),
        output: config.output.as_ref().map(|p| p.to_string_lossy().into_owned()),
        ..RawConfig::default()
    };
    match &config.source {
        ConfigSource::Figure(id) => raw.figure = Some(*id),
        ConfigSource::Explicit(s) => {
            raw.num_antennas = Some(s.num_antennas);
            raw.num_users = Some(s.num_users);
            raw.snr_db = Some(s.snr_db.clone());
            raw.filter = Some(s.filter.name().to_string());
            raw.csi = Some(s.csi.name().to_string());
            if let CsiMode::Estimated { pilots } = s.csi {
                raw.pilot_len = Some(pilots);
            }
            raw.quantizer = Some(s.quantizer.name().to_string());
            raw.metrics = Some(s.metrics.iter().map(|m| m.name().to_string()).collect());
            raw.channel_trials = Some(s.channel_trials);
            raw.inner_trials = Some(s.inner_trials);
            raw.noise_variance = Some(s.noise_variance);
            raw.pilot_style = Some(pilot_style_name(s.pilot_style).to_string());
            raw.diagonal_loading = Some(s.diagonal_loading);
            raw.soft_bins = Some(s.soft_bins);
        }
    }
    toml::to_string(&raw).expect("flat config always serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "num_antennas = 4\nnum_users = 2\nsnr_db = [0.0]\nfilter = \"mrc\"\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.master_seed, 0);
        assert_eq!(c.format_version, 1);
        let ConfigSource::Explicit(s) = c.source else { panic!() };
        assert_eq!((s.num_antennas, s.num_users), (4, 2));
        assert_eq!(s.csi, CsiMode::Full);
        assert_eq!(s.quantizer, QuantizerMode::OneBit);
        assert_eq!(s.metrics, vec![Metric::MiHard, Metric::Ser]);
        assert_eq!((s.channel_trials, s.inner_trials), (100, 100));
    }

    #[test]
    fn zero_antennas_names_the_key_and_line() {
        let text = "# comment\nnum_antennas = 0\nnum_users = 2\nsnr_db = [0.0]\nfilter = \"mrc\"\n";
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("num_antennas"));
        assert_eq!(e.line, Some(2));
        assert!(e.to_string().contains("num_antennas"));
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let e = parse_config(&format!("{MINIMAL}num_antenas = 3\n")).unwrap_err();
        assert_eq!(e.line, Some(5));
        assert!(e.message.contains("num_antenas"), "{e}");
    }

    #[test]
    fn figure_excludes_explicit_keys() {
        assert_eq!(parse_config("figure = 2\n").unwrap().source, ConfigSource::Figure(2));
        let e = parse_config("figure = 2\nnum_users = 3\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("num_users"));
        assert!(parse_config("figure = 9\n").is_err());
    }

    #[test]
    fn semantic_checks() {
        let est = format!("{MINIMAL}csi = \"estimated\"\n");
        assert_eq!(parse_config(&est).unwrap_err().key.as_deref(), Some("pilot_len"));
        let dls = MINIMAL.replace("mrc", "direct_ls");
        assert_eq!(parse_config(&dls).unwrap_err().key.as_deref(), Some("csi"));
        let short = format!("{dls}csi = \"estimated\"\npilot_len = 3\n");
        assert_eq!(parse_config(&short).unwrap_err().key.as_deref(), Some("pilot_len"));
        assert!(parse_config(&format!("{MINIMAL}format_version = 2\n")).is_err());
        assert!(parse_config(&format!("{MINIMAL}inner_trials = 8\n")).is_err());
        assert!(parse_config(&format!("{MINIMAL}metrics = [\"ser\"]\ninner_trials = 8\n")).is_ok());
    }

    #[test]
    fn emit_then_parse_round_trips() {
        let mut c = parse_config(MINIMAL).unwrap();
        assert_eq!(parse_config(&emit_config(&c)).unwrap(), c);
        c.output = Some(PathBuf::from("out/a.csv"));
        c.master_seed = u64::MAX;
        if let ConfigSource::Explicit(s) = &mut c.source {
            s.snr_db = vec![-30.0, 0.1, 1e-7, 12.5];
            s.csi = CsiMode::Estimated { pilots: 40 };
            s.filter = FilterKind::Zf;
            s.metrics = vec![Metric::Ser, Metric::MiSoft];
            s.noise_variance = 0.3;
            s.pilot_style = PilotStyle::Orthogonal;
        }
        assert_eq!(parse_config(&emit_config(&c)).unwrap(), c);
        let fig = parse_config("figure = 7\nmaster_seed = 3\n").unwrap();
        assert_eq!(parse_config(&emit_config(&fig)).unwrap(), fig);
    }
}
