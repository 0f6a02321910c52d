//! Key-value configuration files for `simulate`.
//!
//! One `key = value` pair per line; `#` starts a comment. Keys are the
//! long CLI flag names without dashes (`scheme`, `nt`, `nr`, `mod`, `snr`,
//! `trials`, `max-trials`, `detectors`, `seed`, `min-errors`, `alpha`,
//! `out`, `format`, `threads`). List values take commas or spaces; `snr`
//! also accepts `start:step:stop`.
//!
//! ```text
//! # reproduce the m = 6, Nr = 4 BER curves
//! scheme = sm
//! nt = 4
//! nr = 4
//! mod = 16
//! snr = 0:2:20
//! detectors = sm-ml, sm-rx, sm-tx
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use super::HarnessError;

pub const KNOWN_KEYS: [&str; 14] = [
    "scheme",
    "nt",
    "nr",
    "mod",
    "snr",
    "trials",
    "max-trials",
    "detectors",
    "seed",
    "min-errors",
    "alpha",
    "out",
    "format",
    "threads",
];

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, HarnessError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(HarnessError::ConfigError(format!(
                "line {}: expected `key = value`",
                lineno + 1
            )));
        };
        let key = k.trim().replace('_', "-");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(HarnessError::ConfigError(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>, HarnessError> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Splits a list value on commas and whitespace.
pub fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty())
}

/// Parses `a:step:b` (inclusive) or an explicit list of SNR values in dB.
pub fn parse_snr(value: &str) -> Result<Vec<f64>, HarnessError> {
    let bad = |m: String| HarnessError::ConfigError(m);
    let value = value.trim();
    if value.contains(':') {
        let parts: Vec<f64> = value
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| bad(format!("snr `{value}`: {e}"))))
            .collect::<Result<_, _>>()?;
        let [start, step, stop] = parts[..] else {
            return Err(bad(format!("snr range `{value}` must be start:step:stop")));
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad(format!("snr range `{value}` is empty or has a non-positive step")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + step * i as f64).collect());
    }
    split_list(value)
        .map(|p| p.parse::<f64>().map_err(|e| bad(format!("snr value `{p}`: {e}"))))
        .collect()
}
