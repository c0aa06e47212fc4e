//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Command-line overrides use
//! the same keys and are applied after the file, in order.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;
use twrn_cs::experiment::TrialOptions;
use twrn_cs::{EstimatorKind, MseMode, SweepConfig, TwrnConfig};

/// Every accepted key, in the order written by [`render`].
pub const KEYS: &[&str] = &[
    "L",
    "N",
    "S0",
    "P",
    "Pr",
    "snr_grid",
    "trials",
    "estimators",
    "seed",
    "cosamp_sparsity",
    "cosamp_max_iters",
    "halt_tol",
    "mse_mode",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key {key:?}; valid keys are: {}", KEYS.join(", "))]
    UnknownKey { key: String },
    #[error("invalid value {value:?} for {key}: {reason}")]
    Value {
        key: String,
        value: String,
        reason: String,
    },
    #[error("invalid {key}: {reason}")]
    Invalid { key: &'static str, reason: String },
}

/// Splits a `KEY=VALUE` override.
pub fn parse_override(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, found {s:?}"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[derive(Debug, Default)]
struct Raw {
    taps: Option<usize>,
    training_len: Option<usize>,
    sparsity: Option<usize>,
    power: Option<f64>,
    relay_power: Option<f64>,
    snr_grid: Option<Vec<f64>>,
    trials: Option<usize>,
    estimators: Option<BTreeSet<EstimatorKind>>,
    seed: Option<u64>,
    cosamp_sparsity: Option<Option<usize>>,
    cosamp_max_iters: Option<Option<usize>>,
    halt_tol: Option<f64>,
    mse_mode: Option<MseMode>,
}

fn value_err(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| value_err(key, value, e))
}

/// `auto` (or empty) leaves the value to be derived per trial.
fn optional_count(key: &str, value: &str) -> Result<Option<usize>, ConfigError> {
    match value {
        "" | "auto" => Ok(None),
        v => num(key, v).map(Some),
    }
}

/// `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_snr_grid(value: &str) -> Result<Vec<f64>, ConfigError> {
    let key = "snr_grid";
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let start: f64 = num(key, parts[0])?;
        let step: f64 = num(key, parts[1])?;
        let stop: f64 = num(key, parts[2])?;
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(value_err(
                key,
                value,
                "range needs step > 0 and stop >= start",
            ));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    value
        .split(',')
        .map(|s| num(key, s.trim()))
        .collect::<Result<Vec<f64>, _>>()
}

impl Raw {
    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "L" => self.taps = Some(num(key, value)?),
            "N" => self.training_len = Some(num(key, value)?),
            "S0" => self.sparsity = Some(num(key, value)?),
            "P" => self.power = Some(num(key, value)?),
            "Pr" => self.relay_power = Some(num(key, value)?),
            "snr_grid" => self.snr_grid = Some(parse_snr_grid(value)?),
            "trials" => self.trials = Some(num(key, value)?),
            "estimators" => {
                let set = value
                    .split(',')
                    .map(|s| {
                        s.parse::<EstimatorKind>()
                            .map_err(|e| value_err(key, value, e))
                    })
                    .collect::<Result<BTreeSet<_>, _>>()?;
                self.estimators = Some(set);
            }
            "seed" => self.seed = Some(num(key, value)?),
            "cosamp_sparsity" => self.cosamp_sparsity = Some(optional_count(key, value)?),
            "cosamp_max_iters" => self.cosamp_max_iters = Some(optional_count(key, value)?),
            "halt_tol" => self.halt_tol = Some(num(key, value)?),
            "mse_mode" => {
                self.mse_mode = Some(value.parse().map_err(|e| value_err(key, value, e))?)
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    fn resolve(self) -> Result<SweepConfig, ConfigError> {
        let defaults = SweepConfig::default();
        let taps = self.taps.unwrap_or(defaults.base.taps);
        let training_len = self.training_len.unwrap_or(defaults.base.training_len);
        let sparsity = self.sparsity.unwrap_or(defaults.base.sparsity);
        // unit power per training symbol unless set explicitly
        let power = self.power.unwrap_or(training_len as f64);
        let relay_power = self.relay_power.unwrap_or(power);
        let snr_grid_db = self.snr_grid.unwrap_or(defaults.snr_grid_db);
        let trials = self.trials.unwrap_or(defaults.trials);
        let opts = TrialOptions {
            estimators: self.estimators.unwrap_or(defaults.options.estimators),
            cosamp_sparsity: self.cosamp_sparsity.unwrap_or(None),
            cosamp_max_iters: self.cosamp_max_iters.unwrap_or(None),
            halt_tol: self.halt_tol.unwrap_or(defaults.options.halt_tol),
            mse_mode: self.mse_mode.unwrap_or_default(),
        };

        let invalid = |key, reason: String| Err(ConfigError::Invalid { key, reason });
        if taps == 0 {
            return invalid("L", "must be at least 1".into());
        }
        if training_len < 2 * taps {
            return invalid("N", format!("{training_len} is below 2L = {}", 2 * taps));
        }
        if sparsity == 0 || sparsity > taps {
            return invalid("S0", format!("{sparsity} must lie in 1..={taps}"));
        }
        if !(power.is_finite() && power > 0.0) {
            return invalid("P", format!("{power} must be positive"));
        }
        if !(relay_power.is_finite() && relay_power > 0.0) {
            return invalid("Pr", format!("{relay_power} must be positive"));
        }
        if snr_grid_db.is_empty() || snr_grid_db.iter().any(|s| s.is_nan()) {
            return invalid("snr_grid", "needs at least one numeric SNR".into());
        }
        if snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("snr_grid", "must be strictly increasing".into());
        }
        if trials == 0 {
            return invalid("trials", "must be at least 1".into());
        }
        if opts.estimators.is_empty() {
            return invalid("estimators", "select at least one estimator".into());
        }
        if opts.cosamp_sparsity == Some(0) {
            return invalid("cosamp_sparsity", "must be at least 1".into());
        }
        if opts.cosamp_max_iters == Some(0) {
            return invalid("cosamp_max_iters", "must be at least 1".into());
        }
        if opts.halt_tol.is_nan() || opts.halt_tol <= 0.0 {
            return invalid("halt_tol", format!("{} must be positive", opts.halt_tol));
        }

        Ok(SweepConfig {
            base: TwrnConfig {
                taps,
                training_len,
                sparsity,
                power,
                relay_power,
                snr_db: defaults.base.snr_db,
                seed: self.seed.unwrap_or(defaults.master_seed),
            },
            snr_grid_db,
            trials,
            master_seed: self.seed.unwrap_or(defaults.master_seed),
            options: opts,
        })
    }
}

/// Parses config text followed by `overrides`, then validates the result.
pub fn parse_config_str(
    text: &str,
    overrides: &[(String, String)],
) -> Result<SweepConfig, ConfigError> {
    let mut raw = Raw::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: line.to_string(),
        })?;
        raw.set(k.trim(), v.trim())?;
    }
    for (k, v) in overrides {
        raw.set(k, v)?;
    }
    raw.resolve()
}

/// Reads `path` (if any) and applies `overrides` on top.
pub fn parse_config(
    path: Option<&Path>,
    overrides: &[(String, String)],
) -> Result<SweepConfig, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
            path: p.to_path_buf(),
            source,
        })?,
        None => String::new(),
    };
    parse_config_str(&text, overrides)
}

/// Writes `cfg` back out in the config format; parsing the result yields `cfg`.
pub fn render(cfg: &SweepConfig) -> String {
    let b = &cfg.base;
    let o = &cfg.options;
    let mut s = String::new();
    let grid: Vec<String> = cfg.snr_grid_db.iter().map(|v| v.to_string()).collect();
    let estimators: Vec<&str> = o.estimators.iter().map(|e| e.name()).collect();
    let auto = |v: Option<usize>| v.map_or("auto".to_string(), |n| n.to_string());
    let _ = writeln!(s, "L = {}", b.taps);
    let _ = writeln!(s, "N = {}", b.training_len);
    let _ = writeln!(s, "S0 = {}", b.sparsity);
    let _ = writeln!(s, "P = {}", b.power);
    let _ = writeln!(s, "Pr = {}", b.relay_power);
    let _ = writeln!(s, "snr_grid = {}", grid.join(","));
    let _ = writeln!(s, "trials = {}", cfg.trials);
    let _ = writeln!(s, "estimators = {}", estimators.join(","));
    let _ = writeln!(s, "seed = {}", cfg.master_seed);
    let _ = writeln!(s, "cosamp_sparsity = {}", auto(o.cosamp_sparsity));
    let _ = writeln!(s, "cosamp_max_iters = {}", auto(o.cosamp_max_iters));
    let _ = writeln!(s, "halt_tol = {}", o.halt_tol);
    let _ = writeln!(s, "mse_mode = {}", o.mse_mode);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn empty_config_gives_table_defaults() {
        let cfg = parse_config_str("", &[]).unwrap();
        assert_eq!(cfg.base.taps, 16);
        assert_eq!(cfg.base.training_len, 64);
        assert_eq!(cfg.trials, 1000);
        assert_eq!(
            cfg.snr_grid_db,
            (0..=9).map(|i| 4.0 * i as f64).collect::<Vec<_>>()
        );
        assert_eq!(cfg.base.power, 64.0);
        assert_eq!(cfg, SweepConfig::default());
    }

    #[test]
    fn override_trials_passes_through() {
        assert_eq!(
            parse_config_str("", &ov(&[("trials", "10")]))
                .unwrap()
                .trials,
            10
        );
    }

    #[test]
    fn zero_taps_names_l() {
        let err = parse_config_str("", &ov(&[("L", "0")])).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { key: "L", .. }));
        assert!(err.to_string().contains("L"));
    }

    #[test]
    fn unknown_key_lists_valid_keys() {
        let err = parse_config_str("bogus = 1", &[]).unwrap_err();
        let msg = err.to_string();
        for k in KEYS {
            assert!(msg.contains(k), "{msg}");
        }
    }

    #[test]
    fn file_syntax_and_comments() {
        let text =
            "# protocol\nL = 8   # taps\nN=32\n\nsnr_grid = 0:6:30\nestimators = ls, cosamp\n";
        let cfg = parse_config_str(text, &[]).unwrap();
        assert_eq!(cfg.base.taps, 8);
        assert_eq!(cfg.base.power, 32.0);
        assert_eq!(cfg.snr_grid_db, vec![0.0, 6.0, 12.0, 18.0, 24.0, 30.0]);
        assert_eq!(cfg.options.estimators.len(), 2);
        assert!(matches!(
            parse_config_str("L 8", &[]),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn value_errors_name_the_key() {
        for (k, v) in [
            ("N", "x"),
            ("snr_grid", "3,1"),
            ("estimators", "omp"),
            ("mse_mode", "db"),
        ] {
            let msg = parse_config_str("", &ov(&[(k, v)]))
                .unwrap_err()
                .to_string();
            assert!(msg.contains(k), "{msg}");
        }
        let msg = parse_config_str("", &ov(&[("N", "20")]))
            .unwrap_err()
            .to_string();
        assert!(msg.contains("N"));
    }

    #[test]
    fn overrides_apply_after_file() {
        let cfg = parse_config_str("trials = 5\nseed = 1", &ov(&[("trials", "7")])).unwrap();
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.master_seed, 1);
    }

    #[test]
    fn missing_file_is_reported() {
        let err = parse_config(Some(Path::new("/nonexistent/run.conf")), &[]).unwrap_err();
        assert!(matches!(err, ConfigError::Read { .. }));
    }

    #[test]
    fn render_round_trips() {
        let cfg = parse_config_str(
            "",
            &ov(&[
                ("cosamp_sparsity", "5"),
                ("snr_grid", "0,7.5,30"),
                ("mse_mode", "raw"),
            ]),
        )
        .unwrap();
        assert_eq!(parse_config_str(&render(&cfg), &[]).unwrap(), cfg);
    }

    #[test]
    fn parse_override_splits_once() {
        assert_eq!(parse_override("a=b=c").unwrap(), ("a".into(), "b=c".into()));
        assert!(parse_override("abc").is_err());
    }
}
