//! Seeded Monte-Carlo MSE-vs-SNR sweeps.
//!
//! Every trial is keyed by `(snr_index, trial_index)` and draws from its own
//! ChaCha stream derived from the master seed, so results do not depend on
//! how trials are scheduled across threads. All requested estimators run on
//! the same instance within a trial.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::io;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{estimate_cosamp, estimate_ls, estimate_oracle, CosampParams};
use crate::linalg::distance;
use crate::model::{synthesize_instance, TwrnConfig, TwrnInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Cosamp,
    Ls,
    Oracle,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [
        EstimatorKind::Cosamp,
        EstimatorKind::Ls,
        EstimatorKind::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Cosamp => "cosamp",
            EstimatorKind::Ls => "ls",
            EstimatorKind::Oracle => "oracle",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cosamp" => Ok(EstimatorKind::Cosamp),
            "ls" => Ok(EstimatorKind::Ls),
            "oracle" => Ok(EstimatorKind::Oracle),
            other => Err(Error::InvalidArgument(format!(
                "unknown estimator {other:?} (expected cosamp, ls or oracle)"
            ))),
        }
    }
}

/// How the per-trial squared error is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MseMode {
    /// `‖θ̂ − θ‖² / ‖θ‖²`
    #[default]
    Normalized,
    /// `‖θ̂ − θ‖² / dim(θ)`
    Raw,
}

impl FromStr for MseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "normalized" => Ok(MseMode::Normalized),
            "raw" => Ok(MseMode::Raw),
            other => Err(Error::InvalidArgument(format!(
                "unknown mse mode {other:?} (expected normalized or raw)"
            ))),
        }
    }
}

impl fmt::Display for MseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MseMode::Normalized => "normalized",
            MseMode::Raw => "raw",
        })
    }
}

/// Estimator selection and CoSaMP knobs shared by every trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOptions {
    pub estimators: BTreeSet<EstimatorKind>,
    /// CoSaMP target sparsity; `None` uses the realized `|support(θ)|`.
    pub cosamp_sparsity: Option<usize>,
    /// `None` uses `4S`.
    pub cosamp_max_iters: Option<usize>,
    pub halt_tol: f64,
    pub mse_mode: MseMode,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            estimators: EstimatorKind::ALL.into_iter().collect(),
            cosamp_sparsity: None,
            cosamp_max_iters: None,
            halt_tol: 1e-4,
            mse_mode: MseMode::Normalized,
        }
    }
}

impl TrialOptions {
    fn cosamp_params(&self, instance: &TwrnInstance) -> CosampParams {
        let sparsity = self
            .cosamp_sparsity
            .unwrap_or_else(|| instance.true_support.len().max(1));
        let mut params = CosampParams::new(sparsity);
        if let Some(cap) = self.cosamp_max_iters {
            params.max_iters = cap;
        }
        params.halt_tol = self.halt_tol;
        params
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// Squared error per estimator, or the error that stopped it.
    pub errors: BTreeMap<EstimatorKind, std::result::Result<f64, Error>>,
    /// Digest of `(θ, X, y)` for the instance every estimator saw.
    pub instance_digest: u64,
}

impl TrialOutcome {
    pub fn error(&self, kind: EstimatorKind) -> Option<f64> {
        self.errors
            .get(&kind)
            .and_then(|r| r.as_ref().ok().copied())
    }
}

/// Stable digest of the numeric content of an instance.
pub fn instance_digest(instance: &TwrnInstance) -> u64 {
    let mut hasher = DefaultHasher::new();
    for z in instance
        .theta
        .iter()
        .chain(instance.measurement.as_slice())
        .chain(&instance.observation)
    {
        z.re.to_bits().hash(&mut hasher);
        z.im.to_bits().hash(&mut hasher);
    }
    instance.noise_var.to_bits().hash(&mut hasher);
    hasher.finish()
}

/// Runs every requested estimator on one already-synthesized instance.
pub fn evaluate_instance(instance: &TwrnInstance, opts: &TrialOptions) -> TrialOutcome {
    let x = &instance.measurement;
    let y = &instance.observation;
    let theta = &instance.theta;
    let scale = match opts.mse_mode {
        MseMode::Normalized => theta.iter().map(|z| z.norm_sqr()).sum::<f64>(),
        MseMode::Raw => theta.len() as f64,
    };
    let errors = opts
        .estimators
        .iter()
        .map(|&kind| {
            let est = match kind {
                EstimatorKind::Ls => estimate_ls(x, y),
                EstimatorKind::Oracle => estimate_oracle(x, y, &instance.true_support),
                EstimatorKind::Cosamp => estimate_cosamp(x, y, &opts.cosamp_params(instance)),
            };
            let err = est.map(|e| {
                let d = distance(&e.theta_hat, theta);
                d * d / scale
            });
            (kind, err)
        })
        .collect();
    TrialOutcome {
        errors,
        instance_digest: instance_digest(instance),
    }
}

/// Synthesizes one instance from `rng` and evaluates the requested estimators on it.
pub fn run_trial(
    cfg: &TwrnConfig,
    opts: &TrialOptions,
    rng: &mut ChaCha8Rng,
) -> Result<TrialOutcome> {
    let instance = synthesize_instance(cfg, rng)?;
    Ok(evaluate_instance(&instance, opts))
}

/// Random stream for trial `trial_index` at grid point `snr_index`.
pub fn trial_rng(master_seed: u64, snr_index: usize, trial_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((snr_index as u64) << 32) | trial_index as u64);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Channel and training parameters; its `snr_db` is ignored.
    pub base: TwrnConfig,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub options: TrialOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            base: TwrnConfig::default(),
            snr_grid_db: (0..=9).map(|i| 4.0 * i as f64).collect(),
            trials: 1000,
            master_seed: 0,
            options: TrialOptions::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::InvalidArgument("SNR grid is empty".into()));
        }
        if self.snr_grid_db.iter().any(|s| s.is_nan()) {
            return Err(Error::InvalidArgument("SNR grid contains NaN".into()));
        }
        if self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "SNR grid must be strictly increasing".into(),
            ));
        }
        if self.options.estimators.is_empty() {
            return Err(Error::InvalidArgument("no estimators selected".into()));
        }
        if self.options.cosamp_sparsity == Some(0) || self.options.cosamp_max_iters == Some(0) {
            return Err(Error::InvalidArgument(
                "CoSaMP sparsity and iteration cap must be at least 1".into(),
            ));
        }
        if self.options.halt_tol.is_nan() || self.options.halt_tol <= 0.0 {
            return Err(Error::InvalidArgument("halt_tol must be positive".into()));
        }
        Ok(())
    }

    /// Trial configuration at grid point `snr_index`.
    pub fn at_snr(&self, snr_index: usize) -> TwrnConfig {
        TwrnConfig {
            snr_db: self.snr_grid_db[snr_index],
            ..self.base.clone()
        }
    }
}

/// Summary of one `(estimator, snr)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellStats {
    pub estimator: EstimatorKind,
    pub snr_db: f64,
    /// Mean over successful trials; NaN when every trial failed.
    pub mean_mse: f64,
    pub std_err: f64,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// Sorted by estimator, then SNR.
    pub cells: Vec<CellStats>,
}

impl SweepReport {
    pub fn cell(&self, estimator: EstimatorKind, snr_db: f64) -> Option<&CellStats> {
        self.cells
            .iter()
            .find(|c| c.estimator == estimator && c.snr_db == snr_db)
    }

    /// Cells of one estimator in SNR order.
    pub fn series(&self, estimator: EstimatorKind) -> Vec<&CellStats> {
        self.cells
            .iter()
            .filter(|c| c.estimator == estimator)
            .collect()
    }

    /// Writes `estimator,snr_db,mean_mse,std_err,trials,failures` rows.
    pub fn write_csv<W: io::Write>(&self, out: W) -> io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for cell in &self.cells {
            writer.serialize(cell)?;
        }
        writer.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Per-trial outcomes, indexed `[snr_index][trial_index]`.
///
/// Runs on the current rayon pool; the result is independent of its size.
pub fn run_sweep_outcomes(cfg: &SweepConfig) -> Result<Vec<Vec<TrialOutcome>>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.snr_grid_db.len())
        .flat_map(|s| (0..cfg.trials).map(move |t| (s, t)))
        .collect();
    let flat: Vec<TrialOutcome> = jobs
        .par_iter()
        .map(|&(s, t)| {
            let mut rng = trial_rng(cfg.master_seed, s, t);
            run_trial(&cfg.at_snr(s), &cfg.options, &mut rng).unwrap_or_else(|e| TrialOutcome {
                errors: cfg
                    .options
                    .estimators
                    .iter()
                    .map(|&k| (k, Err(e.clone())))
                    .collect(),
                instance_digest: 0,
            })
        })
        .collect();
    let mut grid = Vec::with_capacity(cfg.snr_grid_db.len());
    let mut iter = flat.into_iter();
    for _ in 0..cfg.snr_grid_db.len() {
        grid.push(iter.by_ref().take(cfg.trials).collect());
    }
    Ok(grid)
}

/// Mean and standard error of the mean, summed in index order.
fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Reduces per-trial outcomes to per-cell statistics.
pub fn aggregate(cfg: &SweepConfig, outcomes: &[Vec<TrialOutcome>]) -> SweepReport {
    let mut cells = Vec::new();
    for &kind in &cfg.options.estimators {
        for (s, trials) in outcomes.iter().enumerate() {
            let values: Vec<f64> = trials.iter().filter_map(|o| o.error(kind)).collect();
            let (mean_mse, std_err) = mean_and_stderr(&values);
            cells.push(CellStats {
                estimator: kind,
                snr_db: cfg.snr_grid_db[s],
                mean_mse,
                std_err,
                trials: values.len(),
                failures: trials.len() - values.len(),
            });
        }
    }
    SweepReport { cells }
}

/// Full MSE-vs-SNR sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    let outcomes = run_sweep_outcomes(cfg)?;
    Ok(aggregate(cfg, &outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_sweep() -> SweepConfig {
        SweepConfig {
            snr_grid_db: vec![0.0, 36.0],
            trials: 4,
            master_seed: 7,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn estimator_names_round_trip() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.name().parse::<EstimatorKind>().unwrap(), k);
        }
        assert!("omp".parse::<EstimatorKind>().is_err());
        assert_eq!("raw".parse::<MseMode>().unwrap(), MseMode::Raw);
    }

    #[test]
    fn default_sweep_matches_table_protocol() {
        let cfg = SweepConfig::default();
        assert_eq!(cfg.base.taps, 16);
        assert_eq!(cfg.base.training_len, 64);
        assert_eq!(cfg.trials, 1000);
        assert_eq!(cfg.snr_grid_db.first(), Some(&0.0));
        assert_eq!(cfg.snr_grid_db.last(), Some(&36.0));
        assert_eq!(cfg.snr_grid_db.len(), 10);
    }

    #[test]
    fn sweep_validation() {
        let ok = small_sweep();
        assert!(ok.validate().is_ok());
        let mut bad = ok.clone();
        bad.snr_grid_db = vec![10.0, 10.0];
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.trials = 0;
        assert!(bad.validate().is_err());
        let mut bad = ok;
        bad.options.estimators.clear();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn trial_streams_are_distinct_and_repeatable() {
        use rand::RngCore;
        let a = trial_rng(1, 0, 0).next_u64();
        assert_eq!(a, trial_rng(1, 0, 0).next_u64());
        assert_ne!(a, trial_rng(1, 0, 1).next_u64());
        assert_ne!(a, trial_rng(1, 1, 0).next_u64());
        assert_ne!(a, trial_rng(2, 0, 0).next_u64());
    }

    #[test]
    fn noiseless_trial_is_exact_for_all_estimators() {
        let cfg = TwrnConfig {
            snr_db: f64::INFINITY,
            ..TwrnConfig::default()
        };
        let out = run_trial(&cfg, &TrialOptions::default(), &mut trial_rng(3, 0, 0)).unwrap();
        for k in EstimatorKind::ALL {
            assert!(out.error(k).unwrap() <= 1e-10, "{k}: {:?}", out.error(k));
        }
    }

    #[test]
    fn trial_is_deterministic() {
        let cfg = TwrnConfig::default();
        let opts = TrialOptions::default();
        let a = run_trial(&cfg, &opts, &mut trial_rng(5, 2, 9)).unwrap();
        let b = run_trial(&cfg, &opts, &mut trial_rng(5, 2, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_trial_cells_have_zero_stderr() {
        let cfg = SweepConfig {
            snr_grid_db: vec![12.0],
            trials: 1,
            ..SweepConfig::default()
        };
        let report = run_sweep(&cfg).unwrap();
        assert_eq!(report.cells.len(), 3);
        for c in &report.cells {
            assert_eq!(c.trials + c.failures, 1);
            assert_eq!(c.std_err, 0.0);
            assert!(c.mean_mse >= 0.0);
        }
    }

    #[test]
    fn csv_layout() {
        let report = run_sweep(&small_sweep()).unwrap();
        let csv = report.to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "estimator,snr_db,mean_mse,std_err,trials,failures"
        );
        assert_eq!(lines.len(), 7);
        let keys: Vec<(&str, f64)> = lines[1..]
            .iter()
            .map(|l| {
                let mut f = l.split(',');
                (f.next().unwrap(), f.next().unwrap().parse().unwrap())
            })
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.0.cmp(b.0).then(a.1.total_cmp(&b.1)));
        assert_eq!(keys, sorted);
        // floats round-trip exactly
        for (line, cell) in lines[1..].iter().zip(&report.cells) {
            let mean: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
            assert_eq!(mean.to_bits(), cell.mean_mse.to_bits());
        }
    }

    #[test]
    fn failures_are_counted_not_imputed() {
        let outcomes = vec![vec![
            TrialOutcome {
                errors: [(EstimatorKind::Ls, Ok(0.5))].into_iter().collect(),
                instance_digest: 1,
            },
            TrialOutcome {
                errors: [(
                    EstimatorKind::Ls,
                    Err(Error::RankDeficient { rank: 1, cols: 2 }),
                )]
                .into_iter()
                .collect(),
                instance_digest: 2,
            },
        ]];
        let cfg = SweepConfig {
            snr_grid_db: vec![0.0],
            trials: 2,
            options: TrialOptions {
                estimators: [EstimatorKind::Ls].into_iter().collect(),
                ..TrialOptions::default()
            },
            ..SweepConfig::default()
        };
        let report = aggregate(&cfg, &outcomes);
        assert_eq!(report.cells[0].trials, 1);
        assert_eq!(report.cells[0].failures, 1);
        assert_eq!(report.cells[0].mean_mse, 0.5);
    }

    #[test]
    fn raw_mode_divides_by_dimension() {
        let cfg = TwrnConfig {
            snr_db: 10.0,
            ..TwrnConfig::default()
        };
        let instance = synthesize_instance(&cfg, &mut trial_rng(9, 0, 0)).unwrap();
        let norm_sq: f64 = instance.theta.iter().map(|z| z.norm_sqr()).sum();
        let opts = TrialOptions {
            estimators: [EstimatorKind::Ls].into_iter().collect(),
            ..TrialOptions::default()
        };
        let normalized = evaluate_instance(&instance, &opts)
            .error(EstimatorKind::Ls)
            .unwrap();
        let raw = evaluate_instance(
            &instance,
            &TrialOptions {
                mse_mode: MseMode::Raw,
                ..opts
            },
        )
        .error(EstimatorKind::Ls)
        .unwrap();
        let expect = normalized * norm_sq / 62.0;
        assert!((raw - expect).abs() <= 1e-12 * expect);
    }
}
