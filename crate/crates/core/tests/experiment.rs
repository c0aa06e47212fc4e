mod common;

use common::{gram_inverse_trace, norm_sq};
use twrn_cs::experiment::{instance_digest, run_sweep_outcomes, TrialOptions};
use twrn_cs::{
    run_sweep, run_trial, synthesize_instance, trial_rng, EstimatorKind, SweepConfig, TwrnConfig,
};

fn sweep(grid: Vec<f64>, trials: usize, seed: u64) -> SweepConfig {
    SweepConfig {
        snr_grid_db: grid,
        trials,
        master_seed: seed,
        ..SweepConfig::default()
    }
}

#[test]
fn oracle_error_matches_conditional_closed_form() {
    let cfg = TwrnConfig {
        snr_db: 20.0,
        ..TwrnConfig::default()
    };
    let opts = TrialOptions {
        estimators: [EstimatorKind::Oracle].into_iter().collect(),
        ..TrialOptions::default()
    };
    let (mut measured, mut predicted) = (0.0, 0.0);
    for t in 0..1000 {
        let mut rng = trial_rng(17, 0, t);
        let inst = synthesize_instance(&cfg, &mut rng.clone()).unwrap();
        measured += run_trial(&cfg, &opts, &mut rng)
            .unwrap()
            .error(EstimatorKind::Oracle)
            .unwrap();
        predicted += inst.noise_var * gram_inverse_trace(&inst.measurement, &inst.true_support)
            / norm_sq(&inst.theta);
    }
    let ratio = measured / predicted;
    assert!((ratio - 1.0).abs() <= 0.2, "ratio {ratio}");
}

#[test]
fn estimators_see_the_same_instance() {
    let cfg = sweep(vec![8.0, 20.0], 5, 3);
    let outcomes = run_sweep_outcomes(&cfg).unwrap();
    for (s, row) in outcomes.iter().enumerate() {
        for (t, outcome) in row.iter().enumerate() {
            let inst = synthesize_instance(&cfg.at_snr(s), &mut trial_rng(3, s, t)).unwrap();
            assert_eq!(outcome.instance_digest, instance_digest(&inst));
            assert_eq!(outcome.errors.len(), 3);
        }
    }
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let cfg = sweep(vec![0.0, 16.0, 32.0], 30, 11);
    let run = |workers| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap()
            .install(|| run_sweep(&cfg).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.to_csv_string(), four.to_csv_string());
    assert_eq!(one, run_sweep(&cfg).unwrap());
}

#[test]
fn trial_counts_are_conserved() {
    let cfg = sweep(vec![0.0, 36.0], 25, 4);
    let report = run_sweep(&cfg).unwrap();
    assert_eq!(report.cells.len(), 6);
    for cell in &report.cells {
        assert_eq!(cell.trials + cell.failures, 25);
        assert!(cell.mean_mse >= 0.0);
    }
}

#[test]
fn standard_error_scales_as_inverse_root_trials() {
    let se = |trials| {
        run_sweep(&sweep(vec![12.0], trials, 21))
            .unwrap()
            .cell(EstimatorKind::Ls, 12.0)
            .unwrap()
            .std_err
    };
    let (base, double, quad) = (se(400), se(800), se(1600));
    let r2 = base / double;
    let r4 = base / quad;
    assert!((r2 / 2f64.sqrt() - 1.0).abs() <= 0.3, "M→2M ratio {r2}");
    assert!((r4 / 2.0 - 1.0).abs() <= 0.3, "M→4M ratio {r4}");
}

#[test]
fn ls_error_falls_with_snr() {
    let report = run_sweep(&sweep((0..=9).map(|i| 4.0 * i as f64).collect(), 100, 8)).unwrap();
    let ls = report.series(EstimatorKind::Ls);
    for w in ls.windows(2) {
        let gap = w[0].mean_mse - w[1].mean_mse;
        assert!(
            gap > -2.0 * (w[0].std_err.powi(2) + w[1].std_err.powi(2)).sqrt(),
            "{} dB → {} dB",
            w[0].snr_db,
            w[1].snr_db
        );
    }
}
