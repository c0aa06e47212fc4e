use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use twrn_cs::experiment::evaluate_instance;
use twrn_cs::{run_sweep, synthesize_instance, trial_rng, SweepConfig, SweepReport};

use crate::config::render;
use crate::plot::gnuplot_script;
use crate::selftest::run_checks;

pub const REPORT_FILE: &str = "report.csv";
pub const PLOT_FILE: &str = "plot.gp";
pub const META_FILE: &str = "run-meta.txt";

/// Runs `f` on a dedicated pool of `workers` threads (rayon's default when `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().context("building worker pool")?;
    Ok(pool.install(f))
}

/// Runs the sweep and writes `report.csv`, `plot.gp` and `run-meta.txt`
/// into `out_dir`, printing one summary line per SNR point to `stdout`.
pub fn cmd_sweep(
    cfg: &SweepConfig,
    out_dir: &Path,
    workers: Option<usize>,
    stdout: &mut dyn Write,
) -> Result<SweepReport> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let report = with_workers(workers, || run_sweep(cfg))??;

    let write = |name: &str, contents: &[u8]| {
        let path = out_dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    };
    write(REPORT_FILE, report.to_csv_string().as_bytes())?;
    write(PLOT_FILE, gnuplot_script(cfg, REPORT_FILE).as_bytes())?;
    let meta = format!(
        "# twrn-cs {}\n# master seed {}\n{}",
        env!("CARGO_PKG_VERSION"),
        cfg.master_seed,
        render(cfg)
    );
    write(META_FILE, meta.as_bytes())?;

    for &snr in &cfg.snr_grid_db {
        let mut line = format!("snr {snr:>6.2} dB");
        for &kind in &cfg.options.estimators {
            if let Some(cell) = report.cell(kind, snr) {
                line.push_str(&format!(
                    "  {kind} {:.4e} ± {:.1e}",
                    cell.mean_mse, cell.std_err
                ));
                if cell.failures > 0 {
                    line.push_str(&format!(" ({} failed)", cell.failures));
                }
            }
        }
        writeln!(stdout, "{line}")?;
    }
    Ok(report)
}

/// One instance at `snr_db` (trial 0 of the master seed), with per-estimator errors.
pub fn cmd_trial(cfg: &SweepConfig, snr_db: f64, stdout: &mut dyn Write) -> Result<()> {
    let trial_cfg = twrn_cs::TwrnConfig {
        snr_db,
        ..cfg.base.clone()
    };
    let instance = synthesize_instance(&trial_cfg, &mut trial_rng(cfg.master_seed, 0, 0))?;
    writeln!(
        stdout,
        "snr {snr_db} dB, noise variance {:.4e}, relay gain {:.4e}, |support(θ)| = {}",
        instance.noise_var,
        instance.relay_gain,
        instance.true_support.len()
    )?;
    let outcome = evaluate_instance(&instance, &cfg.options);
    for (kind, err) in &outcome.errors {
        match err {
            Ok(e) => writeln!(stdout, "{kind:>7}: {e:.6e}")?,
            Err(e) => writeln!(stdout, "{kind:>7}: failed ({e})")?,
        }
    }
    if outcome.errors.values().any(|e| e.is_err()) {
        anyhow::bail!("an estimator failed");
    }
    Ok(())
}

/// Returns whether every check passed.
pub fn cmd_selftest(inject_fault: bool, stdout: &mut dyn Write) -> Result<bool> {
    let results = run_checks(inject_fault);
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        writeln!(stdout, "{tag} {}: {}", r.name, r.detail)?;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(stdout, "{} checks, {failed} failed", results.len())?;
    Ok(failed == 0)
}
