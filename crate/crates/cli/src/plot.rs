use twrn_cs::{EstimatorKind, MseMode, SweepConfig};

fn title(kind: EstimatorKind) -> &'static str {
    match kind {
        EstimatorKind::Ls => "LS",
        EstimatorKind::Cosamp => "CoSaMP",
        EstimatorKind::Oracle => "ideal (known support)",
    }
}

/// Gnuplot script plotting `csv_name` as MSE (log scale) against SNR, one
/// series per estimator with standard-error bars.
pub fn gnuplot_script(cfg: &SweepConfig, csv_name: &str) -> String {
    let ylabel = match cfg.options.mse_mode {
        MseMode::Normalized => "normalized MSE",
        MseMode::Raw => "MSE",
    };
    let series: Vec<String> = cfg
        .options
        .estimators
        .iter()
        .map(|&k| {
            format!(
                "  '{csv_name}' using 2:(strcol(1) eq \"{name}\" ? $3 : 1/0):4 \
                 with yerrorlines title \"{title}\"",
                name = k.name(),
                title = title(k),
            )
        })
        .collect();
    format!(
        "# MSE vs SNR, L = {l}, N = {n}, S0 = {s0}, {trials} trials per point\n\
         set datafile separator ','\n\
         set terminal pngcairo size 800,600\n\
         set output 'mse_vs_snr.png'\n\
         set logscale y\n\
         set format y '10^{{%L}}'\n\
         set xlabel 'SNR (dB)'\n\
         set ylabel '{ylabel}'\n\
         set grid\n\
         set key top right\n\
         plot \\\n{series}\n",
        l = cfg.base.taps,
        n = cfg.base.training_len,
        s0 = cfg.base.sparsity,
        trials = cfg.trials,
        series = series.join(", \\\n"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_series_per_estimator() {
        let script = gnuplot_script(&SweepConfig::default(), "report.csv");
        assert!(script.contains("set logscale y"));
        for k in EstimatorKind::ALL {
            assert!(script.contains(&format!("\"{}\"", k.name())));
        }
        assert_eq!(script.matches("yerrorlines").count(), 3);
    }
}
