//! Built-in invariant battery run by `twrn-cs selftest`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twrn_cs::linalg::{distance, norm};
use twrn_cs::{
    build_training_matrix, convolve, estimate_cosamp, least_squares, synthesize_instance,
    top_k_support, ComplexMat, ComplexVec, CosampParams, TwrnConfig,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> ComplexVec {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn direct_sum(a: &[Complex64], b: &[Complex64]) -> ComplexVec {
    (0..a.len() + b.len() - 1)
        .map(|k| {
            (0..a.len())
                .filter(|&j| k >= j && k - j < b.len())
                .map(|j| a[j] * b[k - j])
                .sum()
        })
        .collect()
}

fn rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    distance(a, b) / norm(b).max(f64::MIN_POSITIVE)
}

fn check(name: &'static str, worst: f64, tol: f64) -> CheckResult {
    CheckResult {
        name,
        passed: worst <= tol,
        detail: format!("worst relative error {worst:.3e} (tol {tol:.0e})"),
    }
}

fn convolution_oracle(rng: &mut ChaCha8Rng, fault: bool) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (la, lb) = (rng.gen_range(1..=32), rng.gen_range(1..=32));
        let a = random_vec(rng, la);
        let b = random_vec(rng, lb);
        let mut out = convolve(&a, &b).expect("nonempty inputs");
        if fault {
            out[0] += Complex64::new(1e-3, 0.0);
        }
        worst = worst.max(rel(&out, &direct_sum(&a, &b)));
    }
    check("convolution vs direct sum", worst, 1e-12)
}

fn training_matrix_oracle(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let taps = rng.gen_range(1..=16);
        let n = rng.gen_range(1..=64);
        let x = random_vec(rng, n);
        let v = random_vec(rng, 2 * taps - 1);
        let m = build_training_matrix(&x, taps).expect("valid sizes");
        worst = worst.max(rel(&m.mul_vec(&v).expect("shape"), &direct_sum(&x, &v)));
    }
    check("training matrix vs convolution", worst, 1e-12)
}

fn least_squares_oracle(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let cols = rng.gen_range(1..=12);
        let rows = cols + rng.gen_range(0..=20);
        let a = ComplexMat::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let z = random_vec(rng, cols);
        let b = a.mul_vec(&z).expect("shape");
        match least_squares(&a, &b) {
            Ok(est) => worst = worst.max(rel(&est, &z)),
            Err(_) => worst = f64::INFINITY,
        }
    }
    check("least squares on consistent systems", worst, 1e-10)
}

fn top_k_oracle(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut mismatches = 0;
    for _ in 0..200 {
        let v = random_vec(rng, 20);
        let k = rng.gen_range(0..=20);
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| v[b].norm().total_cmp(&v[a].norm()).then(a.cmp(&b)));
        let mut expect = order[..k].to_vec();
        expect.sort_unstable();
        if top_k_support(&v, k).as_slice() != expect.as_slice() {
            mismatches += 1;
        }
    }
    CheckResult {
        name: "top-k support vs full sort",
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches in 200 draws"),
    }
}

fn noiseless_recovery() -> CheckResult {
    let cfg = TwrnConfig {
        snr_db: f64::INFINITY,
        ..TwrnConfig::default()
    };
    let mut exact = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = synthesize_instance(&cfg, &mut rng).expect("default config is valid");
        let params = CosampParams::new(inst.true_support.len());
        if let Ok(est) = estimate_cosamp(&inst.measurement, &inst.observation, &params) {
            if rel(&est.theta_hat, &inst.theta) <= 1e-6 {
                exact += 1;
            }
        }
    }
    CheckResult {
        name: "noiseless exact recovery (L=16, N=64, S0=2)",
        passed: exact >= 99,
        detail: format!("{exact}/100 recovered to 1e-6"),
    }
}

/// Runs every check. `inject_fault` corrupts the convolution check so that
/// the failure path can be exercised.
pub fn run_checks(inject_fault: bool) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_7e57);
    vec![
        convolution_oracle(&mut rng, inject_fault),
        training_matrix_oracle(&mut rng),
        least_squares_oracle(&mut rng),
        top_k_oracle(&mut rng),
        noiseless_recovery(),
    ]
}
