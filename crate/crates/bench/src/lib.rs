//! Fixtures shared by the criterion benches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twrn_cs::{synthesize_instance, TwrnConfig, TwrnInstance};

/// Table-protocol instance (L = 16, N = 64, S0 = 2) at `snr_db`.
pub fn instance(snr_db: f64, seed: u64) -> TwrnInstance {
    let cfg = TwrnConfig {
        snr_db,
        ..TwrnConfig::default()
    };
    synthesize_instance(&cfg, &mut ChaCha8Rng::seed_from_u64(seed))
        .expect("default config is valid")
}

pub fn random_taps(len: usize, seed: u64) -> Vec<num_complex::Complex64> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}
