//! Two-way relay observation model at terminal T1.
//!
//! Both terminals send a training block through sparse channels `h1`, `h2`
//! to the relay, which amplifies by `α` and broadcasts. After the relay hop
//! back through `h1`, terminal T1 observes
//!
//! ```text
//! y = α√P·(X1·h + X2·g) + n,    h = h1*h1,  g = h2*h1
//! ```
//!
//! with `X1`, `X2` the tall Toeplitz matrices of the two training sequences.
//! The effective noise is modeled as white at a target SNR measured after
//! amplification and cascading.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{build_training_matrix, convolve, ComplexMat, ComplexVec, SupportSet};

/// Sparse multipath impulse response of length `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseChannel {
    pub taps: ComplexVec,
    pub support: SupportSet,
}

impl SparseChannel {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Sum of per-tap variances of the generating distribution.
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|z| z.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwrnConfig {
    /// Taps per physical channel (`L`).
    pub taps: usize,
    /// Training symbols per terminal (`N`).
    pub training_len: usize,
    /// Nonzero taps per physical channel (`S0`).
    pub sparsity: usize,
    /// Terminal transmit power `P`, shared by both terminals.
    pub power: f64,
    /// Relay transmit power `Pr`.
    pub relay_power: f64,
    /// Received SNR at T1 in dB; `f64::INFINITY` gives a noiseless instance.
    pub snr_db: f64,
    pub seed: u64,
}

impl Default for TwrnConfig {
    fn default() -> Self {
        Self {
            taps: 16,
            training_len: 64,
            sparsity: 2,
            power: 64.0,
            relay_power: 64.0,
            snr_db: 20.0,
            seed: 0,
        }
    }
}

impl TwrnConfig {
    /// Rows of the stacked observation, `Ñ = N + 2L − 2`.
    pub fn observation_len(&self) -> usize {
        self.training_len + 2 * self.taps - 2
    }

    /// Length of each cascaded response, `2L − 1`.
    pub fn cascade_len(&self) -> usize {
        2 * self.taps - 1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidArgument(what));
        if self.taps == 0 {
            return bad("L must be at least 1".into());
        }
        if self.training_len < 2 * self.taps {
            return bad(format!(
                "N = {} must be at least 2L = {} for an overdetermined stacked system",
                self.training_len,
                2 * self.taps
            ));
        }
        if self.sparsity == 0 || self.sparsity > self.taps {
            return bad(format!(
                "S0 = {} must lie in 1..=L ({})",
                self.sparsity, self.taps
            ));
        }
        if !(self.power.is_finite() && self.power > 0.0) {
            return bad(format!("P = {} must be positive", self.power));
        }
        if !(self.relay_power.is_finite() && self.relay_power > 0.0) {
            return bad(format!("Pr = {} must be positive", self.relay_power));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return bad(format!("snr_db = {} is not a usable SNR", self.snr_db));
        }
        Ok(())
    }
}

/// One synthesized estimation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TwrnInstance {
    pub h1: SparseChannel,
    pub h2: SparseChannel,
    /// Stacked cascade `[h1*h1; h2*h1]`, length `2(2L − 1)`.
    pub theta: ComplexVec,
    /// `α√P·[X1, X2]`, shape `Ñ × 2(2L − 1)`.
    pub measurement: ComplexMat,
    pub observation: ComplexVec,
    /// Per-entry variance of the additive noise.
    pub noise_var: f64,
    pub relay_gain: f64,
    pub true_support: SupportSet,
}

impl TwrnInstance {
    /// `h = h1*h1`, the first half of `theta`.
    pub fn self_cascade(&self) -> &[Complex64] {
        &self.theta[..self.theta.len() / 2]
    }

    /// `g = h2*h1`, the second half of `theta`.
    pub fn cross_cascade(&self) -> &[Complex64] {
        &self.theta[self.theta.len() / 2..]
    }
}

/// Circularly symmetric complex Gaussian with total variance `var`.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Draws a length-`taps` channel with `sparsity` nonzero taps on a uniformly
/// random support. Nonzero taps have variance `1/sparsity`, so the expected
/// energy is 1.
pub fn gen_sparse_channel<R: Rng + ?Sized>(
    taps: usize,
    sparsity: usize,
    rng: &mut R,
) -> Result<SparseChannel> {
    if sparsity == 0 || sparsity > taps {
        return Err(Error::InvalidArgument(format!(
            "sparsity {sparsity} must lie in 1..={taps}"
        )));
    }
    let support = SupportSet::from_indices(
        rand::seq::index::sample(rng, taps, sparsity).into_vec(),
        taps,
    )?;
    let var = 1.0 / sparsity as f64;
    let mut values = vec![Complex64::new(0.0, 0.0); taps];
    for i in support.iter() {
        values[i] = complex_gaussian(rng, var);
    }
    Ok(SparseChannel {
        taps: values,
        support,
    })
}

/// I.i.d. complex Gaussian training block with `E‖x‖² = power`.
pub fn gen_training<R: Rng + ?Sized>(len: usize, rng: &mut R, power: f64) -> Result<ComplexVec> {
    if len == 0 {
        return Err(Error::InvalidArgument(
            "training length must be positive".into(),
        ));
    }
    let var = power / len as f64;
    Ok((0..len).map(|_| complex_gaussian(rng, var)).collect())
}

/// Amplify-and-forward gain
/// `α = sqrt(Pr / (P1·Σσ²₁ + P2·Σσ²₂ + σ²ₙ))`.
pub fn relay_gain(
    p1: f64,
    p2: f64,
    relay_power: f64,
    var1_sum: f64,
    var2_sum: f64,
    noise_var: f64,
) -> Result<f64> {
    if relay_power <= 0.0 || noise_var < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "relay power {relay_power} must be positive and noise variance {noise_var} nonnegative"
        )));
    }
    let denom = p1 * var1_sum + p2 * var2_sum + noise_var;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "relay gain denominator {denom} is not positive"
        )));
    }
    Ok((relay_power / denom).sqrt())
}

/// Draws `h1, h2, x1, x2` and the noise, in that order, and assembles the
/// stacked observation at T1.
///
/// The noise variance is set from the realized signal power:
/// `noise_var = ‖Xθ‖²/Ñ · 10^(−snr_db/10)`. An infinite `snr_db` skips the
/// noise draw entirely and yields `y == Xθ`.
pub fn synthesize_instance<R: Rng + ?Sized>(cfg: &TwrnConfig, rng: &mut R) -> Result<TwrnInstance> {
    cfg.validate()?;
    let h1 = gen_sparse_channel(cfg.taps, cfg.sparsity, rng)?;
    let h2 = gen_sparse_channel(cfg.taps, cfg.sparsity, rng)?;
    let x1 = gen_training(cfg.training_len, rng, cfg.power)?;
    let x2 = gen_training(cfg.training_len, rng, cfg.power)?;

    let h = convolve(&h1.taps, &h1.taps)?;
    let g = convolve(&h2.taps, &h1.taps)?;
    let theta: ComplexVec = h.into_iter().chain(g).collect();

    // relay noise at the same SNR as the terminal; both channels have unit
    // expected energy
    let snr = snr_linear(cfg.snr_db);
    let relay_noise = if snr.is_infinite() {
        0.0
    } else {
        2.0 * cfg.power / snr
    };
    let alpha = relay_gain(cfg.power, cfg.power, cfg.relay_power, 1.0, 1.0, relay_noise)?;

    let mut measurement =
        build_training_matrix(&x1, cfg.taps)?.hstack(&build_training_matrix(&x2, cfg.taps)?)?;
    measurement.scale(alpha * cfg.power.sqrt());

    let clean = measurement.mul_vec(&theta)?;
    let rows = clean.len();
    let signal_power = clean.iter().map(|z| z.norm_sqr()).sum::<f64>() / rows as f64;
    let noise_var = if snr.is_infinite() {
        0.0
    } else {
        signal_power / snr
    };
    let observation = if noise_var > 0.0 {
        clean
            .into_iter()
            .map(|s| s + complex_gaussian(rng, noise_var))
            .collect()
    } else {
        clean
    };

    let true_support = SupportSet::of_nonzeros(&theta);
    Ok(TwrnInstance {
        h1,
        h2,
        theta,
        measurement,
        observation,
        noise_var,
        relay_gain: alpha,
        true_support,
    })
}

fn snr_linear(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}
