//! Training-based channel estimation for amplify-and-forward two-way relay
//! networks over sparse frequency-selective channels.
//!
//! The crate synthesizes the stacked linear observation model seen by one
//! terminal, `y = α√P·[X1, X2]·[h; g] + n`, where `h = h1*h1` and
//! `g = h2*h1` are the cascaded channels, and compares three estimators of
//! `θ = [h; g]`:
//!
//! * full least squares over all cascade taps,
//! * a CoSaMP-style greedy sparse estimator ([`estimators::estimate_cosamp`]),
//! * an oracle least-squares estimator that knows the true support.
//!
//! [`experiment::run_sweep`] runs the seeded Monte-Carlo MSE-vs-SNR comparison.

pub mod error;
pub mod estimators;
pub mod experiment;
pub mod linalg;
pub mod model;

pub use error::{Error, Result};
pub use estimators::{estimate_cosamp, estimate_ls, estimate_oracle, CosampParams, EstimateResult};
pub use experiment::{
    run_sweep, run_trial, trial_rng, CellStats, EstimatorKind, MseMode, SweepConfig, SweepReport,
    TrialOutcome,
};
pub use linalg::{
    build_training_matrix, convolve, least_squares, least_squares_on_support, top_k_support,
    ComplexMat, ComplexVec, SupportSet,
};
pub use model::{
    gen_sparse_channel, gen_training, relay_gain, synthesize_instance, SparseChannel, TwrnConfig,
    TwrnInstance,
};

pub use num_complex::Complex64;
