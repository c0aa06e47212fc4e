//! Channel estimators for the stacked cascade `θ = [h; g]`.

use log::warn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    distance, least_squares, least_squares_on_support, norm, top_k_support, ComplexMat, ComplexVec,
    SupportSet,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosampParams {
    /// Target number of nonzero taps `S` in the estimate.
    pub sparsity: usize,
    pub max_iters: usize,
    /// Halt once successive estimates move by at most this much (ℓ₂).
    pub halt_tol: f64,
}

impl CosampParams {
    /// Iteration cap `4S` and halting threshold `1e-4`.
    pub fn new(sparsity: usize) -> Self {
        Self {
            sparsity,
            max_iters: 4 * sparsity.max(1),
            halt_tol: 1e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sparsity == 0 {
            return Err(Error::InvalidArgument(
                "CoSaMP sparsity must be at least 1".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument(
                "max_iters must be at least 1".into(),
            ));
        }
        if self.halt_tol.is_nan() || self.halt_tol <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "halt_tol = {} must be positive",
                self.halt_tol
            )));
        }
        Ok(())
    }

    /// Candidates nominated from the proxy each iteration, `⌈1.5·S⌉`.
    pub fn proxy_width(&self) -> usize {
        (3 * self.sparsity).div_ceil(2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub theta_hat: ComplexVec,
    pub support: SupportSet,
    pub iterations: usize,
    /// `‖y − X·θ̂_i‖₂` after each iteration.
    pub residual_norms: Vec<f64>,
}

fn residual(x: &ComplexMat, y: &[Complex64], theta: &[Complex64]) -> Result<ComplexVec> {
    let fit = x.mul_vec(theta)?;
    Ok(y.iter().zip(fit).map(|(a, b)| a - b).collect())
}

/// Least squares over every cascade tap.
pub fn estimate_ls(x: &ComplexMat, y: &[Complex64]) -> Result<EstimateResult> {
    let theta_hat = least_squares(x, y)?;
    let r = residual(x, y, &theta_hat)?;
    Ok(EstimateResult {
        theta_hat,
        support: SupportSet::full(x.cols()),
        iterations: 1,
        residual_norms: vec![norm(&r)],
    })
}

/// Least squares restricted to the genie-provided support.
pub fn estimate_oracle(
    x: &ComplexMat,
    y: &[Complex64],
    true_support: &SupportSet,
) -> Result<EstimateResult> {
    let theta_hat = least_squares_on_support(x, y, true_support)?;
    let r = residual(x, y, &theta_hat)?;
    Ok(EstimateResult {
        theta_hat,
        support: true_support.clone(),
        iterations: 1,
        residual_norms: vec![norm(&r)],
    })
}

/// Greedy sparse recovery of `θ` from `y ≈ X·θ`.
///
/// Each iteration correlates the residual with every column, nominates the
/// `⌈1.5·S⌉` strongest positions, merges them with the current support,
/// solves least squares on the merged set and prunes back to the `S` largest
/// taps. Iteration stops after `min(4·S, max_iters)` rounds or once the
/// estimate moves by at most `halt_tol`. The returned taps are re-fitted by
/// least squares on the final support.
///
/// A rank-deficient merged solve is not fatal: candidates are dropped in
/// order of increasing proxy magnitude until the solve succeeds.
pub fn estimate_cosamp(
    x: &ComplexMat,
    y: &[Complex64],
    params: &CosampParams,
) -> Result<EstimateResult> {
    params.validate()?;
    let (rows, dim) = (x.rows(), x.cols());
    if y.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: y.len(),
        });
    }
    if params.sparsity > rows {
        return Err(Error::SupportOverflow {
            size: params.sparsity,
            rows,
        });
    }
    let sparsity = params.sparsity.min(dim);
    let mut width = params.proxy_width();
    if width > rows {
        warn!("proxy width {width} clamped to {rows} measurements");
        width = rows;
    }
    let cap = params.max_iters.min(4 * params.sparsity);

    let mut theta = vec![Complex64::new(0.0, 0.0); dim];
    let mut support = SupportSet::empty(dim);
    let mut r = y.to_vec();
    let mut residual_norms = Vec::with_capacity(cap);
    let mut iterations = 0;

    while iterations < cap {
        iterations += 1;
        let proxy = x.adjoint_mul_vec(&r)?;
        let nominated = top_k_support(&proxy, width);
        let mut merged = nominated.union(&support);
        if merged.len() > rows {
            warn!(
                "merged support {} clamped to {rows} measurements",
                merged.len()
            );
            merged = trim_to(&merged, &support, &proxy, rows);
        }

        let z = solve_dropping_deficient(x, y, merged, &proxy)?;
        let next_support = top_k_support(&z, sparsity);
        let mut next = vec![Complex64::new(0.0, 0.0); dim];
        for i in next_support.iter() {
            next[i] = z[i];
        }

        r = residual(x, y, &next)?;
        residual_norms.push(norm(&r));
        let change = distance(&next, &theta);
        theta = next;
        support = next_support;
        if change <= params.halt_tol {
            break;
        }
    }

    // re-fit on the final support; pruning leaves the kept taps biased
    if !support.is_empty() {
        let refit = solve_dropping_deficient(x, y, support.clone(), &x.adjoint_mul_vec(&r)?)?;
        support = SupportSet::of_nonzeros(&refit);
        theta = refit;
        r = residual(x, y, &theta)?;
        if let Some(last) = residual_norms.last_mut() {
            *last = norm(&r);
        }
    }

    Ok(EstimateResult {
        theta_hat: theta,
        support,
        iterations,
        residual_norms,
    })
}

/// Drops nominated-only candidates, weakest proxy first, until `limit` remain.
fn trim_to(
    merged: &SupportSet,
    keep: &SupportSet,
    proxy: &[Complex64],
    limit: usize,
) -> SupportSet {
    let mut droppable: Vec<usize> = merged.iter().filter(|&i| !keep.contains(i)).collect();
    droppable.sort_by(|&a, &b| proxy[a].norm().total_cmp(&proxy[b].norm()).then(a.cmp(&b)));
    let mut out = merged.clone();
    for i in droppable {
        if out.len() <= limit {
            break;
        }
        out = out.without(i);
    }
    out
}

fn solve_dropping_deficient(
    x: &ComplexMat,
    y: &[Complex64],
    mut support: SupportSet,
    proxy: &[Complex64],
) -> Result<ComplexVec> {
    loop {
        match least_squares_on_support(x, y, &support) {
            Err(Error::RankDeficient { rank, cols }) => {
                let weakest = support
                    .iter()
                    .min_by(|&a, &b| proxy[a].norm().total_cmp(&proxy[b].norm()))
                    .expect("rank-deficient solve has at least one column");
                warn!("restricted solve has rank {rank} of {cols}; dropping column {weakest}");
                support = support.without(weakest);
            }
            other => return other,
        }
    }
}
