//! Dense complex linear algebra for the estimation problem: convolution,
//! tall Toeplitz training matrices, Householder least squares and support sets.
//!
//! Everything here is a pure function of its inputs. Problem sizes are tiny
//! (tens of rows and columns), so direct O(n²) convolution and dense
//! factorizations are used throughout.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexVec = Vec<Complex64>;

/// Magnitudes at or below this value never count as dominant taps.
pub const DOMINANCE_EPS: f64 = 1e-12;

/// Relative cutoff on the R diagonal below which a column counts as dependent.
pub const RANK_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> ComplexVec {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|z| *z *= factor);
    }

    /// Horizontal concatenation `[self, other]`.
    pub fn hstack(&self, other: &ComplexMat) -> Result<ComplexMat> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: other.rows,
            });
        }
        let cols = self.cols + other.cols;
        Ok(ComplexMat::from_fn(self.rows, cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                other[(i, j - self.cols)]
            }
        }))
    }

    /// Column-restricted copy keeping the columns listed in `support`, in order.
    pub fn select_columns(&self, support: &SupportSet) -> ComplexMat {
        let idx = support.as_slice();
        ComplexMat::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    /// `self · v`
    pub fn mul_vec(&self, v: &[Complex64]) -> Result<ComplexVec> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `selfᴴ · v`, the correlation of every column with `v`.
    pub fn adjoint_mul_vec(&self, v: &[Complex64]) -> Result<ComplexVec> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: v.len(),
            });
        }
        let mut out = vec![ZERO; self.cols];
        for (i, vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * vi;
            }
        }
        Ok(out)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMat {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Sorted, duplicate-free set of column indices below an ambient dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportSet {
    indices: Vec<usize>,
    dim: usize,
}

impl SupportSet {
    pub fn empty(dim: usize) -> Self {
        Self {
            indices: Vec::new(),
            dim,
        }
    }

    pub fn full(dim: usize) -> Self {
        Self {
            indices: (0..dim).collect(),
            dim,
        }
    }

    /// Sorts and deduplicates `indices`; fails if any index is out of range.
    pub fn from_indices(mut indices: Vec<usize>, dim: usize) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
            return Err(Error::InvalidArgument(format!(
                "support index {bad} out of range for dimension {dim}"
            )));
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(Self { indices, dim })
    }

    /// Indices of entries whose magnitude exceeds [`DOMINANCE_EPS`].
    pub fn of_nonzeros(v: &[Complex64]) -> Self {
        Self {
            indices: v
                .iter()
                .enumerate()
                .filter(|(_, z)| z.norm() > DOMINANCE_EPS)
                .map(|(i, _)| i)
                .collect(),
            dim: v.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let mut indices = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (
            self.indices.iter().peekable(),
            other.indices.iter().peekable(),
        );
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x <= y {
                        a.next();
                    }
                    if y <= x {
                        b.next();
                    }
                    indices.push(x.min(y));
                }
                (Some(&&x), None) => {
                    indices.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    indices.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        SupportSet {
            indices,
            dim: self.dim.max(other.dim),
        }
    }

    /// Copy without `index` (no-op when absent).
    pub fn without(&self, index: usize) -> SupportSet {
        SupportSet {
            indices: self
                .indices
                .iter()
                .copied()
                .filter(|&i| i != index)
                .collect(),
            dim: self.dim,
        }
    }
}

/// Full linear convolution; the output has `a.len() + b.len() - 1` entries.
pub fn convolve(a: &[Complex64], b: &[Complex64]) -> Result<ComplexVec> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument(
            "convolution inputs must be nonempty".into(),
        ));
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    Ok(out)
}

/// Tall Toeplitz matrix of the length-`N` training sequence `x` acting on
/// cascaded responses of length `2L - 1`.
///
/// The result is `(N + 2L - 2) × (2L - 1)`; column `j` is `x` shifted down by
/// `j` rows, so `matrix · v == convolve(x, v)` for every `v` of length `2L - 1`.
pub fn build_training_matrix(x: &[Complex64], taps: usize) -> Result<ComplexMat> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("training sequence is empty".into()));
    }
    if taps == 0 {
        return Err(Error::InvalidArgument(
            "tap count L must be at least 1".into(),
        ));
    }
    let cols = 2 * taps - 1;
    let rows = x.len() + cols - 1;
    Ok(ComplexMat::from_fn(rows, cols, |i, j| {
        if i >= j && i - j < x.len() {
            x[i - j]
        } else {
            ZERO
        }
    }))
}

/// Householder QR with column pivoting, kept in factored form.
struct PivotedQr {
    /// Column-major working copy; R lives in the upper triangle.
    cols: Vec<ComplexVec>,
    /// Householder vectors, one per eliminated column (unit norm, or zero for a no-op).
    reflectors: Vec<ComplexVec>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    fn factor(a: &ComplexMat) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let mut cols: Vec<ComplexVec> = (0..n).map(|j| a.column(j)).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut reflectors = Vec::with_capacity(n.min(m));
        let mut largest = 0.0_f64;
        let mut rank = 0;

        for k in 0..n.min(m) {
            // pivot: remaining column with the largest trailing norm
            let (pivot, norm_sq) = (k..n)
                .map(|j| (j, cols[j][k..].iter().map(|z| z.norm_sqr()).sum::<f64>()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            cols.swap(k, pivot);
            perm.swap(k, pivot);

            let norm = norm_sq.sqrt();
            if k == 0 {
                largest = norm;
            }
            if norm <= RANK_TOL * largest || norm == 0.0 {
                break;
            }
            rank += 1;

            let x0 = cols[k][k];
            let phase = if x0.norm() > 0.0 {
                x0 / x0.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            let alpha = -phase * norm;
            let mut v: ComplexVec = cols[k][k..].to_vec();
            v[0] -= alpha;
            let v_norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if v_norm > 0.0 {
                v.iter_mut().for_each(|z| *z /= v_norm);
            }
            for col in cols.iter_mut().skip(k) {
                apply_reflector(&v, &mut col[k..]);
            }
            reflectors.push(v);
        }

        Self {
            cols,
            reflectors,
            perm,
            rank,
        }
    }

    fn solve(&self, b: &[Complex64]) -> ComplexVec {
        let n = self.cols.len();
        let mut qtb = b.to_vec();
        for (k, v) in self.reflectors.iter().enumerate() {
            apply_reflector(v, &mut qtb[k..]);
        }
        let mut z = vec![ZERO; n];
        for k in (0..n).rev() {
            let tail: Complex64 = ((k + 1)..n).map(|j| self.cols[j][k] * z[j]).sum();
            z[k] = (qtb[k] - tail) / self.cols[k][k];
        }
        let mut out = vec![ZERO; n];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = z[k];
        }
        out
    }
}

/// `x ← (I − 2 v vᴴ) x` for a unit-norm `v`.
fn apply_reflector(v: &[Complex64], x: &mut [Complex64]) {
    let dot: Complex64 = v.iter().zip(x.iter()).map(|(vi, xi)| vi.conj() * xi).sum();
    let s = dot * 2.0;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= vi * s;
    }
}

/// Minimizer of `‖b − A z‖₂` for a tall, full-column-rank `A`, via pivoted
/// Householder QR.
pub fn least_squares(a: &ComplexMat, b: &[Complex64]) -> Result<ComplexVec> {
    if a.rows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: b.len(),
        });
    }
    if a.cols() == 0 {
        return Ok(Vec::new());
    }
    if a.rows() < a.cols() {
        return Err(Error::RankDeficient {
            rank: PivotedQr::factor(a).rank,
            cols: a.cols(),
        });
    }
    let qr = PivotedQr::factor(a);
    if qr.rank < a.cols() {
        return Err(Error::RankDeficient {
            rank: qr.rank,
            cols: a.cols(),
        });
    }
    Ok(qr.solve(b))
}

/// Least squares over the columns in `support`, scattered back into a
/// full-length vector that is zero off the support.
pub fn least_squares_on_support(
    a: &ComplexMat,
    b: &[Complex64],
    support: &SupportSet,
) -> Result<ComplexVec> {
    if support.iter().any(|i| i >= a.cols()) {
        return Err(Error::InvalidArgument(format!(
            "support exceeds the {} available columns",
            a.cols()
        )));
    }
    if support.len() > a.rows() {
        return Err(Error::SupportOverflow {
            size: support.len(),
            rows: a.rows(),
        });
    }
    let restricted = least_squares(&a.select_columns(support), b)?;
    let mut out = vec![ZERO; a.cols()];
    for (i, z) in support.iter().zip(restricted) {
        out[i] = z;
    }
    Ok(out)
}

/// Positions of the `k` largest-magnitude entries, lowest index first on
/// ties. Entries at or below [`DOMINANCE_EPS`] are never selected, so the
/// result may hold fewer than `k` indices.
pub fn top_k_support(v: &[Complex64], k: usize) -> SupportSet {
    let mut order: Vec<(usize, f64)> = v
        .iter()
        .map(|z| z.norm())
        .enumerate()
        .filter(|&(_, m)| m > DOMINANCE_EPS)
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    order.truncate(k);
    let mut indices: Vec<usize> = order.into_iter().map(|(i, _)| i).collect();
    indices.sort_unstable();
    SupportSet {
        indices,
        dim: v.len(),
    }
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖a − b‖₂` for equal-length vectors.
pub fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}
