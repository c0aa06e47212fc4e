#![allow(dead_code)]

use twrn_cs::{Complex64, ComplexMat, SupportSet};

/// Trace of `(AᴴA)⁻¹` over the columns in `support`, via Gauss-Jordan
/// elimination on the Gram matrix. Independent of the QR path under test.
pub fn gram_inverse_trace(a: &ComplexMat, support: &SupportSet) -> f64 {
    let idx = support.as_slice();
    let n = idx.len();
    let mut g = vec![vec![Complex64::new(0.0, 0.0); 2 * n]; n];
    for (p, &i) in idx.iter().enumerate() {
        for (q, &j) in idx.iter().enumerate() {
            g[p][q] = (0..a.rows()).map(|r| a[(r, i)].conj() * a[(r, j)]).sum();
        }
        g[p][n + p] = Complex64::new(1.0, 0.0);
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| g[x][col].norm().total_cmp(&g[y][col].norm()))
            .unwrap();
        g.swap(col, pivot);
        let d = g[col][col];
        for v in g[col].iter_mut() {
            *v /= d;
        }
        for row in 0..n {
            if row != col {
                let f = g[row][col];
                let pivot_row = g[col].clone();
                for (v, p) in g[row].iter_mut().zip(pivot_row) {
                    *v -= f * p;
                }
            }
        }
    }
    (0..n).map(|i| g[i][n + i].re).sum()
}

pub fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn rel_err(est: &[Complex64], truth: &[Complex64]) -> f64 {
    let d: Vec<Complex64> = est.iter().zip(truth).map(|(a, b)| a - b).collect();
    (norm_sq(&d) / norm_sq(truth)).sqrt()
}
