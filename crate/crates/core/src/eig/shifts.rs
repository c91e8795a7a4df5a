//! Shift selection for implicit restarts.

use log::debug;
use num_complex::Complex64;

use super::arnoldi::ArnoldiState;
use super::extract::RefinedPair;
use crate::dense::{general_eigenvalues, Mat};

/// The `shift_count` leftmost of `values` (already sorted rightmost first),
/// dropping one shift when the cut would separate a conjugate pair.
fn leftmost_unsplit(values: &[Complex64], shift_count: usize) -> Vec<Complex64> {
    let len = values.len();
    let count = shift_count.min(len);
    let mut start = len - count;
    if count > 0 && start > 0 {
        let kept = values[start - 1];
        let first = values[start];
        if kept.im > 0.0 && first.im < 0.0 && first.re == kept.re {
            start += 1;
        }
    }
    values[start..].to_vec()
}

/// Exact shifts: the unwanted Ritz values.
pub fn select_shifts_exact(values: &[Complex64], wanted: usize, shift_count: usize) -> Vec<Complex64> {
    assert!(wanted + shift_count <= values.len(), "wanted + shifts exceeds the subspace size");
    leftmost_unsplit(values, shift_count)
}

/// Householder QR returning the full orthogonal factor and `|R_ii|`.
fn full_qr(z: &Mat) -> (Mat, Vec<f64>) {
    let (k, c) = (z.rows(), z.cols());
    let mut r = z.clone();
    let mut q = Mat::identity(k);
    let mut diag = Vec::with_capacity(c);
    for j in 0..c.min(k) {
        let nrm = (j..k).map(|i| r[(i, j)] * r[(i, j)]).sum::<f64>().sqrt();
        if nrm == 0.0 {
            diag.push(0.0);
            continue;
        }
        let alpha = if r[(j, j)] > 0.0 { -nrm } else { nrm };
        let mut v: Vec<f64> = (j..k).map(|i| r[(i, j)]).collect();
        v[0] -= alpha;
        let vn2: f64 = v.iter().map(|x| x * x).sum();
        if vn2 > 0.0 {
            let tau = 2.0 / vn2;
            for col in 0..c {
                let s: f64 = (0..v.len()).map(|t| v[t] * r[(j + t, col)]).sum::<f64>() * tau;
                for t in 0..v.len() {
                    r[(j + t, col)] -= s * v[t];
                }
            }
            for row in 0..k {
                let s: f64 = (0..v.len()).map(|t| q[(row, j + t)] * v[t]).sum::<f64>() * tau;
                for t in 0..v.len() {
                    q[(row, j + t)] -= s * v[t];
                }
            }
        }
        diag.push(r[(j, j)].abs());
    }
    (q, diag)
}

/// Refined shifts: eigenvalues of `ÛᵀHÛ`, where `Û` spans the orthogonal
/// complement of the wanted refined coordinate vectors. A complex vector
/// contributes its real and imaginary parts as two columns.
///
/// Returns the `shift_count` leftmost of them (pairs kept whole), or `None`
/// when the wanted vectors are numerically rank deficient.
pub fn select_shifts_refined(state: &ArnoldiState, refined: &[RefinedPair], shift_count: usize) -> Option<Vec<Complex64>> {
    let k = state.k();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for r in refined {
        cols.push(r.z_tilde.iter().map(|c| c.re).collect());
        if r.z_tilde.iter().any(|c| c.im != 0.0) {
            cols.push(r.z_tilde.iter().map(|c| c.im).collect());
        }
    }
    let c = cols.len();
    if c >= k {
        return Some(Vec::new());
    }
    let z = Mat::from_fn(k, c, |i, j| cols[j][i]);
    let (q, diag) = full_qr(&z);
    let scale = z.frobenius().max(f64::MIN_POSITIVE);
    if diag.iter().any(|&d| d <= 1e-10 * scale) {
        debug!("refined shifts: rank-deficient wanted block, falling back to exact shifts");
        return None;
    }
    let u_hat = q.block(0, k, c, k);
    let comp = u_hat.transpose().matmul(&state.h_square()).matmul(&u_hat);
    let values = match general_eigenvalues(&comp) {
        Ok(v) => v,
        Err(e) => {
            debug!("refined shifts: {e}; falling back to exact shifts");
            return None;
        }
    };
    Some(leftmost_unsplit(&values, shift_count))
}
