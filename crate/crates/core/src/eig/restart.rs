//! Implicit restart of an Arnoldi factorization.

use num_complex::Complex64;

use super::arnoldi::{combine, ArnoldiState};
use crate::dense::{shifted_qr_sweep, Mat};
use crate::error::{Error, Result};
use crate::vecops::axpy;

/// Applies `shifts` through QR sweeps on `H` and contracts the factorization
/// to `k − shifts.len()` columns.
///
/// `V ← V Q(:, 1:kk)`, `H ← H⁺(1:kk, 1:kk)` and
/// `r ← H⁺(kk+1, kk) V Q(:, kk+1) + Q(k, kk) r`.
pub fn implicit_restart(state: &mut ArnoldiState, shifts: &[Complex64]) -> Result<()> {
    let k = state.k();
    let p = shifts.len();
    if p >= k {
        return Err(Error::InvalidConfig(format!("{p} shifts leave nothing of a {k}-step factorization")));
    }
    if p == 0 {
        return Ok(());
    }
    let kk = k - p;
    let mut h = state.h_square();
    let mut q = Mat::identity(k);
    shifted_qr_sweep(&mut h, &mut q, shifts)?;

    let cols: Vec<Vec<f64>> = (0..=kk.min(k - 1)).map(|j| q.col(j).to_vec()).collect();
    let new_basis: Vec<Vec<f64>> = cols[..kk].iter().map(|c| combine(state.basis(), c)).collect();
    let new_b: Vec<Vec<f64>> = cols[..kk].iter().map(|c| combine(state.b_basis(), c)).collect();

    let n2 = new_basis[0].len();
    let mut w = vec![0.0; n2];
    let mut bw = vec![0.0; n2];
    let h_sub = h[(kk, kk - 1)];
    if h_sub != 0.0 {
        axpy(h_sub, &combine(state.basis(), &cols[kk]), &mut w);
        axpy(h_sub, &combine(state.b_basis(), &cols[kk]), &mut bw);
    }
    let q_tail = q[(k - 1, kk - 1)] * state.beta();
    if let (Some(next), Some(next_b)) = (state.next_vector(), state.next_b()) {
        axpy(q_tail, next, &mut w);
        axpy(q_tail, next_b, &mut bw);
    }
    let (next, beta) = state.normalize_residual(w, bw);
    state.replace(new_basis, new_b, &h, next, beta);
    Ok(())
}
