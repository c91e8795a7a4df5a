//! Implicitly shifted QR sweeps in real arithmetic.

use num_complex::Complex64;

use super::mat::Mat;
use crate::error::{Error, Result};

/// Relative tolerance used to pair a complex shift with its conjugate.
const PAIR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shift {
    Real(f64),
    /// `(2 Re σ, |σ|²)` of a conjugate pair.
    Pair(f64, f64),
}

fn group_shifts(shifts: &[Complex64]) -> Result<Vec<Shift>> {
    let mut out = Vec::with_capacity(shifts.len());
    let mut i = 0;
    while i < shifts.len() {
        let s = shifts[i];
        if s.im == 0.0 {
            out.push(Shift::Real(s.re));
            i += 1;
            continue;
        }
        let partner = shifts.get(i + 1).copied().ok_or(Error::UnpairedShift(s))?;
        if (partner - s.conj()).norm() > PAIR_TOL * s.norm() {
            return Err(Error::UnpairedShift(s));
        }
        out.push(Shift::Pair(2.0 * s.re, s.norm_sqr()));
        i += 2;
    }
    Ok(out)
}

/// Householder vector for `x`: `P x = α e₁` with `P = I − 2vvᵀ/vᵀv`.
/// Returns `None` when `x` is already zero.
fn householder(x: &[f64]) -> Option<(Vec<f64>, f64)> {
    let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nrm == 0.0 {
        return None;
    }
    let alpha = if x[0] > 0.0 { -nrm } else { nrm };
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vn2: f64 = v.iter().map(|a| a * a).sum();
    if vn2 == 0.0 {
        return None;
    }
    Some((v, 2.0 / vn2))
}

/// Applies `P = I − τvvᵀ` acting on indices `r0..r0+len` as a similarity to
/// `h` (rows over `col_lo..`, columns over `..row_hi`) and from the right to `q`.
fn reflect(h: &mut Mat, q: &mut Mat, r0: usize, v: &[f64], tau: f64, col_lo: usize, row_hi: usize) {
    let k = h.cols();
    let len = v.len();
    for j in col_lo..k {
        let s: f64 = (0..len).map(|t| v[t] * h[(r0 + t, j)]).sum::<f64>() * tau;
        for t in 0..len {
            h[(r0 + t, j)] -= s * v[t];
        }
    }
    for i in 0..row_hi {
        let s: f64 = (0..len).map(|t| h[(i, r0 + t)] * v[t]).sum::<f64>() * tau;
        for t in 0..len {
            h[(i, r0 + t)] -= s * v[t];
        }
    }
    for i in 0..q.rows() {
        let s: f64 = (0..len).map(|t| q[(i, r0 + t)] * v[t]).sum::<f64>() * tau;
        for t in 0..len {
            q[(i, r0 + t)] -= s * v[t];
        }
    }
}

fn givens(h: &mut Mat, q: &mut Mat, i: usize, x: f64, y: f64, col_lo: usize, row_hi: usize) {
    let r = x.hypot(y);
    if r == 0.0 {
        return;
    }
    let (c, s) = (x / r, y / r);
    let k = h.cols();
    for j in col_lo..k {
        let a = h[(i, j)];
        let b = h[(i + 1, j)];
        h[(i, j)] = c * a + s * b;
        h[(i + 1, j)] = -s * a + c * b;
    }
    for row in 0..row_hi {
        let a = h[(row, i)];
        let b = h[(row, i + 1)];
        h[(row, i)] = c * a + s * b;
        h[(row, i + 1)] = -s * a + c * b;
    }
    for row in 0..q.rows() {
        let a = q[(row, i)];
        let b = q[(row, i + 1)];
        q[(row, i)] = c * a + s * b;
        q[(row, i + 1)] = -s * a + c * b;
    }
}

/// Sets negligible subdiagonals to zero and returns the unreduced blocks as
/// inclusive index ranges.
fn split_blocks(h: &mut Mat) -> Vec<(usize, usize)> {
    let k = h.rows();
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 0..k.saturating_sub(1) {
        let scale = h[(i, i)].abs() + h[(i + 1, i + 1)].abs();
        if h[(i + 1, i)].abs() <= f64::EPSILON * scale {
            h[(i + 1, i)] = 0.0;
            blocks.push((start, i));
            start = i + 1;
        }
    }
    if k > 0 {
        blocks.push((start, k - 1));
    }
    blocks
}

fn single_shift(h: &mut Mat, q: &mut Mat, a: usize, b: usize, sigma: f64) {
    let mut x = h[(a, a)] - sigma;
    let mut y = h[(a + 1, a)];
    for i in a..b {
        givens(h, q, i, x, y, if i > a { i - 1 } else { a }, (i + 2).min(b) + 1);
        if i > a {
            h[(i + 1, i - 1)] = 0.0;
        }
        if i + 1 < b {
            x = h[(i + 1, i)];
            y = h[(i + 2, i)];
        }
    }
}

fn double_shift(h: &mut Mat, q: &mut Mat, a: usize, b: usize, s: f64, t: f64) {
    let h00 = h[(a, a)];
    let h10 = h[(a + 1, a)];
    let mut x = h00 * h00 + h[(a, a + 1)] * h10 - s * h00 + t;
    let mut y = h10 * (h00 + h[(a + 1, a + 1)] - s);
    if b == a + 1 {
        givens(h, q, a, x, y, a, b + 1);
        return;
    }
    let mut z = h10 * h[(a + 2, a + 1)];
    for kk in a..b - 1 {
        if let Some((v, tau)) = householder(&[x, y, z]) {
            let col_lo = if kk > a { kk - 1 } else { a };
            reflect(h, q, kk, &v, tau, col_lo, (kk + 3).min(b) + 1);
        }
        if kk > a {
            h[(kk + 1, kk - 1)] = 0.0;
            h[(kk + 2, kk - 1)] = 0.0;
        }
        x = h[(kk + 1, kk)];
        y = h[(kk + 2, kk)];
        z = if kk + 3 <= b { h[(kk + 3, kk)] } else { 0.0 };
    }
    givens(h, q, b - 1, x, y, b - 2, b + 1);
    h[(b, b - 2)] = 0.0;
}

/// Applies `shifts` to the Hessenberg `h` by implicit bulge chasing and
/// accumulates the orthogonal similarity into `q_accum` (`Q ← Q·Qᵢ`).
///
/// Complex shifts must come as adjacent conjugate pairs; each pair is applied
/// as one real double-shift step.
pub fn shifted_qr_sweep(h: &mut Mat, q_accum: &mut Mat, shifts: &[Complex64]) -> Result<()> {
    let k = h.rows();
    if !h.is_square() {
        return Err(Error::DimensionMismatch { expected: k, got: h.cols() });
    }
    if q_accum.cols() != k {
        return Err(Error::DimensionMismatch { expected: k, got: q_accum.cols() });
    }
    let grouped = group_shifts(shifts)?;
    for shift in grouped {
        for (a, b) in split_blocks(h) {
            if b == a {
                continue;
            }
            match shift {
                Shift::Real(sigma) => single_shift(h, q_accum, a, b, sigma),
                Shift::Pair(s, t) => double_shift(h, q_accum, a, b, s, t),
            }
        }
    }
    for j in 0..k {
        for i in j + 2..k {
            h[(i, j)] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::hessenberg::hessenberg_eigenvalues;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hessenberg(rng: &mut ChaCha8Rng, k: usize) -> Mat {
        Mat::from_fn(k, k, |i, j| if i <= j + 1 { rng.random::<f64>() * 2.0 - 1.0 } else { 0.0 })
    }

    fn check_similarity(h0: &Mat, h: &Mat, q: &Mat) {
        let lhs = h0.matmul(q);
        let rhs = q.matmul(h);
        for j in 0..h.cols() {
            for i in 0..h.rows() {
                assert!((lhs[(i, j)] - rhs[(i, j)]).abs() < 1e-12 * (1.0 + h0.one_norm()));
            }
        }
        let qtq = q.transpose().matmul(q);
        for j in 0..q.cols() {
            for i in 0..q.cols() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[(i, j)] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn empty_sweep_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h0 = random_hessenberg(&mut rng, 5);
        let mut h = h0.clone();
        let mut q = Mat::identity(5);
        shifted_qr_sweep(&mut h, &mut q, &[]).unwrap();
        assert_eq!(h, h0);
        assert_eq!(q, Mat::identity(5));
    }

    #[test]
    fn exact_shift_deflates() {
        // eigenvalues 3 and 1
        let mut h = Mat::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let mut q = Mat::identity(2);
        shifted_qr_sweep(&mut h, &mut q, &[Complex64::new(1.0, 0.0)]).unwrap();
        assert!(h[(1, 0)].abs() < 1e-14);
        assert!((h[(1, 1)] - 1.0).abs() < 1e-14);
        assert!((h[(0, 0)] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn unpaired_complex_shift_is_rejected() {
        let mut h = Mat::identity(3);
        let mut q = Mat::identity(3);
        let r = shifted_qr_sweep(&mut h, &mut q, &[Complex64::new(1.0, 1.0)]);
        assert!(matches!(r, Err(Error::UnpairedShift(_))));
        let r = shifted_qr_sweep(&mut h, &mut q, &[Complex64::new(1.0, 1.0), Complex64::new(2.0, -1.0)]);
        assert!(matches!(r, Err(Error::UnpairedShift(_))));
    }

    #[test]
    fn spectrum_preserved_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let h0 = random_hessenberg(&mut rng, 8);
            let mut h = h0.clone();
            let mut q = Mat::identity(8);
            let shifts = [
                Complex64::new(0.3, 0.0),
                Complex64::new(-0.2, 0.5),
                Complex64::new(-0.2, -0.5),
                Complex64::new(1.1, 0.0),
            ];
            shifted_qr_sweep(&mut h, &mut q, &shifts).unwrap();
            check_similarity(&h0, &h, &q);
            let before = hessenberg_eigenvalues(&h0).unwrap();
            let after = hessenberg_eigenvalues(&h).unwrap();
            for (x, y) in before.iter().zip(&after) {
                assert!((x - y).norm() < 1e-10 * h0.one_norm());
            }
        }
    }

    #[test]
    fn exact_complex_pair_deflates_trailing_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h0 = random_hessenberg(&mut rng, 6);
        let vals = hessenberg_eigenvalues(&h0).unwrap();
        let pair: Vec<Complex64> = match vals.iter().position(|v| v.im > 0.0) {
            Some(i) => vec![vals[i], vals[i].conj()],
            None => return,
        };
        let mut h = h0.clone();
        let mut q = Mat::identity(6);
        shifted_qr_sweep(&mut h, &mut q, &pair).unwrap();
        assert!(h[(4, 3)].abs() < 1e-8 * h0.one_norm());
    }
}
