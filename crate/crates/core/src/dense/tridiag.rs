//! Symmetric tridiagonal kernels for the projected Lanczos matrix.

/// Symmetric tridiagonal matrix with diagonal `δ₀..δ_k` and off-diagonal `β₁..β_k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymTridiag {
    diag: Vec<f64>,
    off: Vec<f64>,
}

/// `T + shift·I` is not positive definite; `index` is the 0-based position of
/// the first non-positive pivot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indefinite {
    pub index: usize,
    pub pivot: f64,
}

/// `L D Lᵀ` factor of `T + shift·I` with unit lower bidiagonal `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagLdlt {
    pivots: Vec<f64>,
    mult: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(
            off.len() + 1 == diag.len() || (diag.is_empty() && off.is_empty()),
            "off-diagonal must be one shorter than the diagonal"
        );
        Self { diag, off }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Appends `δ` on the diagonal coupled to the previous row by `β`
    /// (`β` is ignored for the first entry).
    pub fn push(&mut self, beta: f64, delta: f64) {
        if !self.diag.is_empty() {
            self.off.push(beta);
        }
        self.diag.push(delta);
    }

    pub fn one_norm(&self) -> f64 {
        let k = self.dim();
        (0..k)
            .map(|j| {
                let mut s = self.diag[j].abs();
                if j > 0 {
                    s += self.off[j - 1].abs();
                }
                if j + 1 < k {
                    s += self.off[j].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let k = self.dim();
        (0..k)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < k {
                    acc += self.off[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Pivots of `T + shift·I`, or the first non-positive one.
    pub fn ldlt(&self, shift: f64) -> Result<TridiagLdlt, Indefinite> {
        let k = self.dim();
        let mut pivots = Vec::with_capacity(k);
        let mut mult = Vec::with_capacity(k.saturating_sub(1));
        for i in 0..k {
            let mut d = self.diag[i] + shift;
            if i > 0 {
                let l = self.off[i - 1] / pivots[i - 1];
                d -= l * self.off[i - 1];
                mult.push(l);
            }
            if !(d > 0.0) {
                return Err(Indefinite { index: i, pivot: d });
            }
            pivots.push(d);
        }
        Ok(TridiagLdlt { pivots, mult })
    }

    /// Number of eigenvalues strictly below `x` (Sturm count).
    pub fn count_below(&self, x: f64) -> usize {
        let k = self.dim();
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..k {
            let b2 = if i > 0 { self.off[i - 1] * self.off[i - 1] } else { 0.0 };
            q = self.diag[i] - x - if i > 0 { b2 / q } else { 0.0 };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs() + f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let k = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..k {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < k {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Leftmost eigenvalue by Sturm-sequence bisection.
    pub fn leftmost_eig(&self) -> f64 {
        self.kth_eig(0)
    }

    /// `idx`-th smallest eigenvalue (0-based) by bisection.
    pub fn kth_eig(&self, idx: usize) -> f64 {
        assert!(idx < self.dim());
        if self.dim() == 1 {
            return self.diag[0];
        }
        let (mut lo, mut hi) = self.gershgorin();
        let scale = 1.0 + self.one_norm();
        lo -= f64::EPSILON * scale;
        hi += f64::EPSILON * scale;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > idx {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * scale {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Unit eigenvector for an (approximate) eigenvalue `theta` by inverse
    /// iteration on a slightly shifted, possibly indefinite system.
    pub fn eigenvector(&self, theta: f64) -> Vec<f64> {
        let k = self.dim();
        let scale = 1.0 + self.one_norm();
        let shift = theta - 1e3 * f64::EPSILON * scale;
        let mut x: Vec<f64> = (0..k).map(|i| 1.0 + 0.1 * (i as f64 + 1.0).sin()).collect();
        for _ in 0..4 {
            x = self.solve_shifted_pivoted(shift, &x);
            let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm == 0.0 || !nrm.is_finite() {
                break;
            }
            x.iter_mut().for_each(|v| *v /= nrm);
        }
        x
    }

    /// Solves `(T − shift·I) x = b` with partial pivoting (tridiagonal LU).
    fn solve_shifted_pivoted(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let k = self.dim();
        if k == 1 {
            let d = self.diag[0] - shift;
            let d = if d == 0.0 { f64::EPSILON } else { d };
            return vec![b[0] / d];
        }
        // rows stored as (main, upper1, upper2) after pivoting
        let mut a: Vec<[f64; 3]> = Vec::with_capacity(k);
        let mut sub: Vec<f64> = Vec::with_capacity(k);
        for i in 0..k {
            let lower = if i > 0 { self.off[i - 1] } else { 0.0 };
            let upper = if i + 1 < k { self.off[i] } else { 0.0 };
            a.push([self.diag[i] - shift, upper, 0.0]);
            sub.push(lower);
        }
        let mut rhs = b.to_vec();
        let tiny = f64::EPSILON * (1.0 + self.one_norm());
        for i in 0..k - 1 {
            let l = sub[i + 1];
            if l.abs() > a[i][0].abs() {
                a.swap(i, i + 1);
                rhs.swap(i, i + 1);
                // row i+1 (now at i) had entries at columns i, i+1, i+2
                // shift representation: a[i] = [col i, col i+1, col i+2]
                let moved = a[i];
                let old = a[i + 1];
                // `moved` came from row i+1: its columns were (i: l, i+1: main, i+2: upper)
                a[i] = [l, moved[0], moved[1]];
                a[i + 1] = [old[0], old[1], old[2]];
                // eliminate column i from row i+1 using new pivot row
                let m = a[i + 1][0] / a[i][0];
                a[i + 1] = [a[i + 1][1] - m * a[i][1], a[i + 1][2] - m * a[i][2], 0.0];
                rhs[i + 1] -= m * rhs[i];
            } else {
                let piv = if a[i][0] == 0.0 { tiny } else { a[i][0] };
                a[i][0] = piv;
                let m = l / piv;
                a[i + 1] = [a[i + 1][0] - m * a[i][1], a[i + 1][1] - m * a[i][2], 0.0];
                rhs[i + 1] -= m * rhs[i];
            }
        }
        if a[k - 1][0] == 0.0 {
            a[k - 1][0] = tiny;
        }
        let mut x = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = rhs[i];
            if i + 1 < k {
                s -= a[i][1] * x[i + 1];
            }
            if i + 2 < k {
                s -= a[i][2] * x[i + 2];
            }
            x[i] = s / a[i][0];
        }
        x
    }
}

impl TridiagLdlt {
    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let k = self.pivots.len();
        let mut y = rhs.to_vec();
        for i in 1..k {
            y[i] -= self.mult[i - 1] * y[i - 1];
        }
        for i in 0..k {
            y[i] /= self.pivots[i];
        }
        for i in (0..k.saturating_sub(1)).rev() {
            y[i] -= self.mult[i] * y[i + 1];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ldlt_examples() {
        let t = SymTridiag::new(vec![2.0], vec![]);
        assert_eq!(t.ldlt(0.0).unwrap().pivots(), &[2.0]);

        let t = SymTridiag::new(vec![2.0, 2.0], vec![1.0]);
        let e = t.ldlt(-1.0).unwrap_err();
        assert_eq!(e.index, 1);
        assert_eq!(e.pivot, 0.0);

        let t = SymTridiag::new(vec![0.0, 0.0], vec![1.0]);
        assert_eq!(t.ldlt(2.0).unwrap().pivots(), &[2.0, 1.5]);
    }

    #[test]
    fn ldlt_solve_matches_multiply() {
        let t = SymTridiag::new(vec![4.0, 5.0, 6.0], vec![1.0, -2.0]);
        let f = t.ldlt(0.5).unwrap();
        let x = f.solve(&[1.0, 2.0, 3.0]);
        let mut r = t.mul_vec(&x);
        for i in 0..3 {
            r[i] += 0.5 * x[i];
        }
        for (ri, bi) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((ri - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn leftmost_examples() {
        assert_eq!(SymTridiag::new(vec![5.0], vec![]).leftmost_eig(), 5.0);
        let t = SymTridiag::new(vec![2.0, 2.0], vec![1.0]);
        assert!((t.leftmost_eig() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn leftmost_matches_dense_eigensolve() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let d: Vec<f64> = (0..8).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let o: Vec<f64> = (0..7).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let t = SymTridiag::new(d.clone(), o.clone());
            let dense = nalgebra::DMatrix::from_fn(8, 8, |i, j| {
                if i == j {
                    d[i]
                } else if i + 1 == j {
                    o[i]
                } else if j + 1 == i {
                    o[j]
                } else {
                    0.0
                }
            });
            let oracle = dense.symmetric_eigenvalues().min();
            let tol = 1e-12 * (1.0 + t.one_norm());
            assert!((t.leftmost_eig() - oracle).abs() <= tol);
        }
    }

    #[test]
    fn eigenvector_of_leftmost() {
        let t = SymTridiag::new(vec![1.0, -3.0, 2.0, 0.5], vec![0.7, 1e-3, 0.4]);
        let theta = t.leftmost_eig();
        let v = t.eigenvector(theta);
        let tv = t.mul_vec(&v);
        let res: f64 = tv.iter().zip(&v).map(|(a, b)| (a - theta * b).powi(2)).sum::<f64>().sqrt();
        assert!(res < 1e-10);
    }
}
