//! Sparse symmetric storage and the B operator.

use std::cell::Cell;

use crate::error::{check_len, Error, Result};
use crate::vecops::{dot, sqrt_clamped};

/// Counts applications of `A` to a vector.
///
/// Owned by a single solve; `Cell` keeps the kernels callable through shared
/// references.
#[derive(Debug, Default)]
pub struct MvCounter(Cell<usize>);

impl MvCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&self, k: usize) {
        self.0.set(self.0.get() + k);
    }

    pub fn get(&self) -> usize {
        self.0.get()
    }
}

/// Symmetric matrix in compressed sparse row form over the full pattern.
///
/// Both triangles are stored, so traversing row `j` also yields column `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    ones_norm: f64,
}

impl SparseSymMatrix {
    /// Builds the matrix from `(row, col, value)` triplets covering the full
    /// pattern. Duplicate coordinates are summed; exact zeros are dropped.
    /// Fails unless the summed pattern is exactly symmetric.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { row: i, col: j, n });
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut rows = Vec::with_capacity(sorted.len());
        let mut it = sorted.into_iter().peekable();
        while let Some((i, j, mut v)) = it.next() {
            while let Some(&(i2, j2, v2)) = it.peek() {
                if i2 == i && j2 == j {
                    v += v2;
                    it.next();
                } else {
                    break;
                }
            }
            if v != 0.0 {
                rows.push(i);
                col_idx.push(j);
                values.push(v);
            }
        }
        for &i in &rows {
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut m = Self {
            n,
            row_ptr,
            col_idx,
            values,
            ones_norm: 0.0,
        };
        m.check_symmetric()?;
        m.ones_norm = (0..n).map(|j| m.column_abs_sum(j)).fold(0.0, f64::max);
        Ok(m)
    }

    /// `A = G + Gᵀ` for a general (possibly unsymmetric) `G` given as triplets.
    pub fn from_general_plus_transpose(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut both = Vec::with_capacity(2 * triplets.len());
        for &(i, j, v) in triplets {
            both.push((i, j, v));
            both.push((j, i, v));
        }
        Self::from_triplets(n, &both)
    }

    /// Row-major dense input.
    pub fn from_dense(n: usize, dense: &[f64]) -> Result<Self> {
        check_len(n * n, dense.len())?;
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = dense[i * n + j];
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, &t)
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), &t).expect("diagonal matrices are symmetric")
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    fn check_symmetric(&self) -> Result<()> {
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if self.get(j, i) != v {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Cached `‖A‖₁` (maximum absolute column sum).
    pub fn ones_norm(&self) -> f64 {
        self.ones_norm
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// `‖A(:, j)‖₁`, summed in ascending row order.
    pub fn column_abs_sum(&self, j: usize) -> f64 {
        let (_, vals) = self.row(j);
        let mut acc = 0.0;
        for v in vals {
            acc += v.abs();
        }
        acc
    }

    /// `y = A x` without touching any counter.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            *yi = acc;
        }
    }

    /// Uncounted `A x`, for verification paths.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        let mut y = vec![0.0; self.n];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    /// `A x`, charging one application to `counter`.
    pub fn apply_counted(&self, x: &[f64], counter: &MvCounter) -> Result<Vec<f64>> {
        let y = self.apply(x)?;
        counter.add(1);
        Ok(y)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[i * n + j] = v;
            }
        }
        d
    }
}

/// Cholesky factor restricted to the row envelope of the lower triangle.
///
/// Row `i` of `L` is stored densely from column `first[i]` through `i`;
/// fill-in never leaves the envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCholesky {
    first: Vec<usize>,
    start: Vec<usize>,
    vals: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(m: &SparseSymMatrix) -> Result<Self> {
        let n = m.dim();
        let mut first = vec![0usize; n];
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            let (cols, _) = m.row(i);
            first[i] = cols.first().copied().filter(|&c| c <= i).unwrap_or(i);
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut vals = vec![0.0; start[n]];
        for i in 0..n {
            let (cols, v) = m.row(i);
            for (&j, &a) in cols.iter().zip(v) {
                if j <= i {
                    vals[start[i] + j - first[i]] = a;
                }
            }
        }
        let mut f = Self { first, start, vals };
        for i in 0..n {
            for j in f.first[i]..=i {
                let k0 = f.first[i].max(f.first[j]);
                let mut s = f.vals[f.start[i] + j - f.first[i]];
                for k in k0..j {
                    s -= f.at(i, k) * f.at(j, k);
                }
                if j < i {
                    let djj = f.at(j, j);
                    f.vals[f.start[i] + j - f.first[i]] = s / djj;
                } else {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { index: i, pivot: s });
                    }
                    f.vals[f.start[i] + i - f.first[i]] = s.sqrt();
                }
            }
        }
        Ok(f)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.vals[self.start[i] + j - self.first[i]]
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.first.len();
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in self.first[i]..i {
                s -= self.at(i, k) * y[k];
            }
            y[i] = s / self.at(i, i);
        }
        for i in (0..n).rev() {
            let xi = y[i] / self.at(i, i);
            y[i] = xi;
            for k in self.first[i]..i {
                y[k] -= self.at(i, k) * xi;
            }
        }
        y
    }
}

/// Symmetric positive definite tridiagonal operator with its LDLᵀ factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    pivots: Vec<f64>,
    mult: Vec<f64>,
}

impl SpdTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidProblem("empty tridiagonal operator".into()));
        }
        check_len(n - 1, off.len())?;
        let mut pivots = Vec::with_capacity(n);
        let mut mult = Vec::with_capacity(n - 1);
        let mut d = diag[0];
        for i in 0..n {
            if i > 0 {
                let l = off[i - 1] / pivots[i - 1];
                mult.push(l);
                d = diag[i] - l * off[i - 1];
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { index: i, pivot: d });
            }
            pivots.push(d);
        }
        Ok(Self {
            diag,
            off,
            pivots,
            mult,
        })
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                if i > 0 {
                    acc += self.off[i - 1] * x[i - 1];
                }
                acc += self.diag[i] * x[i];
                if i + 1 < n {
                    acc += self.off[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut y = rhs.to_vec();
        for i in 1..n {
            y[i] -= self.mult[i - 1] * y[i - 1];
        }
        for i in 0..n {
            y[i] /= self.pivots[i];
        }
        for i in (0..n - 1).rev() {
            y[i] -= self.mult[i] * y[i + 1];
        }
        y
    }
}

/// The SPD matrix `B` of the trust-region norm.
#[derive(Debug, Clone, PartialEq)]
pub enum BOperator {
    Identity(usize),
    Tridiagonal(SpdTridiagonal),
    General {
        matrix: SparseSymMatrix,
        factor: EnvelopeCholesky,
    },
}

impl BOperator {
    pub fn identity(n: usize) -> Self {
        BOperator::Identity(n)
    }

    /// `tridiag(off, diag, off)` of order `n`.
    pub fn constant_tridiagonal(n: usize, off: f64, diag: f64) -> Result<Self> {
        let off = vec![off; n.saturating_sub(1)];
        Ok(BOperator::Tridiagonal(SpdTridiagonal::new(vec![diag; n], off)?))
    }

    pub fn tridiagonal(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        Ok(BOperator::Tridiagonal(SpdTridiagonal::new(diag, off)?))
    }

    /// General sparse SPD matrix; factorization failures surface here.
    pub fn general(matrix: SparseSymMatrix) -> Result<Self> {
        let factor = EnvelopeCholesky::factor(&matrix)?;
        Ok(BOperator::General { matrix, factor })
    }

    pub fn dim(&self) -> usize {
        match self {
            BOperator::Identity(n) => *n,
            BOperator::Tridiagonal(t) => t.diag.len(),
            BOperator::General { matrix, .. } => matrix.dim(),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, BOperator::Identity(_))
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        Ok(match self {
            BOperator::Identity(_) => x.to_vec(),
            BOperator::Tridiagonal(t) => t.apply(x),
            BOperator::General { matrix, .. } => {
                let mut y = vec![0.0; x.len()];
                matrix.apply_into(x, &mut y);
                y
            }
        })
    }

    /// Solves `B w = v`.
    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), v.len())?;
        Ok(match self {
            BOperator::Identity(_) => v.to_vec(),
            BOperator::Tridiagonal(t) => t.solve(v),
            BOperator::General { factor, .. } => factor.solve(v),
        })
    }

    /// `‖v‖_B = sqrt(vᵀBv)`.
    pub fn norm(&self, v: &[f64]) -> Result<f64> {
        let bv = self.apply(v)?;
        Ok(sqrt_clamped(dot(v, &bv)))
    }

    /// `‖v‖_{B⁻¹} = sqrt(vᵀB⁻¹v)`.
    pub fn inv_norm(&self, v: &[f64]) -> Result<f64> {
        let w = self.solve(v)?;
        Ok(sqrt_clamped(dot(v, &w)))
    }

    /// `‖B(:, j)‖₁`, summed in ascending row order.
    pub fn column_abs_sum(&self, j: usize) -> f64 {
        match self {
            BOperator::Identity(_) => 1.0,
            BOperator::Tridiagonal(t) => {
                let n = t.diag.len();
                let mut acc = 0.0;
                if j > 0 {
                    acc += t.off[j - 1].abs();
                }
                acc += t.diag[j].abs();
                if j + 1 < n {
                    acc += t.off[j].abs();
                }
                acc
            }
            BOperator::General { matrix, .. } => matrix.column_abs_sum(j),
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut d = vec![0.0; n * n];
        match self {
            BOperator::Identity(_) => {
                for i in 0..n {
                    d[i * n + i] = 1.0;
                }
            }
            BOperator::Tridiagonal(t) => {
                for i in 0..n {
                    d[i * n + i] = t.diag[i];
                    if i + 1 < n {
                        d[i * n + i + 1] = t.off[i];
                        d[(i + 1) * n + i] = t.off[i];
                    }
                }
            }
            BOperator::General { matrix, .. } => d = matrix.to_dense(),
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn apply_examples() {
        let a = SparseSymMatrix::diagonal(&[1.0, 3.0]);
        assert_eq!(a.apply(&[1.0, 1.0]).unwrap(), vec![1.0, 3.0]);
        assert_eq!(a.apply(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let p = SparseSymMatrix::from_dense(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(p.apply(&[2.0, 5.0]).unwrap(), vec![5.0, 2.0]);
        assert!(matches!(
            p.apply(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn counted_apply_increments_by_one() {
        let a = SparseSymMatrix::identity(3);
        let c = MvCounter::new();
        a.apply_counted(&[1.0, 2.0, 3.0], &c).unwrap();
        a.apply_counted(&[1.0, 2.0, 3.0], &c).unwrap();
        assert_eq!(c.get(), 2);
    }

    #[test]
    fn rejects_asymmetric_and_out_of_range() {
        assert!(matches!(
            SparseSymMatrix::from_triplets(2, &[(0, 1, 1.0)]),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(matches!(
            SparseSymMatrix::from_triplets(2, &[(0, 2, 1.0)]),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn duplicates_are_summed() {
        let a = SparseSymMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn general_plus_transpose() {
        // G = [[1,2],[0,1]] -> A = [[2,2],[2,2]]
        let a = SparseSymMatrix::from_general_plus_transpose(2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 1, 1.0)])
            .unwrap();
        assert_eq!(a.to_dense(), vec![2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn ones_norm_is_max_column_sum() {
        let a = SparseSymMatrix::from_dense(2, &[1.0, -2.0, -2.0, 0.5]).unwrap();
        assert_eq!(a.ones_norm(), 3.0);
    }

    #[test]
    fn b_solve_examples() {
        let id = BOperator::identity(2);
        assert_eq!(id.solve(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        let b1 = BOperator::constant_tridiagonal(1, 1.0, 3.0).unwrap();
        assert_eq!(b1.solve(&[6.0]).unwrap(), vec![2.0]);
        let b3 = BOperator::constant_tridiagonal(3, 1.0, 3.0).unwrap();
        let rhs = b3.apply(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(rhs, vec![4.0, 5.0, 4.0]);
        let x = b3.solve(&rhs).unwrap();
        for xi in x {
            assert!((xi - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn b_norm_examples() {
        assert_eq!(BOperator::identity(2).norm(&[3.0, 4.0]).unwrap(), 5.0);
        let b = BOperator::constant_tridiagonal(1, 1.0, 3.0).unwrap();
        assert!((b.norm(&[2.0]).unwrap() - 12f64.sqrt()).abs() < 1e-15);
        assert!((b.inv_norm(&[2.0]).unwrap() - 2.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn non_spd_rejected_at_construction() {
        assert!(matches!(
            BOperator::constant_tridiagonal(3, 2.0, 1.0),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let m = SparseSymMatrix::from_dense(2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            BOperator::general(m),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> SparseSymMatrix {
        // banded, diagonally dominant, with a couple of long-range couplings
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 6.0 + rng.random::<f64>()));
            for d in [1usize, 3] {
                if i + d < n {
                    let v = rng.random::<f64>() - 0.5;
                    t.push((i, i + d, v));
                    t.push((i + d, i, v));
                }
            }
        }
        SparseSymMatrix::from_triplets(n, &t).unwrap()
    }

    #[test]
    fn solve_inverts_apply_on_random_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ops = vec![
            BOperator::identity(12),
            BOperator::constant_tridiagonal(12, 1.0, 3.0).unwrap(),
            BOperator::general(random_spd(12, &mut rng)).unwrap(),
        ];
        for b in &ops {
            for _ in 0..100 {
                let x: Vec<f64> = (0..12).map(|_| rng.random::<f64>() - 0.5).collect();
                let y = b.solve(&b.apply(&x).unwrap()).unwrap();
                let err = crate::vecops::norm2(&crate::vecops::sub(&x, &y));
                assert!(err <= 1e-12 * crate::vecops::norm2(&x));
            }
        }
    }

    #[test]
    fn general_solve_residual_is_tiny() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_spd(40, &mut rng);
        let b = BOperator::general(m).unwrap();
        let v: Vec<f64> = (0..40).map(|_| rng.random::<f64>()).collect();
        let w = b.solve(&v).unwrap();
        let r = crate::vecops::sub(&b.apply(&w).unwrap(), &v);
        assert!(crate::vecops::norm2(&r) <= 1e-13 * crate::vecops::norm2(&v));
    }
}
