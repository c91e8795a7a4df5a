//! Arnoldi process for `B̃⁻¹M` in the `B̃` inner product.

use crate::dense::{Hessenberg, Mat};
use crate::error::{check_len, Error, Result};
use crate::problem::PairOperator;
use crate::vecops::{axpy, dot, scaled, sqrt_clamped};

/// `M V_k = B̃ V_k H_k + h_{k+1,k} B̃ v_{k+1} e_kᵀ`.
///
/// The residual is kept as the unit vector `v_{k+1}` and the coefficient
/// `beta = h_{k+1,k}`.
#[derive(Debug, Clone)]
pub struct ArnoldiState {
    basis: Vec<Vec<f64>>,
    b_basis: Vec<Vec<f64>>,
    h: Mat,
    next: Option<(Vec<f64>, Vec<f64>)>,
    beta: f64,
    capacity: usize,
    breakdown_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArnoldiOutcome {
    Continue,
    Breakdown,
}

impl ArnoldiState {
    /// Starts from `v1` (normalized here in the `B̃` norm); at most `capacity` steps.
    pub fn new(op: &PairOperator<'_>, v1: &[f64], capacity: usize) -> Result<Self> {
        let n2 = 2 * op.n();
        check_len(n2, v1.len())?;
        if capacity == 0 {
            return Err(Error::InvalidConfig("Arnoldi capacity must be positive".into()));
        }
        let bv = op.apply_btilde(v1)?;
        let nrm = sqrt_clamped(dot(v1, &bv));
        if nrm == 0.0 {
            return Err(Error::InvalidConfig("starting vector is zero".into()));
        }
        Ok(Self {
            basis: Vec::with_capacity(capacity),
            b_basis: Vec::with_capacity(capacity),
            h: Mat::zeros(capacity, capacity),
            next: Some((scaled(1.0 / nrm, v1), scaled(1.0 / nrm, &bv))),
            beta: 0.0,
            capacity,
            breakdown_tol: f64::EPSILON * n2 as f64 * op.one_norm(),
        })
    }

    pub fn k(&self) -> usize {
        self.basis.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// `B̃ v_j` for each basis vector.
    pub fn b_basis(&self) -> &[Vec<f64>] {
        &self.b_basis
    }

    /// `h_{k+1,k}`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn next_vector(&self) -> Option<&[f64]> {
        self.next.as_ref().map(|(v, _)| v.as_slice())
    }

    pub(crate) fn next_b(&self) -> Option<&[f64]> {
        self.next.as_ref().map(|(_, b)| b.as_slice())
    }

    /// Square `H_k`.
    pub fn h_square(&self) -> Mat {
        let k = self.k();
        self.h.block(0, k, 0, k)
    }

    pub fn hessenberg(&self) -> Hessenberg {
        Hessenberg::new(self.h_square(), Some(self.beta)).expect("Arnoldi keeps Hessenberg form")
    }

    /// One Arnoldi step; charges one application of `M` (two MVs).
    pub fn step(&mut self, op: &PairOperator<'_>) -> Result<ArnoldiOutcome> {
        if self.k() >= self.capacity {
            return Err(Error::InvalidConfig("Arnoldi factorization is full".into()));
        }
        let (v, bv) = match self.next.take() {
            Some(pair) => pair,
            None => return Ok(ArnoldiOutcome::Breakdown),
        };
        let j = self.k();
        if j > 0 {
            self.h[(j, j - 1)] = self.beta;
        }
        let mut bw = op.apply_m(&v)?;
        self.basis.push(v);
        self.b_basis.push(bv);
        let mut w = op.solve_btilde(&bw)?;
        // modified Gram–Schmidt plus one full reorthogonalization pass
        for _ in 0..2 {
            for i in 0..=j {
                let c = dot(&self.b_basis[i], &w);
                axpy(-c, &self.basis[i], &mut w);
                axpy(-c, &self.b_basis[i], &mut bw);
                self.h[(i, j)] += c;
            }
        }
        let beta = sqrt_clamped(dot(&w, &bw));
        if beta <= self.breakdown_tol || self.k() == 2 * op.n() {
            self.beta = 0.0;
            return Ok(ArnoldiOutcome::Breakdown);
        }
        self.beta = beta;
        self.next = Some((scaled(1.0 / beta, &w), scaled(1.0 / beta, &bw)));
        Ok(ArnoldiOutcome::Continue)
    }

    /// After a breakdown, continues the factorization from `fresh`, made
    /// `B̃`-orthogonal to the current basis; `h_{k+1,k}` stays zero.
    pub fn inject(&mut self, op: &PairOperator<'_>, fresh: &[f64]) -> Result<bool> {
        let mut w = fresh.to_vec();
        let mut bw = op.apply_btilde(&w)?;
        for _ in 0..2 {
            for i in 0..self.k() {
                let c = dot(&self.b_basis[i], &w);
                axpy(-c, &self.basis[i], &mut w);
                axpy(-c, &self.b_basis[i], &mut bw);
            }
        }
        let nrm = sqrt_clamped(dot(&w, &bw));
        if nrm <= self.breakdown_tol {
            return Ok(false);
        }
        self.beta = 0.0;
        self.next = Some((scaled(1.0 / nrm, &w), scaled(1.0 / nrm, &bw)));
        Ok(true)
    }

    /// `V z` for real coordinates.
    pub fn combine(&self, z: &[f64]) -> Vec<f64> {
        combine(&self.basis, z)
    }

    /// `B̃ V z` from the stored images.
    pub fn combine_b(&self, z: &[f64]) -> Vec<f64> {
        combine(&self.b_basis, z)
    }

    /// Replaces the factorization after a restart (crate-internal).
    pub(crate) fn replace(
        &mut self,
        basis: Vec<Vec<f64>>,
        b_basis: Vec<Vec<f64>>,
        h: &Mat,
        next: Option<(Vec<f64>, Vec<f64>)>,
        beta: f64,
    ) {
        let k = basis.len();
        self.h = Mat::zeros(self.capacity, self.capacity);
        for j in 0..k {
            for i in 0..k {
                self.h[(i, j)] = h[(i, j)];
            }
        }
        self.basis = basis;
        self.b_basis = b_basis;
        self.next = next;
        self.beta = beta;
    }

    /// Normalizes `w` given its `B̃` image; `None` if it is negligible.
    pub(crate) fn normalize_residual(&self, w: Vec<f64>, bw: Vec<f64>) -> (Option<(Vec<f64>, Vec<f64>)>, f64) {
        let beta = sqrt_clamped(dot(&w, &bw));
        if beta <= self.breakdown_tol {
            return (None, 0.0);
        }
        (Some((scaled(1.0 / beta, &w), scaled(1.0 / beta, &bw))), beta)
    }
}

pub(crate) fn combine(vs: &[Vec<f64>], z: &[f64]) -> Vec<f64> {
    let n = vs.first().map_or(0, |v| v.len());
    let mut out = vec![0.0; n];
    for (v, &c) in vs.iter().zip(z) {
        axpy(c, v, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::TrsProblem;
    use crate::sparse::{BOperator, SparseSymMatrix};

    fn scalar_problem() -> TrsProblem {
        TrsProblem::new(SparseSymMatrix::diagonal(&[-1.0]), BOperator::identity(1), vec![1.0], 1.0).unwrap()
    }

    #[test]
    fn scalar_example() {
        let p = scalar_problem();
        let op = PairOperator::new(&p);
        let mut st = ArnoldiState::new(&op, &[1.0, 0.0], 4).unwrap();
        assert_eq!(st.step(&op).unwrap(), ArnoldiOutcome::Continue);
        assert_eq!(st.h_square()[(0, 0)], 1.0);
        assert_eq!(st.beta(), 1.0);
        assert_eq!(st.next_vector().unwrap(), &[0.0, 1.0]);
        assert_eq!(st.step(&op).unwrap(), ArnoldiOutcome::Breakdown);
        assert_eq!(st.h_square(), Mat::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]));
        assert_eq!(st.beta(), 0.0);
        assert_eq!(op.mv_count(), 4);
    }

    #[test]
    fn eigenvector_start_breaks_down_immediately() {
        let p = scalar_problem();
        let op = PairOperator::new(&p);
        let r = 1.0 / 2f64.sqrt();
        let mut st = ArnoldiState::new(&op, &[r, r], 4).unwrap();
        assert_eq!(st.step(&op).unwrap(), ArnoldiOutcome::Breakdown);
        assert!((st.h_square()[(0, 0)] - 2.0).abs() < 1e-15);
    }
}
