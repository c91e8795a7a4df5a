//! Seeded random problem instances for tests and benchmarks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::oracle::{dense_a, dense_b};
use crate::problem::TrsProblem;
use crate::sparse::{BOperator, SparseSymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BKind {
    Identity,
    /// `tridiag(1, 3, 1)`.
    Tridiag131,
}

impl BKind {
    pub fn build(self, n: usize) -> Result<BOperator> {
        match self {
            BKind::Identity => Ok(BOperator::identity(n)),
            BKind::Tridiag131 => BOperator::constant_tridiagonal(n, 1.0, 3.0),
        }
    }
}

pub fn normal_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn unit_normal_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v = normal_vec(rng, n);
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
    v
}

/// Dense symmetric `G + Gᵀ`; when `definite`, shifted by its ∞-norm plus a
/// random margin so it is positive definite.
pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize, definite: bool) -> SparseSymMatrix {
    let g = normal_vec(rng, n * n);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = g[i * n + j] + g[j * n + i];
        }
    }
    if definite {
        let inf = (0..n).map(|i| (0..n).map(|j| a[i * n + j].abs()).sum::<f64>()).fold(0.0, f64::max);
        let shift = inf + 0.1 + rng.random::<f64>();
        for i in 0..n {
            a[i * n + i] += shift;
        }
    }
    SparseSymMatrix::from_dense(n, &a).expect("symmetric by construction")
}

/// Random instance with unit-length Gaussian `g`.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, n: usize, definite: bool, b: BKind, delta: f64) -> Result<TrsProblem> {
    let a = random_symmetric(rng, n, definite);
    let g = unit_normal_vec(rng, n);
    TrsProblem::new(a, b.build(n)?, g, delta)
}

/// Hard-case instance: indefinite `A`, `g` deflated against the leftmost
/// eigenvector of `(A, B)` and `Δ` set to `radius_factor·‖(A − α_nB)†g‖_B`
/// (`radius_factor > 1`).
pub fn hard_case_instance<R: Rng + ?Sized>(rng: &mut R, n: usize, b: BKind, radius_factor: f64) -> Result<TrsProblem> {
    assert!(n >= 2 && radius_factor > 1.0);
    let a = random_symmetric(rng, n, false);
    let bop = b.build(n)?;
    let ad = dense_a(&a);
    let bd = dense_b(&bop);
    let l = bd.clone().cholesky().expect("B is SPD").l();
    let l_inv = l.try_inverse().expect("triangular factor is invertible");
    let c = &l_inv * &ad * l_inv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let imin = eig.eigenvalues.imin();
    let alpha_n = eig.eigenvalues[imin];
    let u = l_inv.transpose() * eig.eigenvectors.column(imin);
    let mut g = DVector::from_vec(normal_vec(rng, n));
    let bu = &bd * &u;
    let c0 = u.dot(&g);
    g -= &bu * c0;
    g /= g.norm();
    // ‖(A − α_n B)†g‖_B in the transformed coordinates
    let gt = &l_inv * &g;
    let gamma = eig.eigenvectors.transpose() * gt;
    let mut x2 = 0.0;
    for i in 0..n {
        if i != imin {
            x2 += (gamma[i] / (eig.eigenvalues[i] - alpha_n)).powi(2);
        }
    }
    let delta = radius_factor * x2.sqrt();
    TrsProblem::new(a, bop, g.iter().copied().collect(), delta)
}

/// Dense symmetric matrix with prescribed spectrum `eigs` and random eigenvectors.
pub fn with_spectrum<R: Rng + ?Sized>(rng: &mut R, eigs: &[f64]) -> SparseSymMatrix {
    let n = eigs.len();
    let g: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let q = g.qr().q();
    let a: DMatrix<f64> = &q * DMatrix::from_diagonal(&DVector::from_column_slice(eigs)) * q.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let mut dense = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dense[i * n + j] = a[(i, j)];
        }
    }
    SparseSymMatrix::from_dense(n, &dense).expect("symmetrized")
}
