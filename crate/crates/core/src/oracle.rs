//! Dense reference solutions for small problems.
//!
//! Everything here goes through `nalgebra` factorizations so that it shares
//! no code with the iterative solvers it is used to check.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problem::TrsProblem;
use crate::sparse::{BOperator, SparseSymMatrix};

/// Largest dimension the dense routines accept.
pub const ORACLE_MAX_DIM: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KktCase {
    Interior,
    Boundary,
    HardCase,
}

#[derive(Debug, Clone)]
pub struct DenseKktSolution {
    pub s_opt: Vec<f64>,
    pub lambda_opt: f64,
    pub case_tag: KktCase,
    /// Leftmost eigenvalue of the pencil `(A, B)`.
    pub alpha_n: f64,
    /// Hard-case coefficient of `u_n` (zero otherwise).
    pub eta: f64,
    /// B-normalized eigenvector for `alpha_n`.
    pub u_n: Vec<f64>,
}

pub fn dense_a(a: &SparseSymMatrix) -> DMatrix<f64> {
    let n = a.dim();
    DMatrix::from_row_slice(n, n, &a.to_dense())
}

pub fn dense_b(b: &BOperator) -> DMatrix<f64> {
    let n = b.dim();
    DMatrix::from_row_slice(n, n, &b.to_dense())
}

fn check_size(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::InvalidProblem(format!("dense oracle limited to n ≤ {cap}, got {n}")));
    }
    Ok(())
}

fn cholesky_lower(b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    b.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or(Error::NotPositiveDefinite { index: 0, pivot: f64::NAN })
}

/// Solves the TRS by reducing `(A, B)` to a standard symmetric eigenproblem
/// and bisecting on the secular equation.
pub fn oracle_solve_trs(p: &TrsProblem) -> Result<DenseKktSolution> {
    let n = p.dim();
    check_size(n, ORACLE_MAX_DIM)?;
    let a = dense_a(&p.a);
    let l = cholesky_lower(&dense_b(&p.b))?;
    let l_inv = l.clone().try_inverse().ok_or(Error::NotPositiveDefinite { index: 0, pivot: 0.0 })?;
    let c = &l_inv * &a * l_inv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let alphas = eig.eigenvalues.clone();
    let q = eig.eigenvectors.clone();
    let g_t = &l_inv * DVector::from_column_slice(&p.g);
    let gamma = q.transpose() * &g_t;
    let delta = p.delta;

    let imin = (0..n).min_by(|&i, &j| alphas[i].partial_cmp(&alphas[j]).unwrap()).unwrap();
    let alpha_n = alphas[imin];
    let scale = alphas.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let in_eigspace: Vec<bool> = (0..n).map(|i| (alphas[i] - alpha_n).abs() <= 1e-10 * scale).collect();
    let back = |x: &DVector<f64>| -> Vec<f64> { (l_inv.transpose() * x).iter().copied().collect() };
    let u_n = back(&q.column(imin).into_owned());

    let x_of = |lambda: f64| -> DVector<f64> {
        DVector::from_fn(n, |i, _| -gamma[i] / (alphas[i] + lambda))
    };

    if alpha_n > 0.0 {
        let x0 = x_of(0.0);
        if x0.norm() < delta {
            return Ok(DenseKktSolution {
                s_opt: back(&(&q * x0)),
                lambda_opt: 0.0,
                case_tag: KktCase::Interior,
                alpha_n,
                eta: 0.0,
                u_n,
            });
        }
    }

    let g_norm = g_t.norm();
    let proj: f64 = (0..n).filter(|&i| in_eigspace[i]).map(|i| gamma[i] * gamma[i]).sum::<f64>().sqrt();
    let lo0 = (-alpha_n).max(0.0);
    if proj <= 1e-12 * g_norm && alpha_n <= 0.0 {
        let xp = DVector::from_fn(n, |i, _| if in_eigspace[i] { 0.0 } else { -gamma[i] / (alphas[i] - alpha_n) });
        let xp_norm = xp.norm();
        if xp_norm <= delta {
            let eta = (delta * delta - xp_norm * xp_norm).max(0.0).sqrt();
            let mut x = xp;
            x[imin] += eta;
            return Ok(DenseKktSolution {
                s_opt: back(&(&q * x)),
                lambda_opt: lo0,
                case_tag: KktCase::HardCase,
                alpha_n,
                eta,
                u_n,
            });
        }
    }

    let norm_at = |lambda: f64| -> f64 {
        (0..n)
            .map(|i| {
                let d = alphas[i] + lambda;
                if d <= 0.0 {
                    f64::INFINITY
                } else {
                    (gamma[i] / d).powi(2)
                }
            })
            .sum::<f64>()
            .sqrt()
    };
    let mut lo = lo0;
    let mut hi = lo0 + gamma.norm() / delta + 1.0;
    while norm_at(hi) > delta {
        hi = 2.0 * hi + 1.0;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if norm_at(mid) > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let mut x = x_of(lambda);
    // put the solution exactly on the sphere
    let xn = x.norm();
    if xn > 0.0 && xn.is_finite() {
        x *= delta / xn;
    }
    Ok(DenseKktSolution {
        s_opt: back(&(&q * x)),
        lambda_opt: lambda,
        case_tag: KktCase::Boundary,
        alpha_n,
        eta: 0.0,
        u_n,
    })
}

/// Dense `M = [[-A, ggᵀ/Δ²], [B, -A]]` and `B̃ = diag(B, B)`.
pub fn dense_pair(p: &TrsProblem) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = p.dim();
    let a = dense_a(&p.a);
    let b = dense_b(&p.b);
    let g = DVector::from_column_slice(&p.g);
    let ggt = &g * g.transpose() / (p.delta * p.delta);
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&(-&a));
    m.view_mut((0, n), (n, n)).copy_from(&ggt);
    m.view_mut((n, 0), (n, n)).copy_from(&b);
    m.view_mut((n, n), (n, n)).copy_from(&(-&a));
    let mut bt = DMatrix::zeros(2 * n, 2 * n);
    bt.view_mut((0, 0), (n, n)).copy_from(&b);
    bt.view_mut((n, n), (n, n)).copy_from(&b);
    (m, bt)
}

/// Rightmost eigenvalue of `(M, B̃)` and a `B̃`-normalized eigenvector.
pub fn oracle_rightmost_eigpair(p: &TrsProblem) -> Result<(f64, Vec<f64>)> {
    let n = p.dim();
    check_size(n, 100)?;
    let (m, bt) = dense_pair(p);
    let l = cholesky_lower(&bt)?;
    let l_inv = l.try_inverse().ok_or(Error::NotPositiveDefinite { index: 0, pivot: 0.0 })?;
    let nmat = &l_inv * &m * l_inv.transpose();
    let vals = nmat.complex_eigenvalues();
    let mu = vals.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
    let shifted = &nmat - DMatrix::identity(2 * n, 2 * n) * mu;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let imin = (0..2 * n)
        .min_by(|&i, &j| svd.singular_values[i].partial_cmp(&svd.singular_values[j]).unwrap())
        .unwrap();
    let w: DVector<f64> = v_t.row(imin).transpose();
    let y = l_inv.transpose() * w;
    Ok((mu, y.iter().copied().collect()))
}

/// Dense `B^{1/2}` and `B^{-1/2}` from the spectral decomposition.
pub fn oracle_b_sqrt(b: &BOperator) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_size(b.dim(), 100)?;
    let eig = dense_b(b).symmetric_eigen();
    if eig.eigenvalues.iter().any(|&v| v <= 0.0) {
        return Err(Error::NotPositiveDefinite { index: 0, pivot: eig.eigenvalues.min() });
    }
    let q = &eig.eigenvectors;
    let sqrt = q * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * q.transpose();
    let inv_sqrt = q * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt())) * q.transpose();
    Ok((sqrt, inv_sqrt))
}

/// Leftmost eigenvalue and 1-norm of the dense symmetric `A + λB`.
pub fn shifted_leftmost(p: &TrsProblem, lambda: f64) -> (f64, f64) {
    let m = dense_a(&p.a) + dense_b(&p.b) * lambda;
    let norm1 = (0..m.ncols()).map(|j| m.column(j).abs().sum()).fold(0.0, f64::max);
    (m.symmetric_eigenvalues().min(), norm1)
}

/// The four optimality conditions of a candidate `(λ, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    pub lambda: f64,
    pub s_bnorm: f64,
    /// `|λ(Δ − ‖s‖_B)|`.
    pub complementarity: f64,
    pub leftmost: f64,
    pub shifted_norm1: f64,
    /// `‖(A + λB)s + g‖_{B⁻¹}`.
    pub stationarity: f64,
}

pub fn kkt_report(p: &TrsProblem, lambda: f64, s: &[f64]) -> Result<KktReport> {
    let s_bnorm = p.b.norm(s)?;
    let (leftmost, shifted_norm1) = shifted_leftmost(p, lambda);
    Ok(KktReport {
        lambda,
        s_bnorm,
        complementarity: (lambda * (p.delta - s_bnorm)).abs(),
        leftmost,
        shifted_norm1,
        stationarity: p.kkt_residual(lambda, s)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(a: &[f64], g: &[f64], delta: f64) -> TrsProblem {
        TrsProblem::new(SparseSymMatrix::diagonal(a), BOperator::identity(a.len()), g.to_vec(), delta).unwrap()
    }

    #[test]
    fn interior_example() {
        let o = oracle_solve_trs(&diag(&[2.0, 4.0], &[2.0, 4.0], 2.0)).unwrap();
        assert_eq!(o.case_tag, KktCase::Interior);
        assert_eq!(o.lambda_opt, 0.0);
        assert!((o.s_opt[0] + 1.0).abs() < 1e-14 && (o.s_opt[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_boundary_example() {
        let o = oracle_solve_trs(&diag(&[-1.0], &[1.0], 1.0)).unwrap();
        assert_eq!(o.case_tag, KktCase::Boundary);
        assert!((o.lambda_opt - 2.0).abs() < 1e-12);
        assert!((o.s_opt[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn hard_case_example() {
        let p = diag(&[-2.0, 1.0], &[0.0, 1.0], 1.0);
        let o = oracle_solve_trs(&p).unwrap();
        assert_eq!(o.case_tag, KktCase::HardCase);
        assert!((o.lambda_opt - 2.0).abs() < 1e-14);
        assert!((o.s_opt[0].abs() - 8f64.sqrt() / 3.0).abs() < 1e-14);
        assert!((o.s_opt[1] + 1.0 / 3.0).abs() < 1e-14);
        assert!((p.objective(&o.s_opt) + 7.0 / 6.0).abs() < 1e-14);
        let k = kkt_report(&p, o.lambda_opt, &o.s_opt).unwrap();
        assert!(k.stationarity < 1e-14 && k.leftmost > -1e-14 && (k.s_bnorm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rightmost_eigpair_scalar() {
        let (mu, y) = oracle_rightmost_eigpair(&diag(&[-1.0], &[1.0], 1.0)).unwrap();
        assert!((mu - 2.0).abs() < 1e-14);
        let r = 1.0 / 2f64.sqrt();
        assert!((y[0].abs() - r).abs() < 1e-14 && (y[1].abs() - r).abs() < 1e-14);
        assert!(y[0] * y[1] > 0.0);
    }

    #[test]
    fn b_sqrt_examples() {
        let (s, si) = oracle_b_sqrt(&BOperator::identity(3)).unwrap();
        assert!((s - DMatrix::identity(3, 3)).norm() < 1e-15);
        assert!((si - DMatrix::identity(3, 3)).norm() < 1e-15);
        let (s, _) = oracle_b_sqrt(&BOperator::constant_tridiagonal(1, 0.0, 4.0).unwrap()).unwrap();
        assert!((s[(0, 0)] - 2.0).abs() < 1e-15);
        let b = BOperator::constant_tridiagonal(3, 1.0, 3.0).unwrap();
        let (s, si) = oracle_b_sqrt(&b).unwrap();
        let d = dense_b(&b);
        assert!((&s * &s - &d).abs().max() <= 1e-11 * d.abs().max());
        assert!((&si * &s - DMatrix::identity(3, 3)).abs().max() < 1e-12);
    }
}
