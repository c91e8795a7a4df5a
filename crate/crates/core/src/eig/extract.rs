//! Ritz and refined Ritz extraction from an Arnoldi factorization.

use num_complex::Complex64;

use super::arnoldi::{combine, ArnoldiState};
use crate::dense::{hessenberg_eig, smallest_singular_triplet};
use crate::error::{Error, Result};
use crate::problem::PairOperator;

#[derive(Debug, Clone, PartialEq)]
pub struct RitzPair {
    pub mu: Complex64,
    /// Unit coordinate vector in the Arnoldi basis.
    pub z: Vec<Complex64>,
    /// `h_{k+1,k}|e_kᵀz|`.
    pub residual_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinedPair {
    pub mu: Complex64,
    pub z_tilde: Vec<Complex64>,
    /// `σ_min(H̃_k − μĨ)`.
    pub residual_estimate: f64,
}

/// All Ritz pairs, rightmost first, conjugates adjacent.
pub fn extract_ritz(state: &ArnoldiState) -> Result<Vec<RitzPair>> {
    if state.k() == 0 {
        return Err(Error::InvalidConfig("no Arnoldi steps taken".into()));
    }
    let beta = state.beta();
    Ok(hessenberg_eig(&state.hessenberg())?
        .into_iter()
        .map(|p| {
            let last = p.vector.last().map_or(0.0, |c| c.norm());
            RitzPair { mu: p.value, residual_estimate: beta * last, z: p.vector }
        })
        .collect())
}

/// Refined vector for the target `mu`.
pub fn extract_refined(state: &ArnoldiState, mu: Complex64) -> Result<RefinedPair> {
    if state.k() == 0 {
        return Err(Error::InvalidConfig("no Arnoldi steps taken".into()));
    }
    let t = smallest_singular_triplet(&state.hessenberg().extended(), mu);
    Ok(RefinedPair { mu, z_tilde: t.vector, residual_estimate: t.sigma })
}

/// Real and imaginary parts of `V z`.
pub fn assemble_vector(state: &ArnoldiState, z: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let re: Vec<f64> = z.iter().map(|c| c.re).collect();
    let im: Vec<f64> = z.iter().map(|c| c.im).collect();
    (combine(state.basis(), &re), combine(state.basis(), &im))
}

/// Directly computed `‖(M − μB̃) V z‖_{B̃⁻¹}` for complex `μ` and `z`; not counted.
pub fn direct_residual(op: &PairOperator<'_>, state: &ArnoldiState, mu: Complex64, z: &[Complex64]) -> Result<f64> {
    let (yr, yi) = assemble_vector(state, z);
    let mut rr = op.apply_m_uncounted(&yr)?;
    let mut ri = op.apply_m_uncounted(&yi)?;
    let br = op.apply_btilde(&yr)?;
    let bi = op.apply_btilde(&yi)?;
    for i in 0..rr.len() {
        rr[i] -= mu.re * br[i] - mu.im * bi[i];
        ri[i] -= mu.re * bi[i] + mu.im * br[i];
    }
    Ok(op.btilde_inv_norm(&rr)?.hypot(op.btilde_inv_norm(&ri)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{PairOperator, TrsProblem};
    use crate::sparse::{BOperator, SparseSymMatrix};

    #[test]
    fn scalar_examples() {
        let p = TrsProblem::new(SparseSymMatrix::diagonal(&[-1.0]), BOperator::identity(1), vec![1.0], 1.0).unwrap();
        let op = PairOperator::new(&p);
        let mut st = ArnoldiState::new(&op, &[1.0, 0.0], 4).unwrap();
        st.step(&op).unwrap();
        let ritz = extract_ritz(&st).unwrap();
        assert_eq!(ritz.len(), 1);
        assert_eq!(ritz[0].mu, Complex64::new(1.0, 0.0));
        assert_eq!(ritz[0].residual_estimate, 1.0);
        let refined = extract_refined(&st, ritz[0].mu).unwrap();
        assert!((refined.residual_estimate - 1.0).abs() < 1e-15);

        st.step(&op).unwrap();
        let ritz = extract_ritz(&st).unwrap();
        assert!((ritz[0].mu.re - 2.0).abs() < 1e-14);
        let r = 1.0 / 2f64.sqrt();
        assert!((ritz[0].z[0].re - r).abs() < 1e-14 && (ritz[0].z[1].re - r).abs() < 1e-14);
        assert_eq!(ritz[0].residual_estimate, 0.0);
        assert_eq!(extract_refined(&st, ritz[0].mu).unwrap().residual_estimate < 1e-14, true);
    }
}
