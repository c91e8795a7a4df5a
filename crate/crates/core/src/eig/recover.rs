//! Recovering the TRS solution from an eigenvector of `(M, B̃)`.

use crate::error::{check_len, Error, Result};
use crate::problem::TrsProblem;
use crate::vecops::{dot, norm2, scaled};

/// Eigenvector `y = (y₁; y₂)` of `(M, B̃)`, length `2n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigVector {
    y: Vec<f64>,
}

impl EigVector {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.len() % 2 != 0 || y.is_empty() {
            return Err(Error::InvalidProblem(format!("eigenvector length {} is not 2n", y.len())));
        }
        Ok(Self { y })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn y1(&self) -> &[f64] {
        &self.y[..self.y.len() / 2]
    }

    pub fn y2(&self) -> &[f64] {
        &self.y[self.y.len() / 2..]
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Recovery {
    Solution(Vec<f64>),
    /// `‖y₁‖ ≤ τ`.
    HardCase { y1_norm: f64 },
}

/// `ŝ = −sign(gᵀy₂) Δ y₁ / ‖y₁‖_B`, or a hard-case signal when `‖y₁‖₂ ≤ τ`.
///
/// When `gᵀy₂` vanishes the sign is taken from `gᵀy₁`, then from the first
/// nonzero entry of `y₁`; every choice flips together with `y`.
pub fn recover_solution(y: &EigVector, p: &TrsProblem, tau: f64) -> Result<Recovery> {
    check_len(2 * p.dim(), y.y().len())?;
    let y1 = y.y1();
    let y1_norm = norm2(y1);
    if y1_norm <= tau {
        return Ok(Recovery::HardCase { y1_norm });
    }
    let y1_b = p.b.norm(y1)?;
    let mut key = dot(&p.g, y.y2());
    if key == 0.0 {
        key = dot(&p.g, y1);
    }
    if key == 0.0 {
        key = -y1.iter().copied().find(|v| *v != 0.0).unwrap_or(1.0);
    }
    let sign = if key > 0.0 { 1.0 } else { -1.0 };
    Ok(Recovery::Solution(scaled(-sign * p.delta / y1_b, y1)))
}

/// `tol₁ = Δ·tol / ‖ŷ₁‖_B`; meaningless (hard case) when `‖ŷ₁‖_B ≤ τ`.
pub fn translate_tolerance(tol: f64, delta: f64, y1_bnorm: f64, tau: f64) -> Result<f64> {
    if y1_bnorm <= tau {
        return Err(Error::HardCase { y1_norm: y1_bnorm, tau });
    }
    Ok(delta * tol / y1_bnorm)
}
