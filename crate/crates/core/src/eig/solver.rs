//! TRS solvers built on the rightmost eigenpair of `(M, B̃)`.

use log::{debug, warn};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::arnoldi::{ArnoldiOutcome, ArnoldiState};
use super::extract::{assemble_vector, extract_refined, extract_ritz};
use super::recover::{recover_solution, translate_tolerance, EigVector, Recovery};
use super::restart::implicit_restart;
use super::shifts::{select_shifts_exact, select_shifts_refined};
use crate::error::{Error, Result};
use crate::gltr::{interior_check, InteriorOutcome};
use crate::problem::{PairOperator, Status, TrsProblem, TrsSolution};
use crate::sparse::MvCounter;
use crate::vecops::{dot, scaled, sqrt_clamped};

/// How many shifts each restart applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftRule {
    /// `m − 4`: three extra Ritz values stay in the subspace as a buffer.
    #[default]
    Buffered,
    /// `m − 1`: everything but the wanted value.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingConfig {
    pub tol: f64,
    pub tau: f64,
    pub m: usize,
    pub max_restarts: usize,
    pub shift_rule: ShiftRule,
    pub seed: u64,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            tau: f64::EPSILON.sqrt(),
            m: 30,
            max_restarts: 600,
            shift_rule: ShiftRule::Buffered,
            seed: 0,
        }
    }
}

impl StoppingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidConfig(format!("tau must be positive, got {}", self.tau)));
        }
        if self.m < 5 {
            return Err(Error::InvalidConfig(format!("subspace dimension must be at least 5, got {}", self.m)));
        }
        Ok(())
    }

    fn shift_count(&self, k: usize) -> usize {
        let p = match self.shift_rule {
            ShiftRule::Buffered => k.saturating_sub(4),
            ShiftRule::Full => k.saturating_sub(1),
        };
        p.min(k.saturating_sub(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Exact shifts, Ritz extraction.
    Ira,
    /// Refined shifts, refined Ritz extraction.
    Irra,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Ira => "TRS_IRA",
            Variant::Irra => "TRS_IRRA",
        }
    }
}

/// Estimates seen at the end of one Arnoldi cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub k: usize,
    pub mu: Complex64,
    pub ritz_estimate: f64,
    pub refined_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct EigReport {
    pub mu: f64,
    /// `B̃`-normalized approximate eigenvector.
    pub y: Vec<f64>,
    pub y1_bnorm: f64,
    /// `Δ·tol/‖ŷ₁‖_B`, or `None` in the hard case.
    pub translated_tol1: Option<f64>,
    /// Directly computed `‖(M − μB̃)y‖_{B̃⁻¹}`.
    pub eig_residual: f64,
    pub restarts: usize,
    pub arnoldi_steps: usize,
    pub cycles: Vec<CycleRecord>,
}

#[derive(Debug, Clone)]
pub struct EigSolveResult {
    pub solution: TrsSolution,
    /// `None` when the interior check settled the problem.
    pub report: Option<EigReport>,
}

fn seeded_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// IRA / IRRA for the TRS: interior CG check, then the rightmost eigenpair
/// of `(M, B̃)` and recovery of `ŝ`.
pub fn eig_trs_solve(p: &TrsProblem, cfg: &StoppingConfig, variant: Variant) -> Result<EigSolveResult> {
    cfg.validate()?;
    let n = p.dim();
    let cg_counter = MvCounter::new();
    match interior_check(p, cfg.tol, 10 * n, &cg_counter)? {
        InteriorOutcome::Interior(sol) | InteriorOutcome::MaxIterations(sol) => {
            return Ok(EigSolveResult { solution: sol, report: None })
        }
        InteriorOutcome::Boundary => {}
    }
    let cg_mvs = cg_counter.get();
    let op = PairOperator::new(p);
    let norm_m = op.one_norm();
    let m = cfg.m.min(2 * n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let v1 = seeded_vector(&mut rng, 2 * n);
    let mut state = ArnoldiState::new(&op, &v1, m)?;
    let mut steps = 0usize;
    let mut restarts = 0usize;
    let mut cycles = Vec::new();

    loop {
        let mut broke_down = false;
        while state.k() < m {
            steps += 1;
            if state.step(&op)? == ArnoldiOutcome::Breakdown {
                broke_down = true;
                break;
            }
        }
        let ritz = extract_ritz(&state)?;
        let target = &ritz[0];
        let refined = extract_refined(&state, target.mu)?;
        cycles.push(CycleRecord {
            k: state.k(),
            mu: target.mu,
            ritz_estimate: target.residual_estimate,
            refined_estimate: refined.residual_estimate,
        });
        let (estimate, z) = match variant {
            Variant::Ira => (target.residual_estimate, target.z.clone()),
            Variant::Irra => (refined.residual_estimate, refined.z_tilde.clone()),
        };
        let real = target.mu.im.abs() <= cfg.tol * norm_m;
        let converged = real && estimate / norm_m <= cfg.tol;
        debug!(
            "{} cycle {restarts}: k = {}, μ = {:.12e}{:+.3e}i, est = {:.3e}",
            variant.label(),
            state.k(),
            target.mu.re,
            target.mu.im,
            estimate / norm_m
        );
        let out_of_restarts = !converged && restarts >= cfg.max_restarts;
        if converged || out_of_restarts {
            let status = if converged { None } else { Some(Status::MaxRestarts) };
            return finish(p, &op, &state, target.mu.re, &z, status, cfg, cg_mvs, steps, restarts, cycles);
        }
        if broke_down {
            let fresh = seeded_vector(&mut rng, 2 * n);
            if state.k() < m && state.inject(&op, &fresh)? {
                continue;
            }
            if state.k() >= m {
                // full subspace with a zero residual block: restart normally
            } else {
                warn!("{}: cannot extend invariant subspace", variant.label());
                return finish(p, &op, &state, target.mu.re, &z, Some(Status::MaxRestarts), cfg, cg_mvs, steps, restarts, cycles);
            }
        }
        restarts += 1;
        let k = state.k();
        let shift_count = cfg.shift_count(k);
        let values: Vec<Complex64> = ritz.iter().map(|r| r.mu).collect();
        let shifts = match variant {
            Variant::Ira => select_shifts_exact(&values, 1, shift_count),
            Variant::Irra => select_shifts_refined(&state, std::slice::from_ref(&refined), shift_count)
                .unwrap_or_else(|| select_shifts_exact(&values, 1, shift_count)),
        };
        implicit_restart(&mut state, &shifts)?;
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    p: &TrsProblem,
    op: &PairOperator<'_>,
    state: &ArnoldiState,
    mu: f64,
    z: &[Complex64],
    forced: Option<Status>,
    cfg: &StoppingConfig,
    cg_mvs: usize,
    steps: usize,
    restarts: usize,
    cycles: Vec<CycleRecord>,
) -> Result<EigSolveResult> {
    let (re, _) = assemble_vector(state, z);
    let zr: Vec<f64> = z.iter().map(|c| c.re).collect();
    let by = state.combine_b(&zr);
    let nrm = sqrt_clamped(dot(&re, &by));
    let y = if nrm > 0.0 { scaled(1.0 / nrm, &re) } else { re };
    let ev = EigVector::new(y)?;
    let y1_bnorm = p.b.norm(ev.y1())?;
    let eig_residual = op.eig_residual(mu, ev.y())?;
    let mv_count = cg_mvs + op.mv_count();
    let (s, status, translated) = match recover_solution(&ev, p, cfg.tau)? {
        Recovery::Solution(s) => {
            let tol1 = translate_tolerance(cfg.tol, p.delta, y1_bnorm, cfg.tau).ok();
            (s, forced.unwrap_or(Status::Boundary), tol1)
        }
        Recovery::HardCase { y1_norm } => {
            debug!("hard case: ‖y₁‖ = {y1_norm:.3e} ≤ τ = {:.3e}", cfg.tau);
            let s = if y1_bnorm > 0.0 { scaled(p.delta / y1_bnorm, ev.y1()) } else { vec![0.0; p.dim()] };
            (s, forced.unwrap_or(Status::HardCaseDetected), None)
        }
    };
    let solution = TrsSolution::assemble(p, s, mu, mv_count, cg_mvs, steps, status)?;
    Ok(EigSolveResult {
        solution,
        report: Some(EigReport {
            mu,
            y: ev.into_inner(),
            y1_bnorm,
            translated_tol1: translated,
            eig_residual,
            restarts,
            arnoldi_steps: steps,
            cycles,
        }),
    })
}
