//! Generalized Lanczos trust-region method.

use log::debug;

use crate::dense::tridiag::SymTridiag;
use crate::error::{Error, Result};
use crate::problem::{Status, TrsProblem, TrsSolution};
use crate::sparse::MvCounter;
use crate::vecops::{axpy, dot, norm2, scaled, sqrt_clamped};

/// Knobs for [`gltr_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GltrOptions {
    /// Stop when `β_{k+1}|e_{k+1}ᵀh| / ‖M‖₁` drops below this.
    pub tol1_rel: f64,
    /// Lanczos step cap; `None` means `n`.
    pub max_iter: Option<usize>,
    /// CG step cap for the interior check; `None` means `10n`.
    pub cg_max_iter: Option<usize>,
    /// Full B-reorthogonalization of every Lanczos vector.
    pub reorth: bool,
}

impl Default for GltrOptions {
    fn default() -> Self {
        Self { tol1_rel: 1e-12, max_iter: None, cg_max_iter: None, reorth: false }
    }
}

/// Result of the interior-phase CG check.
#[derive(Debug, Clone)]
pub enum InteriorOutcome {
    /// Converged with `‖s‖_B < Δ`; `λ = 0`.
    Interior(TrsSolution),
    /// Non-positive curvature or an iterate on/outside the boundary.
    Boundary,
    /// Cap reached inside the ball; carries the last iterate.
    MaxIterations(TrsSolution),
}

/// B-preconditioned CG on `As = −g`, stopping on `‖As + g‖_{B⁻¹} ≤ tol·‖M‖₁`.
///
/// With `B` as preconditioner the iterates grow monotonically in `‖·‖_B`, so
/// the first one to reach `Δ` proves the solution is on the boundary.
pub fn interior_check(p: &TrsProblem, tol_rel: f64, max_iter: usize, counter: &MvCounter) -> Result<InteriorOutcome> {
    if !(tol_rel > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol_rel}")));
    }
    let n = p.dim();
    let target = tol_rel * p.pair_one_norm();
    let start = counter.get();
    let mut s = vec![0.0; n];
    let mut r: Vec<f64> = scaled(-1.0, &p.g);
    let mut z = p.b.solve(&r)?;
    let mut rz = dot(&r, &z);
    let mut dir = z.clone();
    let mut it = 0;
    loop {
        if sqrt_clamped(rz) <= target {
            let sol = TrsSolution::assemble(p, s, 0.0, counter.get() - start, counter.get() - start, it, Status::Interior)?;
            return Ok(InteriorOutcome::Interior(sol));
        }
        if it >= max_iter {
            let sol = TrsSolution::assemble(p, s, 0.0, counter.get() - start, counter.get() - start, it, Status::MaxIterations)?;
            return Ok(InteriorOutcome::MaxIterations(sol));
        }
        let ap = p.a.apply_counted(&dir, counter)?;
        it += 1;
        let curv = dot(&dir, &ap);
        if curv <= 0.0 {
            debug!("cg: non-positive curvature at step {it}");
            return Ok(InteriorOutcome::Boundary);
        }
        let alpha = rz / curv;
        axpy(alpha, &dir, &mut s);
        if p.b.norm(&s)? >= p.delta {
            debug!("cg: iterate left the trust region at step {it}");
            return Ok(InteriorOutcome::Boundary);
        }
        axpy(-alpha, &ap, &mut r);
        z = p.b.solve(&r)?;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (d, zi) in dir.iter_mut().zip(&z) {
            *d = zi + beta * *d;
        }
    }
}

/// B-orthonormal Lanczos factorization `AP_k = BP_kT_k + β_{k+1}Bp_{k+1}e_{k+1}ᵀ`.
#[derive(Debug, Clone)]
pub struct LanczosState {
    basis: Vec<Vec<f64>>,
    /// `B p_j` for each basis vector.
    b_basis: Vec<Vec<f64>>,
    t: SymTridiag,
    beta0: f64,
    beta_next: f64,
    next: Option<(Vec<f64>, Vec<f64>)>,
    reorth: bool,
    breakdown_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LanczosOutcome {
    Continue,
    HappyBreakdown,
}

impl LanczosState {
    /// `p₀ = B⁻¹g/β₀` with `β₀ = ‖B⁻¹g‖_B`.
    pub fn start(p: &TrsProblem, reorth: bool) -> Result<Self> {
        let w = p.b.solve(&p.g)?;
        let beta0 = sqrt_clamped(dot(&p.g, &w));
        if beta0 == 0.0 {
            return Err(Error::InvalidProblem("gradient has zero B⁻¹-norm".into()));
        }
        let p0 = scaled(1.0 / beta0, &w);
        let q0 = scaled(1.0 / beta0, &p.g);
        Ok(Self {
            basis: Vec::new(),
            b_basis: Vec::new(),
            t: SymTridiag::empty(),
            beta0,
            beta_next: 0.0,
            next: Some((p0, q0)),
            reorth,
            breakdown_tol: f64::EPSILON * p.dim() as f64 * p.a.ones_norm(),
        })
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    /// `β_{k+1}`; zero after a happy breakdown or before the first step.
    pub fn beta_next(&self) -> f64 {
        self.beta_next
    }

    pub fn t(&self) -> &SymTridiag {
        &self.t
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Candidate `p_{k+1}` if the recurrence has not broken down.
    pub fn next_vector(&self) -> Option<&[f64]> {
        self.next.as_ref().map(|(v, _)| v.as_slice())
    }

    pub fn steps(&self) -> usize {
        self.basis.len()
    }

    /// One Lanczos step; charges one A-application.
    pub fn lanczos_step(&mut self, p: &TrsProblem, counter: &MvCounter) -> Result<LanczosOutcome> {
        let (pk, qk) = match self.next.take() {
            Some(v) => v,
            None => return Ok(LanczosOutcome::HappyBreakdown),
        };
        let mut r = p.a.apply_counted(&pk, counter)?;
        let delta = dot(&pk, &r);
        axpy(-delta, &qk, &mut r);
        let beta_k = self.beta_next;
        if let Some(q_prev) = self.b_basis.last() {
            axpy(-beta_k, q_prev, &mut r);
        }
        self.t.push(beta_k, delta);
        self.basis.push(pk);
        self.b_basis.push(qk);
        let mut w = p.b.solve(&r)?;
        if self.reorth {
            for (pj, qj) in self.basis.iter().zip(&self.b_basis) {
                let c = dot(pj, &r);
                axpy(-c, qj, &mut r);
                axpy(-c, pj, &mut w);
            }
        }
        let beta = sqrt_clamped(dot(&r, &w));
        if beta <= self.breakdown_tol {
            self.beta_next = 0.0;
            return Ok(LanczosOutcome::HappyBreakdown);
        }
        self.beta_next = beta;
        self.next = Some((scaled(1.0 / beta, &w), scaled(1.0 / beta, &r)));
        Ok(LanczosOutcome::Continue)
    }

    /// `s = P_k h`.
    pub fn assemble_iterate(&self, h: &[f64]) -> Vec<f64> {
        assert_eq!(h.len(), self.basis.len());
        let n = self.basis.first().map_or(0, |v| v.len());
        let mut s = vec![0.0; n];
        for (pj, &hj) in self.basis.iter().zip(h) {
            axpy(hj, pj, &mut s);
        }
        s
    }
}

/// Solution of `min β₀e₁ᵀh + ½hᵀTh` over `‖h‖ ≤ Δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSolution {
    pub h: Vec<f64>,
    pub lambda: f64,
    pub boundary: bool,
}

const REDUCED_MAX_ITER: usize = 300;

/// Moré–Sorensen safeguarded Newton on `1/‖h(λ)‖ − 1/Δ`.
///
/// `init` is an optional warm start for `λ` (typically the previous step's value).
pub fn solve_reduced_trs(t: &SymTridiag, beta0: f64, delta: f64, init: Option<f64>) -> Result<ReducedSolution> {
    let k = t.dim();
    if k == 0 || !(beta0 > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidProblem(format!(
            "reduced problem needs k ≥ 1, β₀ > 0, Δ > 0 (got {k}, {beta0}, {delta})"
        )));
    }
    let mut e1 = vec![0.0; k];
    e1[0] = -beta0;
    if let Ok(f) = t.ldlt(0.0) {
        let h = f.solve(&e1);
        if norm2(&h) <= delta {
            return Ok(ReducedSolution { h, lambda: 0.0, boundary: false });
        }
    }
    let theta = t.leftmost_eig();
    let mut lo = (-theta).max(0.0);
    let mut hi = (beta0 / delta - theta).max(lo) * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    let mut lambda = match init {
        Some(l) if l > lo && l < hi => l,
        _ => hi,
    };
    let mut last: Option<(Vec<f64>, f64)> = None;
    for _ in 0..REDUCED_MAX_ITER {
        let f = match t.ldlt(lambda) {
            Ok(f) => f,
            Err(_) => {
                lo = lo.max(lambda);
                lambda = 0.5 * (lo + hi);
                if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
                    break;
                }
                continue;
            }
        };
        let h = f.solve(&e1);
        let hn = norm2(&h);
        if (hn - delta).abs() <= 1e-12 * delta {
            return Ok(ReducedSolution { h, lambda, boundary: true });
        }
        if hn < delta {
            hi = lambda;
        } else {
            lo = lambda;
        }
        let w2 = dot(&f.solve(&h), &h);
        let mut next = lambda + (hn * hn / w2) * (hn - delta) / delta;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        last = Some((h, lambda));
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
        lambda = next;
    }
    // bracket collapsed: near hard case inside the projected problem
    let (h, lambda) = match last {
        Some(v) => v,
        None => {
            return Err(Error::BracketCollapse { lo, hi, norm: f64::NAN, delta });
        }
    };
    let hn = norm2(&h);
    if hn >= delta {
        return Ok(ReducedSolution { h: scaled(delta / hn, &h), lambda, boundary: true });
    }
    let v = t.eigenvector(theta);
    let hv = dot(&h, &v);
    let disc = hv * hv + delta * delta - hn * hn;
    let tau = -hv + if hv >= 0.0 { 1.0 } else { -1.0 } * disc.sqrt();
    let mut h = h;
    axpy(tau, &v, &mut h);
    debug!("reduced trs: hard-case step with τ = {tau:.3e}");
    Ok(ReducedSolution { h, lambda, boundary: true })
}

/// `β_{k+1}|e_{k+1}ᵀh|`.
pub fn gltr_residual_estimate(state: &LanczosState, r: &ReducedSolution) -> f64 {
    state.beta_next() * r.h.last().map_or(0.0, |v| v.abs())
}

/// Per-iteration record of a GLTR run.
#[derive(Debug, Clone, PartialEq)]
pub struct GltrStep {
    pub k: usize,
    pub lambda: f64,
    pub estimate: f64,
}

/// GLTR on `p`; see [`GltrOptions`].
pub fn gltr_solve(p: &TrsProblem, opts: &GltrOptions) -> Result<TrsSolution> {
    gltr_solve_traced(p, opts).map(|(sol, _)| sol)
}

/// [`gltr_solve`] returning the estimate history as well.
pub fn gltr_solve_traced(p: &TrsProblem, opts: &GltrOptions) -> Result<(TrsSolution, Vec<GltrStep>)> {
    let n = p.dim();
    let counter = MvCounter::new();
    let cg_cap = opts.cg_max_iter.unwrap_or(10 * n);
    match interior_check(p, opts.tol1_rel, cg_cap, &counter)? {
        InteriorOutcome::Interior(sol) | InteriorOutcome::MaxIterations(sol) => return Ok((sol, Vec::new())),
        InteriorOutcome::Boundary => {}
    }
    let cg_mvs = counter.get();
    let norm_m = p.pair_one_norm();
    let cap = opts.max_iter.unwrap_or(n).max(1);
    let mut state = LanczosState::start(p, opts.reorth)?;
    let mut trace = Vec::new();
    let mut warm = None;
    loop {
        let outcome = state.lanczos_step(p, &counter)?;
        let red = solve_reduced_trs(state.t(), state.beta0(), p.delta, warm)?;
        warm = Some(red.lambda);
        let est = gltr_residual_estimate(&state, &red);
        let k = state.steps();
        trace.push(GltrStep { k, lambda: red.lambda, estimate: est });
        let converged = est / norm_m <= opts.tol1_rel || outcome == LanczosOutcome::HappyBreakdown;
        if converged || k >= cap {
            let status = if !converged {
                Status::MaxIterations
            } else if red.boundary {
                Status::Boundary
            } else {
                Status::Interior
            };
            let s = state.assemble_iterate(&red.h);
            debug!("gltr: {k} lanczos steps, λ = {:.6e}, status {status}", red.lambda);
            let sol = TrsSolution::assemble(p, s, red.lambda, counter.get(), cg_mvs, k, status)?;
            return Ok((sol, trace));
        }
    }
}
