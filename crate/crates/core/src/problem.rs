//! Problem data, the structured pair `(M, B̃)` and the common solution record.

use std::fmt;

use crate::error::{check_len, Error, Result};
use crate::sparse::{BOperator, MvCounter, SparseSymMatrix};
use crate::vecops::{dot, norm1, sqrt_clamped};

/// `min gᵀs + ½ sᵀAs` subject to `‖s‖_B ≤ Δ`.
#[derive(Debug, Clone)]
pub struct TrsProblem {
    pub a: SparseSymMatrix,
    pub b: BOperator,
    pub g: Vec<f64>,
    pub delta: f64,
}

impl TrsProblem {
    pub fn new(a: SparseSymMatrix, b: BOperator, g: Vec<f64>, delta: f64) -> Result<Self> {
        let n = a.dim();
        check_len(n, b.dim())?;
        check_len(n, g.len())?;
        if n == 0 {
            return Err(Error::InvalidProblem("empty problem".into()));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidProblem(format!("trust radius must be positive, got {delta}")));
        }
        if g.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidProblem("gradient must be nonzero".into()));
        }
        Ok(Self { a, b, g, delta })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Quadratic model `q(s) = gᵀs + ½ sᵀAs`.
    pub fn objective(&self, s: &[f64]) -> f64 {
        let as_ = self.a.apply(s).expect("dimension checked at construction");
        dot(&self.g, s) + 0.5 * dot(s, &as_)
    }

    /// `‖g‖_{B⁻¹}`, the Res normaliser.
    pub fn g_inv_bnorm(&self) -> f64 {
        self.b.inv_norm(&self.g).expect("dimension checked at construction")
    }

    /// Directly recomputed `‖(A + λB)s + g‖_{B⁻¹}`; does not count as an MV.
    pub fn kkt_residual(&self, lambda: f64, s: &[f64]) -> Result<f64> {
        let mut r = self.a.apply(s)?;
        let bs = self.b.apply(s)?;
        for i in 0..r.len() {
            r[i] += lambda * bs[i] + self.g[i];
        }
        self.b.inv_norm(&r)
    }

    /// `‖M‖₁` of the pair matrix, computed column-wise without forming `ggᵀ`.
    pub fn pair_one_norm(&self) -> f64 {
        let n = self.dim();
        let g1 = norm1(&self.g);
        let d2 = self.delta * self.delta;
        let mut best = 0.0f64;
        for j in 0..n {
            let top = self.a.column_abs_sum(j) + self.b.column_abs_sum(j);
            let bottom = self.g[j].abs() * g1 / d2 + self.a.column_abs_sum(j);
            best = best.max(top).max(bottom);
        }
        best
    }
}

/// Matrix-free `(M, B̃)` with `M = [[-A, ggᵀ/Δ²], [B, -A]]`, `B̃ = diag(B, B)`.
///
/// Each application of `M` charges two A-applications to the counter.
#[derive(Debug)]
pub struct PairOperator<'p> {
    problem: &'p TrsProblem,
    counter: MvCounter,
    one_norm: f64,
}

impl<'p> PairOperator<'p> {
    pub fn new(problem: &'p TrsProblem) -> Self {
        Self {
            problem,
            counter: MvCounter::new(),
            one_norm: problem.pair_one_norm(),
        }
    }

    pub fn problem(&self) -> &'p TrsProblem {
        self.problem
    }

    /// Half the pair dimension.
    pub fn n(&self) -> usize {
        self.problem.dim()
    }

    pub fn mv_count(&self) -> usize {
        self.counter.get()
    }

    pub fn one_norm(&self) -> f64 {
        self.one_norm
    }

    /// `M v` without charging the counter.
    pub fn apply_m_uncounted(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        check_len(2 * n, v.len())?;
        let p = self.problem;
        let (v1, v2) = v.split_at(n);
        let coef = dot(&p.g, v2) / (p.delta * p.delta);
        let mut out = vec![0.0; 2 * n];
        {
            let (top, bottom) = out.split_at_mut(n);
            p.a.apply_into(v1, top);
            p.a.apply_into(v2, bottom);
            let bv1 = p.b.apply(v1)?;
            for i in 0..n {
                top[i] = -top[i] + p.g[i] * coef;
                bottom[i] = bv1[i] - bottom[i];
            }
        }
        Ok(out)
    }

    pub fn apply_m(&self, v: &[f64]) -> Result<Vec<f64>> {
        let out = self.apply_m_uncounted(v)?;
        self.counter.add(2);
        Ok(out)
    }

    pub fn apply_btilde(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        check_len(2 * n, v.len())?;
        let mut out = self.problem.b.apply(&v[..n])?;
        out.extend(self.problem.b.apply(&v[n..])?);
        Ok(out)
    }

    pub fn solve_btilde(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        check_len(2 * n, v.len())?;
        let mut out = self.problem.b.solve(&v[..n])?;
        out.extend(self.problem.b.solve(&v[n..])?);
        Ok(out)
    }

    /// `B̃⁻¹ M v`.
    pub fn apply_btilde_inv_m(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mv = self.apply_m(v)?;
        self.solve_btilde(&mv)
    }

    pub fn btilde_norm(&self, v: &[f64]) -> Result<f64> {
        let bv = self.apply_btilde(v)?;
        Ok(sqrt_clamped(dot(v, &bv)))
    }

    pub fn btilde_inv_norm(&self, v: &[f64]) -> Result<f64> {
        let w = self.solve_btilde(v)?;
        Ok(sqrt_clamped(dot(v, &w)))
    }

    /// Directly computed `‖(M − μB̃) y‖_{B̃⁻¹}`; not counted.
    pub fn eig_residual(&self, mu: f64, y: &[f64]) -> Result<f64> {
        let mut r = self.apply_m_uncounted(y)?;
        let by = self.apply_btilde(y)?;
        for i in 0..r.len() {
            r[i] -= mu * by[i];
        }
        self.btilde_inv_norm(&r)
    }
}

/// Termination state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Interior,
    Boundary,
    HardCaseDetected,
    MaxIterations,
    MaxRestarts,
}

impl Status {
    pub fn is_converged(self) -> bool {
        matches!(self, Status::Interior | Status::Boundary)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Interior => "interior",
            Status::Boundary => "boundary",
            Status::HardCaseDetected => "hard_case",
            Status::MaxIterations => "max_iterations",
            Status::MaxRestarts => "max_restarts",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "interior" => Status::Interior,
            "boundary" => Status::Boundary,
            "hard_case" => Status::HardCaseDetected,
            "max_iterations" => Status::MaxIterations,
            "max_restarts" => Status::MaxRestarts,
            other => return Err(format!("unknown status '{other}'")),
        })
    }
}

/// Approximate solution returned by every solver.
#[derive(Debug, Clone)]
pub struct TrsSolution {
    pub s: Vec<f64>,
    pub lambda: f64,
    /// `‖(A + λB)s + g‖_{B⁻¹}`, recomputed directly.
    pub res_bnorm: f64,
    /// `res_bnorm / ‖g‖_{B⁻¹}`.
    pub rel_res: f64,
    /// All A-applications charged to this solve, including the CG prefix.
    pub mv_count: usize,
    /// A-applications spent in the interior CG check.
    pub cg_mvs: usize,
    /// Lanczos steps (GLTR) or Arnoldi steps (eigensolvers).
    pub iterations: usize,
    pub status: Status,
}

impl TrsSolution {
    pub(crate) fn assemble(
        p: &TrsProblem,
        s: Vec<f64>,
        lambda: f64,
        mv_count: usize,
        cg_mvs: usize,
        iterations: usize,
        status: Status,
    ) -> Result<Self> {
        let res_bnorm = p.kkt_residual(lambda, &s)?;
        Ok(Self {
            rel_res: res_bnorm / p.g_inv_bnorm(),
            s,
            lambda,
            res_bnorm,
            mv_count,
            cg_mvs,
            iterations,
            status,
        })
    }

    pub fn s_bnorm(&self, p: &TrsProblem) -> f64 {
        p.b.norm(&self.s).expect("solution has problem dimension")
    }
}
