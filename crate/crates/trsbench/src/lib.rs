//! Matched-accuracy comparison of GLTR, TRS_IRA and TRS_IRRA on Matrix Market
//! test matrices.
//!
//! Each comparison runs IRA at `tol`, IRRA at `tol`, then GLTR at the
//! tolerance translated from IRA's eigenvector, and reports A-products and
//! the relative KKT residual `Res` of every run.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;
use trs_core::gen::unit_normal_vec;
use trs_core::mtx::{read_matrix_market_file, CoordMatrix};
use trs_core::{
    eig_trs_solve, gltr_solve, BOperator, GltrOptions, SparseSymMatrix, Status, StoppingConfig, TrsProblem, TrsSolution,
    Variant,
};

/// Largest dimension accepted even when the cap is raised.
pub const HARD_SIZE_CAP: usize = 20_000;
pub const DEFAULT_SIZE_CAP: usize = 5_000;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Matrix { path: PathBuf, source: trs_core::Error },
    #[error("{path}: matrix is {rows}x{cols}, expected square")]
    NotSquare { path: PathBuf, rows: usize, cols: usize },
    #[error("{path}: dimension {n} exceeds the size cap {cap}")]
    TooLarge { path: PathBuf, n: usize, cap: usize },
    #[error("B has dimension {b}, A has dimension {a}")]
    BDimension { a: usize, b: usize },
    #[error("invalid B spec '{0}': expected identity, tridiag:a,b,c or a file path")]
    BSpec(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed table at row {row}: {msg}")]
    Table { row: usize, msg: String },
    #[error(transparent)]
    Core(#[from] trs_core::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;

/// How the SPD constraint matrix `B` is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum BSpec {
    Identity,
    /// Constant `tridiag(sub, diag, sup)`; symmetry needs `sub == sup`.
    Tridiag { sub: f64, diag: f64, sup: f64 },
    File(PathBuf),
}

impl FromStr for BSpec {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "identity" {
            return Ok(BSpec::Identity);
        }
        if let Some(rest) = s.strip_prefix("tridiag:") {
            let v: Vec<f64> = rest
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| BenchError::BSpec(s.into()))?;
            return match v[..] {
                [sub, diag, sup] if sub == sup => Ok(BSpec::Tridiag { sub, diag, sup }),
                _ => Err(BenchError::BSpec(s.into())),
            };
        }
        if s.is_empty() {
            return Err(BenchError::BSpec(s.into()));
        }
        Ok(BSpec::File(PathBuf::from(s)))
    }
}

impl fmt::Display for BSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BSpec::Identity => f.write_str("identity"),
            BSpec::Tridiag { sub, diag, sup } => write!(f, "tridiag:{sub},{diag},{sup}"),
            BSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl BSpec {
    pub fn build(&self, n: usize) -> Result<BOperator> {
        match self {
            BSpec::Identity => Ok(BOperator::identity(n)),
            BSpec::Tridiag { sub, diag, .. } => Ok(BOperator::constant_tridiagonal(n, *sub, *diag)?),
            BSpec::File(path) => {
                let m = load_square(path, HARD_SIZE_CAP)?;
                if m.rows != n {
                    return Err(BenchError::BDimension { a: n, b: m.rows });
                }
                let s = SparseSymMatrix::from_triplets(n, &m.expanded()).map_err(|source| BenchError::Matrix {
                    path: path.clone(),
                    source,
                })?;
                Ok(BOperator::general(s)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "md" | "markdown" => Ok(OutputFormat::Markdown),
            other => Err(BenchError::Config(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    Gltr,
    Ira,
    Irra,
}

impl SolverKind {
    pub fn label(self) -> &'static str {
        match self {
            SolverKind::Gltr => "GLTR",
            SolverKind::Ira => Variant::Ira.label(),
            SolverKind::Irra => Variant::Irra.label(),
        }
    }
}

impl FromStr for SolverKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "GLTR" => Ok(SolverKind::Gltr),
            "TRS_IRA" => Ok(SolverKind::Ira),
            "TRS_IRRA" => Ok(SolverKind::Irra),
            other => Err(BenchError::Config(format!("unknown solver '{other}'"))),
        }
    }
}

/// Which solvers a run emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverSelection {
    #[default]
    All,
    Only(SolverKind),
}

impl SolverSelection {
    pub fn includes(self, k: SolverKind) -> bool {
        match self {
            SolverSelection::All => true,
            SolverSelection::Only(s) => s == k,
        }
    }
}

impl FromStr for SolverSelection {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(SolverSelection::All),
            "gltr" => Ok(SolverSelection::Only(SolverKind::Gltr)),
            "ira" => Ok(SolverSelection::Only(SolverKind::Ira)),
            "irra" => Ok(SolverSelection::Only(SolverKind::Irra)),
            other => Err(BenchError::Config(format!("unknown solver selection '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub matrices: Vec<PathBuf>,
    pub b_spec: BSpec,
    pub deltas: Vec<f64>,
    pub tol: f64,
    pub m: usize,
    pub max_restarts: usize,
    pub seed: u64,
    pub format: OutputFormat,
    pub solvers: SolverSelection,
    pub size_cap: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            matrices: Vec::new(),
            b_spec: BSpec::Identity,
            deltas: vec![1.0, 100.0],
            tol: 1e-12,
            m: 30,
            max_restarts: 600,
            seed: 0,
            format: OutputFormat::Csv,
            solvers: SolverSelection::All,
            size_cap: DEFAULT_SIZE_CAP,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(BenchError::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(BenchError::Config("every delta must be positive and finite".into()));
        }
        if self.size_cap == 0 || self.size_cap > HARD_SIZE_CAP {
            return Err(BenchError::Config(format!("size cap must be in 1..={HARD_SIZE_CAP}")));
        }
        self.stopping().validate()?;
        Ok(())
    }

    pub fn stopping(&self) -> StoppingConfig {
        StoppingConfig { tol: self.tol, m: self.m, max_restarts: self.max_restarts, seed: self.seed, ..Default::default() }
    }
}

fn load_square(path: &Path, cap: usize) -> Result<CoordMatrix> {
    let m = read_matrix_market_file(path).map_err(|source| BenchError::Matrix { path: path.into(), source })?;
    if m.rows != m.cols {
        return Err(BenchError::NotSquare { path: path.into(), rows: m.rows, cols: m.cols });
    }
    if m.rows > cap {
        return Err(BenchError::TooLarge { path: path.into(), n: m.rows, cap });
    }
    Ok(m)
}

/// Seeded standard-normal vector scaled to unit Euclidean length.
pub fn seeded_gradient(n: usize, seed: u64) -> Vec<f64> {
    unit_normal_vec(&mut ChaCha8Rng::seed_from_u64(seed), n)
}

/// `A = G + Gᵀ` from a coordinate matrix (symmetric storage expanded first).
pub fn symmetrized(g: &CoordMatrix) -> Result<SparseSymMatrix> {
    Ok(SparseSymMatrix::from_general_plus_transpose(g.rows, &g.expanded())?)
}

pub fn build_problem_from(g: &CoordMatrix, b_spec: &BSpec, delta: f64, seed: u64) -> Result<TrsProblem> {
    let n = g.rows;
    let a = symmetrized(g)?;
    let b = b_spec.build(n)?;
    Ok(TrsProblem::new(a, b, seeded_gradient(n, seed), delta)?)
}

pub fn build_problem(path: &Path, b_spec: &BSpec, delta: f64, seed: u64) -> Result<TrsProblem> {
    build_problem_from(&load_square(path, HARD_SIZE_CAP)?, b_spec, delta, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Solved(Status),
    /// The solver returned an error; details are logged.
    Failed,
}

impl RowStatus {
    pub fn is_converged(self) -> bool {
        matches!(self, RowStatus::Solved(s) if s.is_converged())
    }
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowStatus::Solved(s) => f.write_str(s.as_str()),
            RowStatus::Failed => f.write_str("error"),
        }
    }
}

impl FromStr for RowStatus {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "error" {
            Ok(RowStatus::Failed)
        } else {
            s.parse().map(RowStatus::Solved)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub matrix_name: String,
    pub solver: SolverKind,
    pub mvs: usize,
    /// `‖(A+λB)s+g‖_{B⁻¹}/‖g‖_{B⁻¹}`, recomputed from the returned pair.
    pub res: f64,
    pub status: RowStatus,
    /// Lanczos steps for GLTR, restarts for the eigensolvers.
    pub iterations: usize,
    pub wall_seconds: f64,
    /// `(MV_IRA − MV_IRRA)/MV_IRA`, carried on the IRRA row.
    pub ratio: Option<f64>,
}

/// Everything one (matrix, Δ) pipeline produced.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub records: Vec<BenchRecord>,
    pub ratio: Option<f64>,
    /// Tolerance GLTR actually ran at.
    pub gltr_tol1: Option<f64>,
    /// True when no eigenvector translation was available and GLTR fell back to `tol`.
    pub tol1_fallback: bool,
}

impl Comparison {
    pub fn record(&self, k: SolverKind) -> Option<&BenchRecord> {
        self.records.iter().find(|r| r.solver == k)
    }
}

pub fn mv_ratio(mv_ira: usize, mv_irra: usize) -> f64 {
    (mv_ira as f64 - mv_irra as f64) / mv_ira as f64
}

fn record_of(p: &TrsProblem, name: &str, kind: SolverKind, out: &trs_core::Result<TrsSolution>, iters: usize, secs: f64) -> BenchRecord {
    match out {
        Ok(sol) => {
            let res = p.kkt_residual(sol.lambda, &sol.s).map(|r| r / p.g_inv_bnorm()).unwrap_or(f64::NAN);
            BenchRecord {
                matrix_name: name.into(),
                solver: kind,
                mvs: sol.mv_count,
                res,
                status: RowStatus::Solved(sol.status),
                iterations: iters,
                wall_seconds: secs,
                ratio: None,
            }
        }
        Err(e) => {
            warn!("{name}: {} failed: {e}", kind.label());
            BenchRecord {
                matrix_name: name.into(),
                solver: kind,
                mvs: 0,
                res: f64::NAN,
                status: RowStatus::Failed,
                iterations: 0,
                wall_seconds: secs,
                ratio: None,
            }
        }
    }
}

/// Runs the protocol on one problem. IRA always runs when GLTR is selected,
/// since GLTR's tolerance is derived from it.
pub fn run_comparison(p: &TrsProblem, cfg: &BenchConfig, name: &str) -> Comparison {
    let stop = cfg.stopping();
    let want = cfg.solvers;
    let mut records = Vec::new();
    let mut tol1 = None;

    if want.includes(SolverKind::Ira) || want.includes(SolverKind::Gltr) {
        let t = Instant::now();
        let out = eig_trs_solve(p, &stop, Variant::Ira);
        let secs = t.elapsed().as_secs_f64();
        let restarts = out.as_ref().ok().and_then(|r| r.report.as_ref()).map_or(0, |r| r.restarts);
        tol1 = out.as_ref().ok().and_then(|r| r.report.as_ref()).and_then(|r| r.translated_tol1);
        if want.includes(SolverKind::Ira) {
            records.push(record_of(p, name, SolverKind::Ira, &out.map(|r| r.solution), restarts, secs));
        }
    }
    if want.includes(SolverKind::Irra) {
        let t = Instant::now();
        let out = eig_trs_solve(p, &stop, Variant::Irra);
        let secs = t.elapsed().as_secs_f64();
        let restarts = out.as_ref().ok().and_then(|r| r.report.as_ref()).map_or(0, |r| r.restarts);
        records.push(record_of(p, name, SolverKind::Irra, &out.map(|r| r.solution), restarts, secs));
    }
    let mut fallback = false;
    let mut gltr_tol1 = None;
    if want.includes(SolverKind::Gltr) {
        let t1 = match tol1 {
            Some(t) => t,
            None => {
                info!("{name}: no eigenvector translation available, GLTR runs at tol = {:e}", cfg.tol);
                fallback = true;
                cfg.tol
            }
        };
        gltr_tol1 = Some(t1);
        let t = Instant::now();
        let out = gltr_solve(p, &GltrOptions { tol1_rel: t1, ..Default::default() });
        let secs = t.elapsed().as_secs_f64();
        let iters = out.as_ref().map_or(0, |s| s.iterations);
        records.push(record_of(p, name, SolverKind::Gltr, &out, iters, secs));
    }

    let mv = |k| records.iter().find(|r: &&BenchRecord| r.solver == k && r.status != RowStatus::Failed).map(|r| r.mvs);
    let ratio = match (mv(SolverKind::Ira), mv(SolverKind::Irra)) {
        (Some(a), Some(b)) if a > 0 => Some(mv_ratio(a, b)),
        _ => None,
    };
    if let Some(r) = records.iter_mut().find(|r| r.solver == SolverKind::Irra) {
        r.ratio = ratio;
    }
    records.sort_by_key(|r| r.solver);
    Comparison { records, ratio, gltr_tol1, tol1_fallback: fallback }
}

/// Row label for a matrix file at a given radius.
pub fn run_label(path: &Path, delta: f64) -> String {
    let stem = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    format!("{stem}/delta={delta}")
}

/// Loads every matrix and runs every (matrix, Δ) pipeline, in parallel;
/// output order follows the input order.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<Comparison>> {
    cfg.validate()?;
    let mats: Vec<CoordMatrix> = cfg.matrices.iter().map(|p| load_square(p, cfg.size_cap)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, f64)> = (0..mats.len()).flat_map(|i| cfg.deltas.iter().map(move |&d| (i, d))).collect();
    jobs.par_iter()
        .map(|&(i, delta)| {
            let p = build_problem_from(&mats[i], &cfg.b_spec, delta, cfg.seed)?;
            let name = run_label(&cfg.matrices[i], delta);
            info!("{name}: n = {}, nnz(A) = {}", p.dim(), p.a.nnz());
            Ok(run_comparison(&p, cfg, &name))
        })
        .collect()
}

pub const CSV_HEADER: [&str; 7] = ["matrix", "solver", "mvs", "res", "status", "iters", "ratio"];

/// One CSV row; wall time is not part of the table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub matrix_name: String,
    pub solver: SolverKind,
    pub mvs: usize,
    pub res: f64,
    pub status: RowStatus,
    pub iterations: usize,
    pub ratio: Option<f64>,
}

impl From<&BenchRecord> for TableRow {
    fn from(r: &BenchRecord) -> Self {
        Self {
            matrix_name: r.matrix_name.clone(),
            solver: r.solver,
            mvs: r.mvs,
            res: r.res,
            status: r.status,
            iterations: r.iterations,
            ratio: r.ratio,
        }
    }
}

pub fn emit_csv(records: &[BenchRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.matrix_name.clone(),
            r.solver.label().to_string(),
            r.mvs.to_string(),
            r.res.to_string(),
            r.status.to_string(),
            r.iterations.to_string(),
            r.ratio.map(|x| x.to_string()).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn parse_csv(text: &str) -> Result<Vec<TableRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let bad = |row: usize, msg: String| BenchError::Table { row, msg };
    let header = rd.headers().map_err(|e| bad(0, e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(0, format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| bad(row, e.to_string()))?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        out.push(TableRow {
            matrix_name: field(0).to_string(),
            solver: field(1).parse().map_err(|e: BenchError| bad(row, e.to_string()))?,
            mvs: field(2).parse().map_err(|e| bad(row, format!("mvs: {e}")))?,
            res: field(3).parse().map_err(|e| bad(row, format!("res: {e}")))?,
            status: field(4).parse().map_err(|e| bad(row, e))?,
            iterations: field(5).parse().map_err(|e| bad(row, format!("iters: {e}")))?,
            ratio: match field(6) {
                "" => None,
                s => Some(s.parse().map_err(|e| bad(row, format!("ratio: {e}")))?),
            },
        });
    }
    Ok(out)
}

pub fn emit_markdown(records: &[BenchRecord]) -> String {
    let mut out = String::from("| matrix | solver | MVs | Res | status | iters | ratio |\n");
    out.push_str("|---|---|---:|---:|---|---:|---:|\n");
    let mut prev: Option<&str> = None;
    for r in records {
        let name = if prev == Some(r.matrix_name.as_str()) { "" } else { r.matrix_name.as_str() };
        prev = Some(&r.matrix_name);
        let ratio = r.ratio.map(|x| format!("{:.1}%", 100.0 * x)).unwrap_or_default();
        let _ = writeln!(
            out,
            "| {name} | {} | {} | {:.2e} | {} | {} | {ratio} |",
            r.solver.label(),
            r.mvs,
            r.res,
            r.status,
            r.iterations
        );
    }
    out
}

pub fn emit_table(records: &[BenchRecord], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => emit_csv(records),
        OutputFormat::Markdown => emit_markdown(records),
    }
}
