//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are expected to fail; the run errors out if
//! any other criterion fails, or if a known-red one starts passing (so the
//! list stays truthful).

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use trs_core::eig::{
    direct_residual, extract_refined, extract_ritz, implicit_restart, select_shifts_exact, ArnoldiOutcome, ArnoldiState,
};
use trs_core::gen::{hard_case_instance, normal_vec, random_instance, unit_normal_vec, with_spectrum, BKind};
use trs_core::gltr::{gltr_residual_estimate, gltr_solve_traced, solve_reduced_trs, LanczosOutcome, LanczosState};
use trs_core::mtx::{write_matrix_market, CoordMatrix, Symmetry};
use trs_core::oracle::{kkt_report, oracle_rightmost_eigpair, oracle_solve_trs, KktCase};
use trs_core::vecops::dot;
use trs_core::*;
use trsbench::{run_bench, BSpec, BenchConfig, RowStatus, SolverKind};

const KNOWN_RED: &[u32] = &[3, 5, 7, 10];

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(id: u32, name: &'static str, pass: bool, detail: String) -> Outcome {
    println!("criterion {id:>2} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    Outcome { id, name, pass, detail }
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

// ---- suite 1 ------------------------------------------------------------

struct SuiteRun {
    problem: TrsProblem,
    case: KktCase,
    lambda_opt: f64,
    ira: EigSolveResult,
    irra: EigSolveResult,
    gltr_default: TrsSolution,
    /// GLTR at the tolerance translated from the IRA eigenvector.
    gltr_matched: Option<TrsSolution>,
    dense_mu: f64,
}

fn suite_one(count: usize) -> Vec<TrsProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=40);
            let definite = rng.random_bool(0.3);
            let b = if rng.random_bool(0.5) { BKind::Identity } else { BKind::Tridiag131 };
            let delta = [0.1, 1.0, 100.0][rng.random_range(0..3)];
            random_instance(&mut rng, n, definite, b, delta).unwrap()
        })
        .collect()
}

fn run_suite(problems: Vec<TrsProblem>) -> Vec<SuiteRun> {
    let cfg = StoppingConfig::default();
    problems
        .into_par_iter()
        .map(|p| {
            let o = oracle_solve_trs(&p).unwrap();
            let ira = eig_trs_solve(&p, &cfg, Variant::Ira).unwrap();
            let irra = eig_trs_solve(&p, &cfg, Variant::Irra).unwrap();
            let gltr_default = gltr_solve(&p, &GltrOptions::default()).unwrap();
            let gltr_matched = ira
                .report
                .as_ref()
                .and_then(|r| r.translated_tol1)
                .map(|t| gltr_solve(&p, &GltrOptions { tol1_rel: t, ..Default::default() }).unwrap());
            let (dense_mu, _) = oracle_rightmost_eigpair(&p).unwrap();
            SuiteRun { case: o.case_tag, lambda_opt: o.lambda_opt, problem: p, ira, irra, gltr_default, gltr_matched, dense_mu }
        })
        .collect()
}

fn kkt_ok(p: &TrsProblem, s: &TrsSolution) -> std::result::Result<(), String> {
    let k = kkt_report(p, s.lambda, &s.s).map_err(|e| e.to_string())?;
    let d = p.delta;
    if k.lambda < -1e-12 {
        return Err(format!("λ = {:e}", k.lambda));
    }
    if k.s_bnorm > d * (1.0 + 1e-8) {
        return Err(format!("‖s‖_B = {} > Δ = {d}", k.s_bnorm));
    }
    if k.complementarity > 1e-8 * d * (1.0 + k.lambda) {
        return Err(format!("complementarity {:e}", k.complementarity));
    }
    if k.leftmost < -1e-8 * k.shifted_norm1 {
        return Err(format!("leftmost eigenvalue {:e}", k.leftmost));
    }
    Ok(())
}

fn criterion_1(runs: &[SuiteRun], elapsed: Duration) -> Outcome {
    let mut bad = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        for (label, s) in [("TRS_IRA", &r.ira.solution), ("TRS_IRRA", &r.irra.solution), ("GLTR", &r.gltr_default)] {
            if let Err(e) = kkt_ok(&r.problem, s) {
                bad.push(format!("#{i} {label} ({}): {e}", s.status));
            }
        }
    }
    let secs = elapsed.as_secs_f64();
    let pass = bad.is_empty() && secs < 60.0;
    let detail = format!(
        "{} instances x 3 solvers, {} violations, {secs:.1} s (limit 60 s){}",
        runs.len(),
        bad.len(),
        bad.first().map(|b| format!("; first: {b}")).unwrap_or_default()
    );
    report(1, "KKT suite", pass, detail)
}

fn criterion_2(runs: &[SuiteRun]) -> Outcome {
    let (mut checked, mut worst_dense, mut worst_solver) = (0, 0.0f64, 0.0f64);
    let mut pass = true;
    for r in runs.iter().filter(|r| r.case == KktCase::Boundary) {
        checked += 1;
        let scale = 1.0 + r.lambda_opt;
        let d = (r.dense_mu - r.lambda_opt).abs() / scale;
        worst_dense = worst_dense.max(d);
        pass &= d <= 1e-8;
        for res in [&r.ira, &r.irra] {
            match &res.report {
                Some(rep) => {
                    let e = (rep.mu - r.lambda_opt).abs() / scale;
                    worst_solver = worst_solver.max(e);
                    pass &= e <= 1e-7;
                }
                None => pass = false,
            }
        }
    }
    report(
        2,
        "rightmost eigenvalue equals λ_opt",
        pass && checked > 0,
        format!("{checked} boundary instances; worst |μ₁−λ|/(1+λ): dense {worst_dense:.1e} (tol 1e-8), eigensolvers {worst_solver:.1e} (tol 1e-7)"),
    )
}

fn criterion_3(runs: &[SuiteRun]) -> Outcome {
    let mut sharp = Vec::new();
    let (mut violations, mut worst) = (0, 0.0f64);
    // same bound with ŝ = −Δ²ŷ₁/(gᵀŷ₂), the form the bound is derived from
    let mut alt_violations = 0;
    for r in runs {
        let p = &r.problem;
        let n = p.dim();
        for res in [&r.ira, &r.irra] {
            let Some(rep) = &res.report else { continue };
            if res.solution.status != Status::Boundary {
                continue;
            }
            let bound = p.delta / rep.y1_bnorm * rep.eig_residual;
            let lhs = res.solution.res_bnorm;
            if lhs > bound * (1.0 + 1e-10) {
                violations += 1;
            }
            worst = worst.max(lhs / bound);
            if lhs > 0.0 {
                sharp.push(bound / lhs);
            }
            let gy2 = dot(&p.g, &rep.y[n..]);
            let s: Vec<f64> = rep.y[..n].iter().map(|x| -p.delta * p.delta / gy2 * x).collect();
            if p.kkt_residual(rep.mu, &s).unwrap() > bound * (1.0 + 1e-10) {
                alt_violations += 1;
            }
        }
    }
    let count = sharp.len();
    let med = median(&mut sharp);
    report(
        3,
        "eigen-residual bridge bound",
        violations == 0 && count > 0,
        format!(
            "{count} accepted outputs, {violations} violations (worst actual/bound {worst:.2}); median bound/actual = {med:.3} (soft expectation ≤ 4); with ŝ = −Δ²ŷ₁/(gᵀŷ₂) instead: {alt_violations} violations"
        ),
    )
}

fn criterion_5(runs: &[SuiteRun]) -> Outcome {
    let (mut cycles, mut above, mut not_le, mut not_strict) = (0, 0, 0, 0);
    let mut excess = 0.0f64;
    for r in runs {
        let norm_m = r.problem.pair_one_norm();
        for res in [&r.ira, &r.irra] {
            let Some(rep) = &res.report else { continue };
            for c in &rep.cycles {
                cycles += 1;
                if c.refined_estimate > c.ritz_estimate {
                    not_le += 1;
                    excess = excess.max((c.refined_estimate - c.ritz_estimate) / norm_m);
                }
                if c.ritz_estimate > 1e-10 * norm_m {
                    above += 1;
                    if c.refined_estimate >= c.ritz_estimate {
                        not_strict += 1;
                    }
                }
            }
        }
    }
    report(
        5,
        "refined estimate dominates Ritz estimate",
        not_le == 0 && not_strict == 0 && cycles > 0,
        format!(
            "{cycles} cycles ({above} with Ritz residual > 1e-10‖M‖₁); {not_le} with σ_min > Ritz (largest excess {excess:.1e}·‖M‖₁), {not_strict} not strict"
        ),
    )
}

fn criterion_7(runs: &[SuiteRun]) -> Outcome {
    let mut ratios = Vec::new();
    for r in runs.iter().filter(|r| r.case == KktCase::Boundary) {
        let (Some(g), true) = (&r.gltr_matched, r.ira.solution.status == Status::Boundary) else { continue };
        let a = r.ira.solution.rel_res;
        let b = g.rel_res;
        ratios.push(if a > 0.0 && b > 0.0 { (a / b).max(b / a) } else { f64::INFINITY });
    }
    let total = ratios.len();
    let within = ratios.iter().filter(|&&x| x <= 50.0).count();
    let frac = within as f64 / total.max(1) as f64;
    let gltr_lower = runs
        .iter()
        .filter(|r| r.case == KktCase::Boundary && r.ira.solution.status == Status::Boundary)
        .filter_map(|r| r.gltr_matched.as_ref().map(|g| g.rel_res < r.ira.solution.rel_res))
        .filter(|&x| x)
        .count();
    let med = median(&mut ratios.clone());
    let p90 = {
        let mut v = ratios.clone();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.get(v.len() * 9 / 10).copied().unwrap_or(f64::NAN)
    };
    report(
        7,
        "matched accuracy after tolerance translation",
        total > 0 && frac >= 0.95,
        format!(
            "{within}/{total} = {:.1}% within factor 50 (need 95%); ratio median {med:.1}, p90 {p90:.1e}; GLTR Res below IRA Res on {gltr_lower}",
            100.0 * frac
        ),
    )
}

// ---- criterion 4 ----------------------------------------------------------

fn gltr_identity_worst(p: &TrsProblem) -> f64 {
    let norm_m = p.pair_one_norm();
    let counter = MvCounter::new();
    let mut st = LanczosState::start(p, true).unwrap();
    let mut worst = 0.0f64;
    let mut warm = None;
    for _ in 0..p.dim() {
        let out = st.lanczos_step(p, &counter).unwrap();
        let red = solve_reduced_trs(st.t(), st.beta0(), p.delta, warm).unwrap();
        warm = Some(red.lambda);
        let est = gltr_residual_estimate(&st, &red);
        let s = st.assemble_iterate(&red.h);
        let direct = p.kkt_residual(red.lambda, &s).unwrap();
        worst = worst.max((est - direct).abs() / norm_m);
        if out == LanczosOutcome::HappyBreakdown {
            break;
        }
    }
    worst
}

/// Exact-shift restarted Arnoldi, checking both estimates for the wanted
/// value against direct residuals at the end of every cycle.
fn arnoldi_identity_worst(p: &TrsProblem, seed: u64) -> (f64, f64, usize) {
    let op = PairOperator::new(p);
    let norm_m = op.one_norm();
    let n2 = 2 * p.dim();
    let m = 30.min(n2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = ArnoldiState::new(&op, &normal_vec(&mut rng, n2), m).unwrap();
    let (mut w_ritz, mut w_ref, mut cycles) = (0.0f64, 0.0f64, 0);
    for _ in 0..8 {
        let mut broke = false;
        while st.k() < m {
            if st.step(&op).unwrap() == ArnoldiOutcome::Breakdown {
                broke = true;
                break;
            }
        }
        let ritz = extract_ritz(&st).unwrap();
        let want = &ritz[0];
        let d = direct_residual(&op, &st, want.mu, &want.z).unwrap();
        w_ritz = w_ritz.max((d - want.residual_estimate).abs() / norm_m);
        let refined = extract_refined(&st, want.mu).unwrap();
        let d = direct_residual(&op, &st, want.mu, &refined.z_tilde).unwrap();
        w_ref = w_ref.max((d - refined.residual_estimate).abs() / norm_m);
        cycles += 1;
        if broke || want.residual_estimate <= 1e-12 * norm_m {
            break;
        }
        let values: Vec<_> = ritz.iter().map(|r| r.mu).collect();
        let shifts = select_shifts_exact(&values, 1, st.k() - 4);
        implicit_restart(&mut st, &shifts).unwrap();
    }
    (w_ritz, w_ref, cycles)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let problems: Vec<TrsProblem> = (0..30)
        .map(|i| {
            let n = rng.random_range(5..=100);
            let b = if i % 2 == 0 { BKind::Identity } else { BKind::Tridiag131 };
            random_instance(&mut rng, n, false, b, [0.1, 1.0, 100.0][i % 3]).unwrap()
        })
        .collect();
    let results: Vec<(f64, f64, f64, usize)> = problems
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let g = gltr_identity_worst(p);
            let (a, b, c) = arnoldi_identity_worst(p, i as u64);
            (g, a, b, c)
        })
        .collect();
    let g = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let a = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let b = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let cycles: usize = results.iter().map(|r| r.3).sum();
    report(
        4,
        "residual identities",
        g <= 1e-8 && a <= 1e-9 && b <= 1e-9,
        format!(
            "{} instances (n ≤ 100), {cycles} Arnoldi cycles; worst |est−direct|/‖M‖₁: GLTR {g:.1e} (tol 1e-8), Ritz {a:.1e}, refined {b:.1e} (tol 1e-9)",
            problems.len()
        ),
    )
}

// ---- criterion 6 ----------------------------------------------------------

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut worst_sine, mut worst_rel) = (0.0f64, 0.0f64);
    let mut count = 0;
    for i in 0..50 {
        let n = rng.random_range(3..=8);
        let b = if i % 2 == 0 { BKind::Identity } else { BKind::Tridiag131 };
        let definite = rng.random_bool(0.3);
        let p = random_instance(&mut rng, n, definite, b, [0.1, 1.0, 100.0][i % 3]).unwrap();
        let op = PairOperator::new(&p);
        let norm_m = op.one_norm();
        let cap = 2 * n - 1;
        let mut st = ArnoldiState::new(&op, &normal_vec(&mut rng, 2 * n), cap).unwrap();
        while st.k() < cap {
            if st.step(&op).unwrap() == ArnoldiOutcome::Breakdown {
                break;
            }
        }
        if st.k() < cap {
            continue;
        }
        let v1 = st.basis()[0].clone();
        let values: Vec<_> = extract_ritz(&st).unwrap().iter().map(|r| r.mu).collect();
        let shifts = select_shifts_exact(&values, 1, rng.random_range(1..cap));
        implicit_restart(&mut st, &shifts).unwrap();
        let filtered = explicit_filter(&op, &v1, &shifts);
        worst_sine = worst_sine.max(bsine(&op, &st.basis()[0], &filtered));
        worst_rel = worst_rel.max(relation_residual(&op, &st) / norm_m);
        count += 1;
    }
    report(
        6,
        "implicit restart equals explicit polynomial filter",
        count == 50 && worst_sine <= 1e-8 && worst_rel <= 1e-8,
        format!("{count}/50 instances (n ≤ 8); worst B̃-sine {worst_sine:.1e} (tol 1e-8), worst relation residual {worst_rel:.1e}·‖M‖₁ (tol 1e-8)"),
    )
}

fn explicit_filter(op: &PairOperator<'_>, v: &[f64], shifts: &[num_complex::Complex64]) -> Vec<f64> {
    let mut v = v.to_vec();
    let mut i = 0;
    while i < shifts.len() {
        let s = shifts[i];
        let av = op.apply_btilde_inv_m(&v).unwrap();
        if s.im == 0.0 {
            v = av.iter().zip(&v).map(|(a, x)| a - s.re * x).collect();
            i += 1;
        } else {
            let aav = op.apply_btilde_inv_m(&av).unwrap();
            let nrm2 = s.norm_sqr();
            v = (0..v.len()).map(|t| aav[t] - 2.0 * s.re * av[t] + nrm2 * v[t]).collect();
            i += 2;
        }
        let nrm = op.btilde_norm(&v).unwrap();
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    v
}

fn bsine(op: &PairOperator<'_>, a: &[f64], b: &[f64]) -> f64 {
    let na = op.btilde_norm(a).unwrap();
    let nb = op.btilde_norm(b).unwrap();
    let a: Vec<f64> = a.iter().map(|x| x / na).collect();
    let b: Vec<f64> = b.iter().map(|x| x / nb).collect();
    let c = dot(&a, &op.apply_btilde(&b).unwrap());
    let r: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - c * y).collect();
    op.btilde_norm(&r).unwrap()
}

fn relation_residual(op: &PairOperator<'_>, st: &ArnoldiState) -> f64 {
    let k = st.k();
    let h = st.h_square();
    let mut worst = 0.0f64;
    for j in 0..k {
        let mut r = op.apply_m_uncounted(&st.basis()[j]).unwrap();
        for i in 0..k {
            let bv = &st.b_basis()[i];
            for t in 0..r.len() {
                r[t] -= h[(i, j)] * bv[t];
            }
        }
        if j == k - 1 {
            if let Some(next) = st.next_vector() {
                let bn = op.apply_btilde(next).unwrap();
                for t in 0..r.len() {
                    r[t] -= st.beta() * bn[t];
                }
            }
        }
        worst = worst.max(op.btilde_inv_norm(&r).unwrap());
    }
    worst
}

// ---- criterion 8 ----------------------------------------------------------

fn write_fixture(dir: &Path, name: &str, m: &CoordMatrix) -> PathBuf {
    let path = dir.join(name);
    write_matrix_market(std::fs::File::create(&path).unwrap(), m).unwrap();
    path
}

/// Nonsymmetric sparse test matrices of the kind the protocol is meant for.
fn fixtures(dir: &Path) -> Vec<PathBuf> {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut out = Vec::new();

    // random pattern, about 5 nonzeros per row
    let n = 2000;
    let mut e = Vec::new();
    for i in 0..n {
        for _ in 0..5 {
            e.push((i, rng.random_range(0..n), normal_vec(&mut rng, 1)[0]));
        }
    }
    e.sort_by_key(|t| (t.0, t.1));
    e.dedup_by_key(|t| (t.0, t.1));
    out.push(write_fixture(dir, "sprand2000.mtx", &CoordMatrix { rows: n, cols: n, symmetry: Symmetry::General, entries: e }));

    // upwinded convection-diffusion on a 30x30 grid, shifted to be indefinite
    let k = 30;
    let mut e = Vec::new();
    for x in 0..k {
        for y in 0..k {
            let i = x * k + y;
            e.push((i, i, 4.0 - 3.0));
            if y > 0 {
                e.push((i, i - 1, -1.3));
            }
            if y + 1 < k {
                e.push((i, i + 1, -0.7));
            }
            if x > 0 {
                e.push((i, i - k, -0.5));
            }
            if x + 1 < k {
                e.push((i, i + k, -0.5));
            }
        }
    }
    out.push(write_fixture(dir, "convdiff900.mtx", &CoordMatrix { rows: k * k, cols: k * k, symmetry: Symmetry::General, entries: e }));

    // random band of half-width 3, stored as symmetric
    let n = 1500;
    let mut e = Vec::new();
    for i in 0..n {
        for d in 0..4 {
            if i >= d {
                e.push((i, i - d, normal_vec(&mut rng, 1)[0]));
            }
        }
    }
    out.push(write_fixture(dir, "band1500.mtx", &CoordMatrix { rows: n, cols: n, symmetry: Symmetry::Symmetric, entries: e }));

    // 2-D grid with random nonsymmetric couplings
    let k = 50;
    let mut e = Vec::new();
    for x in 0..k {
        for y in 0..k {
            let i = x * k + y;
            e.push((i, i, rng.random_range(-1.0..1.0)));
            if y + 1 < k {
                e.push((i, i + 1, rng.random_range(-1.0..1.0)));
            }
            if x + 1 < k {
                e.push((i, i + k, rng.random_range(-1.0..1.0)));
            }
        }
    }
    out.push(write_fixture(dir, "grid2500.mtx", &CoordMatrix { rows: k * k, cols: k * k, symmetry: Symmetry::General, entries: e }));
    out
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let paths = fixtures(dir.path());
    let start = Instant::now();
    let mut comparisons = Vec::new();
    for b in [BSpec::Identity, "tridiag:1,3,1".parse().unwrap()] {
        let cfg = BenchConfig { matrices: paths.clone(), b_spec: b, deltas: vec![1.0, 100.0], ..Default::default() };
        comparisons.extend(run_bench(&cfg).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    let runs = comparisons.len();
    let all_converged = comparisons.iter().all(|c| c.records.iter().all(|r| r.status.is_converged()));
    let unconverged: Vec<String> = comparisons
        .iter()
        .flat_map(|c| c.records.iter())
        .filter(|r| !r.status.is_converged())
        .map(|r| format!("{} {} {}", r.matrix_name, r.solver.label(), r.status))
        .collect();
    let ratios_emitted = comparisons.iter().all(|c| c.ratio.is_some() && c.record(SolverKind::Irra).unwrap().ratio.is_some());
    let not_worse = comparisons
        .iter()
        .filter(|c| {
            let ira = c.record(SolverKind::Ira).unwrap();
            let irra = c.record(SolverKind::Irra).unwrap();
            ira.status != RowStatus::Failed && irra.mvs <= ira.mvs
        })
        .count();
    let frac = not_worse as f64 / runs as f64;
    let mean_ratio = comparisons.iter().filter_map(|c| c.ratio).sum::<f64>() / runs as f64;
    report(
        8,
        "scaled protocol run",
        paths.len() >= 3 && all_converged && ratios_emitted && frac >= 0.6 && secs < 600.0,
        format!(
            "{} matrices x Δ∈{{1,100}} x B∈{{I, tridiag(1,3,1)}} = {runs} runs; all converged: {all_converged}{}; ratio emitted: {ratios_emitted}; IRRA ≤ IRA MVs on {not_worse}/{runs} = {:.0}% (need 60%); mean ratio {:.1}%; {secs:.1} s (limit 600 s)",
            paths.len(),
            if unconverged.is_empty() { String::new() } else { format!(" ({})", unconverged.join(", ")) },
            100.0 * frac,
            100.0 * mean_ratio
        ),
    )
}

// ---- criterion 9 ----------------------------------------------------------

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let n = 150;
    let eigs: Vec<f64> = (0..n).map(|i| -1.0 + 11.0 * i as f64 / (n - 1) as f64).collect();
    let a = with_spectrum(&mut rng, &eigs);
    let g = unit_normal_vec(&mut rng, n);
    let p = TrsProblem::new(a, BOperator::identity(n), g, 0.25).unwrap();
    let o = oracle_solve_trs(&p).unwrap();
    let kappa = (eigs[n - 1] + o.lambda_opt) / (eigs[0] + o.lambda_opt);
    let sk = kappa.sqrt();
    let bound = (sk - 1.0) / (sk + 1.0);
    let (sol, trace) = gltr_solve_traced(&p, &GltrOptions { reorth: true, ..Default::default() }).unwrap();
    let tail: Vec<(f64, f64)> = trace.iter().rev().take(10).map(|s| (s.k as f64, s.estimate.ln())).collect();
    // least-squares slope of ln(estimate) against k
    let m = tail.len() as f64;
    let (sx, sy) = tail.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = tail.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    let rate = (num / den).exp();
    report(
        9,
        "GLTR convergence rate",
        o.case_tag == KktCase::Boundary && sol.status == Status::Boundary && tail.len() == 10 && rate <= 2.0 * bound,
        format!(
            "n = {n}, λ_opt = {:.4}, κ = {kappa:.3}; fitted rate over last 10 of {} steps {rate:.3}, (√κ−1)/(√κ+1) = {bound:.3}, limit {:.3}",
            o.lambda_opt,
            trace.len(),
            2.0 * bound
        ),
    )
}

// ---- criterion 10 ---------------------------------------------------------

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let problems: Vec<TrsProblem> = (0..20)
        .map(|i| {
            let b = if i % 2 == 0 { BKind::Identity } else { BKind::Tridiag131 };
            hard_case_instance(&mut rng, 6 + i, b, [1.1, 1.5, 3.0][i % 3]).unwrap()
        })
        .collect();
    let cfg = StoppingConfig::default();
    let rows: Vec<(bool, bool, Status, Status, bool)> = problems
        .par_iter()
        .map(|p| {
            let o = oracle_solve_trs(p).unwrap();
            let hard = o.case_tag == KktCase::HardCase;
            let ira = eig_trs_solve(p, &cfg, Variant::Ira).unwrap().solution.status;
            let irra = eig_trs_solve(p, &cfg, Variant::Irra).unwrap().solution.status;
            let k = kkt_report(p, o.lambda_opt, &o.s_opt).unwrap();
            let oracle_ok = (k.s_bnorm - p.delta).abs() <= 1e-8 * p.delta
                && k.leftmost >= -1e-8 * k.shifted_norm1
                && k.stationarity <= 1e-8 * (1.0 + p.g_inv_bnorm());
            (hard, oracle_ok, ira, irra, ira == Status::HardCaseDetected && irra == Status::HardCaseDetected)
        })
        .collect();
    let total = rows.len();
    let tagged = rows.iter().filter(|r| r.0).count();
    let oracle_ok = rows.iter().filter(|r| r.1).count();
    let both = rows.iter().filter(|r| r.4).count();
    let count = |st: Status| rows.iter().map(|r| (r.2 == st) as usize + (r.3 == st) as usize).sum::<usize>();
    report(
        10,
        "hard-case detection",
        tagged == total && oracle_ok == total && both == total,
        format!(
            "{total} instances; oracle hard case {tagged}/{total}, oracle KKT {oracle_ok}/{total}; both eigensolvers HardCaseDetected {both}/{total}; solver statuses: hard_case {}, boundary {}, max_restarts {}",
            count(Status::HardCaseDetected),
            count(Status::Boundary),
            count(Status::MaxRestarts)
        ),
    )
}

fn main() {
    let start = Instant::now();
    let problems = suite_one(500);
    let runs = run_suite(problems);
    let suite_time = start.elapsed();
    println!(
        "suite 1: {} instances, {} boundary, {} interior, {} hard ({:.1} s)",
        runs.len(),
        runs.iter().filter(|r| r.case == KktCase::Boundary).count(),
        runs.iter().filter(|r| r.case == KktCase::Interior).count(),
        runs.iter().filter(|r| r.case == KktCase::HardCase).count(),
        suite_time.as_secs_f64()
    );

    let mut outcomes = vec![
        criterion_1(&runs, suite_time),
        criterion_2(&runs),
        criterion_3(&runs),
        criterion_4(),
        criterion_5(&runs),
        criterion_6(),
        criterion_7(&runs),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ];
    outcomes.sort_by_key(|o| o.id);

    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass ({:.1} s)", outcomes.len(), start.elapsed().as_secs_f64());
    let mut unexpected = Vec::new();
    for o in &outcomes {
        let red = KNOWN_RED.contains(&o.id);
        if o.pass == red {
            unexpected.push(format!(
                "criterion {} ({}) {}: {}",
                o.id,
                o.name,
                if o.pass { "passes but is listed as known red" } else { "fails" },
                o.detail
            ));
        }
    }
    if !unexpected.is_empty() {
        for u in &unexpected {
            eprintln!("{u}");
        }
        std::process::exit(1);
    }
    println!("known red: {KNOWN_RED:?}");
}
