//! Wasserstein DRO with decision-dependent ambiguity sets: closed-form
//! robust bounds, and the mean-variance and mean-CVaR cone programs.
//!
//! For a portfolio `x` with returns `<x, xi>` the Lipschitz constant of the
//! return is `||x||`, so the robust return constraint reads
//! `m'x - eps ||x|| >= mu` (order 2, Euclidean ground metric).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    DroConfig, ModelError, Portfolio, ProblemKind, ReturnSample, RobustSolution, SampleMoments, SolutionStatus,
};
use crate::socp::{self, Cone, ConicProgram, SolveStatus, SolverError, SolverSettings, SparseMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DroError {
    #[error("Wasserstein order must be >= 1, got {0}")]
    InvalidOrder(u32),
    #[error("a support bound is only valid for order p = 1")]
    BoundedSupportRequiresP1,
    #[error("portfolio programs require p = q = 2 (got p = {p}, q = {q})")]
    UnsupportedNorm { p: u32, q: u32 },
    #[error("covariance is not positive semidefinite (smallest eigenvalue {0})")]
    CovarianceNotPSD(f64),
    #[error("solver stopped with status {0:?}")]
    SolverFailed(SolveStatus),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// `1/p + (p-1)/p^(1/(p-1))`, with the limit value 1 at `p = 1`.
pub fn c_factor(p: u32) -> Result<f64, DroError> {
    match p {
        0 => Err(DroError::InvalidOrder(p)),
        1 => Ok(1.0),
        _ => {
            let pf = p as f64;
            Ok(1.0 / pf + (pf - 1.0) / pf.powf(1.0 / (pf - 1.0)))
        }
    }
}

/// Evaluations of `F(x, xi_i)` or `G(x, xi_i)` at a fixed decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustBoundInput {
    pub values: Vec<f64>,
    /// Lipschitz constant of the integrand in `xi`.
    pub gamma: f64,
    pub epsilon: f64,
    pub p: u32,
    /// `sup F` for upper bounds, `inf G` for lower bounds.
    pub support_bound: Option<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Worst-case expectation of `F` over the ball.
pub fn robust_mean_upper(inp: &RobustBoundInput) -> Result<f64, DroError> {
    let c = c_factor(inp.p)?;
    let base = mean(&inp.values);
    match inp.support_bound {
        Some(sup) if inp.p == 1 => Ok((base + inp.epsilon * inp.gamma).min(sup)),
        Some(_) => Err(DroError::BoundedSupportRequiresP1),
        None => Ok(base + inp.epsilon * inp.gamma * c),
    }
}

/// Worst-case (smallest) expectation of `G` over the ball.
pub fn robust_mean_lower(inp: &RobustBoundInput) -> Result<f64, DroError> {
    let c = c_factor(inp.p)?;
    let base = mean(&inp.values);
    match inp.support_bound {
        Some(inf) if inp.p == 1 => Ok((base - inp.epsilon * inp.gamma).max(inf)),
        Some(_) => Err(DroError::BoundedSupportRequiresP1),
        None => Ok(base - inp.epsilon * inp.gamma * c),
    }
}

/// Worst-case variance over the order-2 ball.
pub fn robust_variance_upper(values: &[f64], gamma: f64, epsilon: f64) -> f64 {
    let m = mean(values);
    let var = (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64 - m * m).max(0.0);
    (var.sqrt() + epsilon * gamma).powi(2)
}

/// Index layout of a built program.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Layout {
    m: usize,
    /// `tau` (mean-CVaR only).
    tau: Option<usize>,
    /// Epigraph of `||x||`; absent at `eps = 0`.
    v: Option<usize>,
}

/// A conic program together with what is needed to read a portfolio back.
#[derive(Debug, Clone, PartialEq)]
pub struct DroProgram {
    pub kind: ProblemKind,
    pub program: ConicProgram,
    pub cfg: DroConfig,
    mean: Vec<f64>,
    layout: Layout,
}

fn check_portfolio_cfg(cfg: &DroConfig) -> Result<(), DroError> {
    cfg.validate()?;
    if cfg.p != 2 || cfg.q != 2 {
        return Err(DroError::UnsupportedNorm { p: cfg.p, q: cfg.q });
    }
    Ok(())
}

/// Upper factor `L` with `L'L = cov`; rank-deficient inputs get a small ridge.
pub fn covariance_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>, DroError> {
    let m = cov.nrows();
    let eig = cov.clone().symmetric_eigen();
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let trace = cov.trace();
    let tol = 1e-10 * trace.abs().max(1.0);
    if min_eig < -tol {
        return Err(DroError::CovarianceNotPSD(min_eig));
    }
    let mut work = cov.clone();
    if min_eig < 1e-12 {
        let ridge = 1e-10 * trace / m as f64;
        for i in 0..m {
            work[(i, i)] += ridge;
        }
    }
    if let Some(ch) = work.clone().cholesky() {
        return Ok(ch.l().transpose());
    }
    // zero (or roundoff-level) covariance: use the spectral factor
    let eig = work.symmetric_eigen();
    let mut f = eig.eigenvectors.transpose();
    for (i, lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        f.row_mut(i).scale_mut(s);
    }
    Ok(f)
}

struct Rows {
    a: SparseMatrix,
    b: Vec<f64>,
    cones: Vec<Cone>,
}

impl Rows {
    fn new(n: usize) -> Self {
        Self { a: SparseMatrix::new(n), b: Vec::new(), cones: Vec::new() }
    }

    fn push(&mut self, entries: impl IntoIterator<Item = (usize, f64)>, b: f64) {
        self.a.push_row(entries);
        self.b.push(b);
    }

    fn simplex(&mut self, m: usize) {
        self.push((0..m).map(|j| (j, 1.0)), 1.0);
        self.cones.push(Cone::zero(1));
    }

    fn close_nonneg(&mut self, start: usize) {
        let k = self.b.len() - start;
        if k > 0 {
            self.cones.push(Cone::nonneg(k));
        }
    }
}

fn return_row(mean: &[f64], cfg: &DroConfig, v: Option<usize>) -> Vec<(usize, f64)> {
    let mut r: Vec<(usize, f64)> = mean.iter().enumerate().map(|(j, mj)| (j, -mj)).collect();
    if let Some(v) = v {
        r.push((v, cfg.epsilon));
    }
    r
}

fn norm_cone(rows: &mut Rows, m: usize, v: Option<usize>) {
    if let Some(v) = v {
        rows.push([(v, -1.0)], 0.0);
        for j in 0..m {
            rows.push([(j, -1.0)], 0.0);
        }
        rows.cones.push(Cone::second_order(m + 1));
    }
}

/// `min ||L x|| + eps ||x||` subject to `m'x - eps ||x|| >= mu` on the simplex.
pub fn build_mean_variance_socp(moments: &SampleMoments, cfg: &DroConfig) -> Result<DroProgram, DroError> {
    check_portfolio_cfg(cfg)?;
    mean_variance_program(moments, cfg, true)
}

/// `min x' S x` over the simplex, with no return target.
pub fn build_min_variance(moments: &SampleMoments) -> Result<DroProgram, DroError> {
    mean_variance_program(moments, &DroConfig::default(), false)
}

fn mean_variance_program(moments: &SampleMoments, cfg: &DroConfig, target: bool) -> Result<DroProgram, DroError> {
    let m = moments.m();
    let l = covariance_factor(&moments.covariance)?;
    let u = m;
    let v = (cfg.epsilon > 0.0).then_some(m + 1);
    let n = m + 1 + v.is_some() as usize;
    let mean: Vec<f64> = moments.mean.iter().copied().collect();

    let mut c = vec![0.0; n];
    c[u] = 1.0;
    if let Some(v) = v {
        c[v] = cfg.epsilon;
    }
    let mut rows = Rows::new(n);
    rows.simplex(m);
    let start = rows.b.len();
    for j in 0..m {
        rows.push([(j, -1.0)], 0.0);
    }
    if target {
        rows.push(return_row(&mean, cfg, v), -cfg.mu);
    }
    rows.close_nonneg(start);
    rows.push([(u, -1.0)], 0.0);
    for i in 0..m {
        rows.push((0..m).map(|j| (j, -l[(i, j)])), 0.0);
    }
    rows.cones.push(Cone::second_order(m + 1));
    norm_cone(&mut rows, m, v);

    let program = ConicProgram { c, a: rows.a, b: rows.b, cones: rows.cones };
    Ok(DroProgram { kind: ProblemKind::MeanVariance, program, cfg: *cfg, mean, layout: Layout { m, tau: None, v } })
}

/// `min (eps/alpha) ||x|| + (1/N) sum_i max(-<x,xi_i>/alpha + (1 - 1/alpha) tau, tau)`
/// subject to `m'x - eps ||x|| >= mu` on the simplex.
pub fn build_mean_cvar_socp(sample: &ReturnSample, cfg: &DroConfig) -> Result<DroProgram, DroError> {
    check_portfolio_cfg(cfg)?;
    mean_cvar_program(sample, cfg, true)
}

/// Empirical CVaR minimizer over the simplex, with no return target.
pub fn build_min_cvar(sample: &ReturnSample, alpha: f64) -> Result<DroProgram, DroError> {
    let cfg = DroConfig { alpha, ..DroConfig::default() };
    cfg.validate()?;
    mean_cvar_program(sample, &cfg, false)
}

fn mean_cvar_program(sample: &ReturnSample, cfg: &DroConfig, target: bool) -> Result<DroProgram, DroError> {
    let (nobs, m) = (sample.n(), sample.m());
    let tau = m;
    let v = (cfg.epsilon > 0.0).then_some(m + 1);
    let u0 = m + 1 + v.is_some() as usize;
    let n = u0 + nobs;
    let mean: Vec<f64> = crate::model::compute_moments(sample).mean.iter().copied().collect();
    let alpha = cfg.alpha;

    let mut c = vec![0.0; n];
    if let Some(v) = v {
        c[v] = cfg.epsilon / alpha;
    }
    for i in 0..nobs {
        c[u0 + i] = 1.0 / nobs as f64;
    }
    let mut rows = Rows::new(n);
    rows.simplex(m);
    let start = rows.b.len();
    for j in 0..m {
        rows.push([(j, -1.0)], 0.0);
    }
    if target {
        rows.push(return_row(&mean, cfg, v), -cfg.mu);
    }
    let r = sample.returns();
    for i in 0..nobs {
        // u_i >= tau
        rows.push([(u0 + i, -1.0), (tau, 1.0)], 0.0);
        // u_i >= -<x, xi_i>/alpha + (1 - 1/alpha) tau
        let mut e: Vec<(usize, f64)> = (0..m).map(|j| (j, -r[(i, j)] / alpha)).collect();
        e.push((tau, 1.0 - 1.0 / alpha));
        e.push((u0 + i, -1.0));
        rows.push(e, 0.0);
    }
    rows.close_nonneg(start);
    norm_cone(&mut rows, m, v);

    let program = ConicProgram { c, a: rows.a, b: rows.b, cones: rows.cones };
    Ok(DroProgram { kind: ProblemKind::MeanCVaR, program, cfg: *cfg, mean, layout: Layout { m, tau: Some(tau), v } })
}

/// Builds the program of the requested kind.
pub fn build(
    kind: ProblemKind,
    sample: &ReturnSample,
    moments: &SampleMoments,
    cfg: &DroConfig,
) -> Result<DroProgram, DroError> {
    match kind {
        ProblemKind::MeanVariance => build_mean_variance_socp(moments, cfg),
        ProblemKind::MeanCVaR => build_mean_cvar_socp(sample, cfg),
    }
}

pub fn solve_dro(prog: &DroProgram) -> Result<RobustSolution, DroError> {
    solve_dro_with(prog, &SolverSettings::default())
}

pub fn solve_dro_with(prog: &DroProgram, settings: &SolverSettings) -> Result<RobustSolution, DroError> {
    let report = socp::solve_with(&prog.program, settings)?;
    let lay = prog.layout;
    match report.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            return Ok(RobustSolution {
                kind: prog.kind,
                portfolio: None,
                tau: None,
                objective: f64::INFINITY,
                robust_constraint_value: f64::NAN,
                status: SolutionStatus::Infeasible,
                solver_iterations: report.iterations,
            })
        }
        s => return Err(DroError::SolverFailed(s)),
    }
    let x = Portfolio::from_solver(&report.z[..lay.m])?;
    let eps = prog.cfg.epsilon;
    let rcv = x.dot(&prog.mean) - eps * x.norm();
    let objective = match prog.kind {
        ProblemKind::MeanVariance => report.objective.max(0.0).powi(2),
        ProblemKind::MeanCVaR => report.objective,
    };
    Ok(RobustSolution {
        kind: prog.kind,
        portfolio: Some(x),
        tau: lay.tau.map(|t| report.z[t]),
        objective,
        robust_constraint_value: rcv,
        status: SolutionStatus::Optimal,
        solver_iterations: report.iterations,
    })
}

/// Builds and solves in one step.
pub fn solve_portfolio(
    kind: ProblemKind,
    sample: &ReturnSample,
    moments: &SampleMoments,
    cfg: &DroConfig,
) -> Result<RobustSolution, DroError> {
    solve_dro(&build(kind, sample, moments, cfg)?)
}

/// Robust objective of a given portfolio, in the reporting convention of
/// [`solve_dro`]: `(sqrt(x' S x) + eps ||x||)^2` for mean-variance, and
/// `(eps/alpha) ||x|| + empirical CVaR` for mean-CVaR.
pub fn robust_objective(
    kind: ProblemKind,
    sample: &ReturnSample,
    moments: &SampleMoments,
    cfg: &DroConfig,
    x: &[f64],
) -> f64 {
    let norm = x.iter().map(|w| w * w).sum::<f64>().sqrt();
    match kind {
        ProblemKind::MeanVariance => (moments.variance_of(x).max(0.0).sqrt() + cfg.epsilon * norm).powi(2),
        ProblemKind::MeanCVaR => {
            let losses: Vec<f64> = sample.portfolio_returns(x).iter().map(|r| -r).collect();
            cfg.epsilon / cfg.alpha * norm + crate::backtest::empirical_cvar(&losses, cfg.alpha)
        }
    }
}
