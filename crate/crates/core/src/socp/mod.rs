//! Conic solver for programs over zero, nonnegative and second-order cones.
//!
//! Two methods share one interface. The default is a primal-dual
//! interior-point iteration on the homogeneous self-dual embedding with
//! Nesterov-Todd scaling and a Mehrotra corrector. An ADMM operator-splitting
//! method on the same embedding is available for cross-checks and larger,
//! looser solves.
//!
//! Residuals reported in [`SolveReport`] are absolute infinity norms:
//!
//! * primal: `||A z + s - b||` plus the distance of `s` from `K`,
//! * dual: `||A' y + c||` plus the distance of `y` from `K*`,
//! * gap: `|c'z + b'y|`.
//!
//! [`certify`] recomputes these from the returned vectors alone.

mod admm;
mod cones;
mod ipm;
mod linalg;
mod program;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use program::{Cone, ConeKind, ConicProgram, SparseMatrix};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Method {
    #[default]
    InteriorPoint,
    Admm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub method: Method,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, method: Method::InteriorPoint }
    }
}

impl SolverSettings {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    /// Primal infeasible; `y` holds a normalized certificate with `b'y = -1`.
    Infeasible,
    /// Dual infeasible; `z` holds an improving ray with `c'z = -1`.
    Unbounded,
    /// Iteration budget exhausted (or the iteration stalled) without meeting
    /// any termination test.
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub z: Vec<f64>,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

/// Solves `prog` with the default method.
pub fn solve(prog: &ConicProgram, tol: f64, max_iter: usize) -> Result<SolveReport, SolverError> {
    solve_with(prog, &SolverSettings { tol, max_iter, method: Method::InteriorPoint })
}

pub fn solve_with(prog: &ConicProgram, settings: &SolverSettings) -> Result<SolveReport, SolverError> {
    prog.validate()?;
    if !(settings.tol > 0.0) || settings.max_iter == 0 {
        return Err(SolverError::InvalidSettings(format!(
            "tol must be positive and max_iter at least 1 (got {}, {})",
            settings.tol, settings.max_iter
        )));
    }
    Ok(match settings.method {
        Method::InteriorPoint => ipm::solve(prog, settings),
        Method::Admm => admm::solve(prog, settings),
    })
}

/// Recomputes the residual triple of `(report.z, report.s, report.y)`
/// against `prog` without reusing anything from the solver.
pub fn certify(prog: &ConicProgram, report: &SolveReport) -> Residuals {
    let (z, s, y) = (&report.z, &report.s, &report.y);
    let mut primal = 0.0_f64;
    let mut dual = 0.0_f64;
    for i in 0..prog.n_con() {
        let az: f64 = prog.a.row(i).iter().map(|&(c, v)| v * z[c]).sum();
        primal = primal.max((az + s[i] - prog.b[i]).abs());
    }
    let mut aty = prog.c.clone();
    for i in 0..prog.n_con() {
        for &(c, v) in prog.a.row(i) {
            aty[c] += v * y[i];
        }
    }
    for v in &aty {
        dual = dual.max(v.abs());
    }
    let mut row = 0;
    let (mut s_dist, mut y_dist) = (0.0_f64, 0.0_f64);
    for k in &prog.cones {
        let (sb, yb) = (&s[row..row + k.dim], &y[row..row + k.dim]);
        s_dist = s_dist.max(cone_distance(k.kind, sb, false));
        y_dist = y_dist.max(cone_distance(k.kind, yb, true));
        row += k.dim;
    }
    let cz: f64 = prog.c.iter().zip(z).map(|(a, b)| a * b).sum();
    let by: f64 = prog.b.iter().zip(y).map(|(a, b)| a * b).sum();
    Residuals { primal: primal + s_dist, dual: dual + y_dist, gap: (cz + by).abs() }
}

/// Normalized violation of a primal-infeasibility certificate:
/// `||A'y|| / (-b'y)` plus the dual-cone distance of `y` after scaling,
/// or infinity when `b'y >= 0`.
pub fn certify_infeasibility(prog: &ConicProgram, y: &[f64]) -> f64 {
    let by: f64 = prog.b.iter().zip(y).map(|(a, b)| a * b).sum();
    if !(by < 0.0) {
        return f64::INFINITY;
    }
    let scale = -by;
    let mut aty = vec![0.0; prog.n_var()];
    for i in 0..prog.n_con() {
        for &(c, v) in prog.a.row(i) {
            aty[c] += v * y[i];
        }
    }
    let mut viol = aty.iter().fold(0.0_f64, |m, v| m.max(v.abs())) / scale;
    let mut row = 0;
    for k in &prog.cones {
        viol = viol.max(cone_distance(k.kind, &y[row..row + k.dim], true) / scale);
        row += k.dim;
    }
    viol
}

/// Euclidean distance from `v` to the cone (or to its dual when `dual`).
fn cone_distance(kind: ConeKind, v: &[f64], dual: bool) -> f64 {
    match (kind, dual) {
        // the zero cone's dual is the whole space
        (ConeKind::Zero, true) => 0.0,
        (ConeKind::Zero, false) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        (ConeKind::Nonneg, _) => v.iter().map(|x| x.min(0.0).powi(2)).sum::<f64>().sqrt(),
        (ConeKind::SecondOrder, _) => {
            let t = v[0];
            let nu = v[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
            if nu <= t {
                0.0
            } else if nu <= -t {
                (t * t + nu * nu).sqrt()
            } else {
                (nu - t) / std::f64::consts::SQRT_2
            }
        }
    }
}

/// Euclidean projection onto the cone `kind`.
pub(crate) fn project_onto(kind: ConeKind, v: &mut [f64]) {
    match kind {
        ConeKind::Zero => v.iter_mut().for_each(|x| *x = 0.0),
        ConeKind::Nonneg => v.iter_mut().for_each(|x| *x = x.max(0.0)),
        ConeKind::SecondOrder => {
            let t = v[0];
            let nu = v[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
            if nu <= t {
            } else if nu <= -t {
                v.iter_mut().for_each(|x| *x = 0.0);
            } else {
                let f = (t + nu) / 2.0;
                v[0] = f;
                let r = f / nu;
                v[1..].iter_mut().for_each(|x| *x *= r);
            }
        }
    }
}
