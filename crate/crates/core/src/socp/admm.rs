//! Operator splitting on the homogeneous self-dual embedding.
//!
//! With `u = (x, y, tau)` and `v = (0, s, kappa)` the embedding reads
//! `Q u = v`, `u in R^n x K* x R+`, `v in {0} x K x R+`. Each iteration solves
//! `(I + Q) u~ = u + v` through a cached factor of `I + A'A`, projects, and
//! updates `v`. Over-relaxation uses the factor 1.5.

use super::linalg::{DenseSym, Ldl};
use super::program::{ConeKind, ConicProgram};
use super::{project_onto, SolveReport, SolveStatus, SolverSettings};

const RELAX: f64 = 1.5;
const CHECK_EVERY: usize = 10;

struct Linsys<'a> {
    prog: &'a ConicProgram,
    ldl: Ldl,
    /// `M^{-1} (c, b)` and `1 + (c, b)' M^{-1} (c, b)`.
    q: (Vec<f64>, Vec<f64>),
    denom: f64,
}

impl<'a> Linsys<'a> {
    fn new(prog: &'a ConicProgram) -> Self {
        let n = prog.n_var();
        let mut mat = DenseSym::zeros(n);
        for i in 0..n {
            mat.add(i, i, 1.0);
        }
        for r in prog.a.rows() {
            for (k1, &(c1, v1)) in r.iter().enumerate() {
                for &(c2, v2) in &r[..=k1] {
                    mat.add(c1, c2, v1 * v2);
                }
            }
        }
        let ldl = Ldl::factor(&mat, &vec![1.0; n], 1e-14);
        let mut me = Self { prog, ldl, q: (Vec::new(), Vec::new()), denom: 1.0 };
        let (qx, qy) = me.solve_m(&prog.c, &prog.b);
        me.denom = 1.0 + dot(&prog.c, &qx) + dot(&prog.b, &qy);
        me.q = (qx, qy);
        me
    }

    /// Solves `[I A'; -A I] (x, y) = (rx, ry)`.
    fn solve_m(&self, rx: &[f64], ry: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let aty = self.prog.a.tr_mul_vec(ry);
        let rhs: Vec<f64> = rx.iter().zip(&aty).map(|(a, b)| a - b).collect();
        let x = self.ldl.solve(&rhs);
        let ax = self.prog.a.mul_vec(&x);
        let y = ry.iter().zip(&ax).map(|(a, b)| a + b).collect();
        (x, y)
    }

    fn solve(&self, rx: &[f64], ry: &[f64], rt: f64) -> (Vec<f64>, Vec<f64>, f64) {
        let (px, py) = self.solve_m(rx, ry);
        let tau = (rt + dot(&self.prog.c, &px) + dot(&self.prog.b, &py)) / self.denom;
        let x = px.iter().zip(&self.q.0).map(|(p, q)| p - tau * q).collect();
        let y = py.iter().zip(&self.q.1).map(|(p, q)| p - tau * q).collect();
        (x, y, tau)
    }
}

pub(super) fn solve(prog: &ConicProgram, settings: &SolverSettings) -> SolveReport {
    let (n, m) = (prog.n_var(), prog.n_con());
    let tol = settings.tol;
    let lin = Linsys::new(prog);

    let (mut x, mut y, mut tau) = (vec![0.0; n], vec![0.0; m], 1.0);
    let (mut s, mut kappa) = (vec![0.0; m], 0.0);
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;

    while iterations < settings.max_iter {
        iterations += 1;
        // u + v, with v = (0, s, kappa)
        let ry: Vec<f64> = y.iter().zip(&s).map(|(a, b)| a + b).collect();
        let (xt, yt, tt) = lin.solve(&x, &ry, tau + kappa);

        let ux: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| RELAX * a + (1.0 - RELAX) * b).collect();
        let uy_relaxed: Vec<f64> = (0..m).map(|i| RELAX * yt[i] + (1.0 - RELAX) * y[i]).collect();
        let ut = RELAX * tt + (1.0 - RELAX) * tau;

        let mut ynew: Vec<f64> = (0..m).map(|i| uy_relaxed[i] - s[i]).collect();
        project_dual(prog, &mut ynew);
        let tnew = (ut - kappa).max(0.0);

        for i in 0..m {
            s[i] += ynew[i] - uy_relaxed[i];
        }
        kappa += tnew - ut;
        x = ux;
        y = ynew;
        tau = tnew;

        if iterations % CHECK_EVERY != 0 && iterations != settings.max_iter {
            continue;
        }
        let ax = prog.a.mul_vec(&x);
        let mut aty = prog.a.tr_mul_vec(&y);
        let cx = dot(&prog.c, &x);
        let by = dot(&prog.b, &y);
        if tau > 1e-12 {
            let pres = (0..m).map(|i| (ax[i] + s[i] - prog.b[i] * tau).abs()).fold(0.0, f64::max) / tau;
            let dres = (0..n).map(|i| (aty[i] + prog.c[i] * tau).abs()).fold(0.0, f64::max) / tau;
            let gap = (cx + by).abs() / tau;
            if pres <= tol && dres <= tol && gap <= tol {
                status = SolveStatus::Optimal;
                break;
            }
        }
        if by < 0.0 {
            aty.iter_mut().for_each(|v| *v /= -by);
            if inf(&aty) <= tol {
                status = SolveStatus::Infeasible;
                break;
            }
        }
        if cx < 0.0 {
            let viol = (0..m).map(|i| (ax[i] + s[i]).abs()).fold(0.0, f64::max) / -cx;
            if viol <= tol {
                status = SolveStatus::Unbounded;
                break;
            }
        }
    }

    let (sp, sd) = match status {
        SolveStatus::Optimal | SolveStatus::MaxIterations => {
            let t = if tau > 0.0 { 1.0 / tau } else { 0.0 };
            (t, t)
        }
        SolveStatus::Infeasible => (0.0, -1.0 / dot(&prog.b, &y)),
        SolveStatus::Unbounded => (-1.0 / dot(&prog.c, &x), 0.0),
    };
    let z: Vec<f64> = x.iter().map(|v| v * sp).collect();
    let mut report = SolveReport {
        status,
        objective: dot(&prog.c, &z),
        z,
        s: s.iter().map(|v| v * sp).collect(),
        y: y.iter().map(|v| v * sd).collect(),
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        gap: f64::NAN,
        iterations,
    };
    match status {
        SolveStatus::Optimal | SolveStatus::MaxIterations => {
            let r = super::certify(prog, &report);
            report.primal_residual = r.primal;
            report.dual_residual = r.dual;
            report.gap = r.gap;
        }
        SolveStatus::Infeasible => report.objective = f64::INFINITY,
        SolveStatus::Unbounded => report.objective = f64::NEG_INFINITY,
    }
    report
}

fn project_dual(prog: &ConicProgram, y: &mut [f64]) {
    let mut row = 0;
    for k in &prog.cones {
        // zero cone rows are free in the dual; the others are self-dual
        if k.kind != ConeKind::Zero {
            project_onto(k.kind, &mut y[row..row + k.dim]);
        }
        row += k.dim;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
