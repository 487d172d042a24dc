//! Primal-dual interior-point method on the homogeneous self-dual embedding.
//!
//! The program is split into equality rows `A x = b` (zero cones) and conic
//! rows `G x + s = h, s in K`. The embedding
//!
//! ```text
//! A'y + G'z + c tau = 0
//! A x - b tau       = 0
//! G x + s - h tau   = 0
//! c'x + b'y + h'z + kappa = 0
//! ```
//!
//! is followed with Nesterov-Todd scaled Newton steps and a Mehrotra
//! predictor-corrector. Each Newton system is reduced to the normal
//! equations `G' W^-2 G + ...` and factored densely.

use super::cones::{self, Block, BlockKind, InvSq, Scaling};
use super::linalg::{DenseSym, Ldl};
use super::program::{ConeKind, ConicProgram, SparseMatrix};
use super::{SolveReport, SolveStatus, SolverSettings};

/// Hard cap on interior-point iterations regardless of `max_iter`.
const IPM_ITER_CAP: usize = 150;
const STEP_FRACTION: f64 = 0.99;
const STATIC_REG: f64 = 1e-10;
const DYNAMIC_REG: f64 = 1e-13;
const REFINE_STEPS: usize = 8;
/// After reaching `tol`, up to `POLISH_STEPS` more iterations aim for
/// `POLISH * tol`; the best iterate within `tol` is returned.
const POLISH: f64 = 1e-3;
const POLISH_STEPS: usize = 5;

struct Split {
    n: usize,
    a: SparseMatrix,
    b: Vec<f64>,
    g: SparseMatrix,
    h: Vec<f64>,
    blocks: Vec<Block>,
    /// For every original row: `(is_equality, index within its part)`.
    origin: Vec<(bool, usize)>,
    /// Per variable: position in the diagonal block or in the dense block.
    part: Vec<Part>,
    n_diag: usize,
}

/// Variables that only enter nonnegative rows, and never share a row with
/// another such variable, form a diagonal block of the normal equations and
/// are eliminated before the dense factorization.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Part {
    Diag(usize),
    Dense(usize),
}

impl Split {
    fn new(prog: &ConicProgram) -> Self {
        let n = prog.n_var();
        let mut a = SparseMatrix::new(n);
        let mut g = SparseMatrix::new(n);
        let (mut b, mut h) = (Vec::new(), Vec::new());
        let mut blocks = Vec::new();
        let mut origin = Vec::with_capacity(prog.n_con());
        let mut row = 0;
        for k in &prog.cones {
            match k.kind {
                ConeKind::Zero => {
                    for i in row..row + k.dim {
                        origin.push((true, a.nrows()));
                        a.push_row(prog.a.row(i).iter().copied());
                        b.push(prog.b[i]);
                    }
                }
                ConeKind::Nonneg | ConeKind::SecondOrder => {
                    let kind = if k.kind == ConeKind::Nonneg { BlockKind::Nonneg } else { BlockKind::Soc };
                    blocks.push(Block { kind, start: g.nrows(), dim: k.dim });
                    for i in row..row + k.dim {
                        origin.push((false, g.nrows()));
                        g.push_row(prog.a.row(i).iter().copied());
                        h.push(prog.b[i]);
                    }
                }
            }
            row += k.dim;
        }
        let (part, n_diag) = partition(n, &a, &g, &blocks);
        Self { n, a, b, g, h, blocks, origin, part, n_diag }
    }

    fn p(&self) -> usize {
        self.b.len()
    }

    fn m(&self) -> usize {
        self.h.len()
    }
}

fn partition(n: usize, a: &SparseMatrix, g: &SparseMatrix, blocks: &[Block]) -> (Vec<Part>, usize) {
    let mut eligible = vec![true; n];
    let mut count = vec![0usize; n];
    for r in a.rows() {
        r.iter().for_each(|&(c, _)| eligible[c] = false);
    }
    let mut soc_row = vec![false; g.nrows()];
    for blk in blocks.iter().filter(|b| b.kind == BlockKind::Soc) {
        soc_row[blk.start..blk.start + blk.dim].iter_mut().for_each(|f| *f = true);
    }
    for (i, r) in g.rows().enumerate() {
        for &(c, _) in r {
            count[c] += 1;
            if soc_row[i] {
                eligible[c] = false;
            }
        }
    }
    // rows already claimed by a selected variable
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, r) in g.rows().enumerate() {
        r.iter().for_each(|&(c, _)| cols[c].push(i));
    }
    let mut order: Vec<usize> = (0..n).filter(|&c| eligible[c] && count[c] > 0).collect();
    order.sort_by_key(|&c| (count[c], c));
    let mut claimed = vec![false; g.nrows()];
    let mut diag = vec![false; n];
    for c in order {
        if cols[c].iter().all(|&i| !claimed[i]) {
            cols[c].iter().for_each(|&i| claimed[i] = true);
            diag[c] = true;
        }
    }
    let (mut nd, mut nr) = (0, 0);
    let part = diag
        .iter()
        .map(|&d| {
            if d {
                nd += 1;
                Part::Diag(nd - 1)
            } else {
                nr += 1;
                Part::Dense(nr - 1)
            }
        })
        .collect();
    (part, nd)
}

/// Factored reduced KKT system for one scaling.
struct Kkt<'a> {
    split: &'a Split,
    scaling: &'a Scaling,
    /// Diagonal block of the normal matrix.
    diag: Vec<f64>,
    /// Coupling between diagonal and dense variables, `n_diag x n_dense`.
    coupling: Vec<f64>,
    ldl: Ldl,
}

impl<'a> Kkt<'a> {
    fn new(split: &'a Split, scaling: &'a Scaling) -> Self {
        let (n, p) = (split.n, split.p());
        let nd = split.n_diag;
        let nr = n - nd;
        let dim = nr + p;
        let part = &split.part;
        let mut mat = DenseSym::zeros(dim);
        let mut diag = vec![STATIC_REG; nd];
        let mut coupling = vec![0.0; nd * nr];
        let mut add = |c1: usize, c2: usize, v: f64, mat: &mut DenseSym| match (part[c1], part[c2]) {
            (Part::Dense(i), Part::Dense(j)) => mat.add(i.max(j), i.min(j), v),
            (Part::Diag(i), Part::Dense(j)) | (Part::Dense(j), Part::Diag(i)) => coupling[i * nr + j] += v,
            (Part::Diag(i), Part::Diag(j)) => {
                debug_assert_eq!(i, j);
                diag[i] += v;
            }
        };

        // G' W^-2 G, one triangle
        let g = &split.g;
        let mut dense_q = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; n];
        for blk in scaling.inv_sq_blocks() {
            match blk {
                InvSq::Diag { start, d } => {
                    for (k, dk) in d.iter().enumerate() {
                        let r = g.row(start + k);
                        for (k1, &(c1, v1)) in r.iter().enumerate() {
                            let dv = dk * v1;
                            for &(c2, v2) in &r[..=k1] {
                                add(c1, c2, dv * v2, &mut mat);
                            }
                        }
                    }
                }
                InvSq::Soc { start, f, q } => {
                    touched.clear();
                    for (k, qk) in q.iter().enumerate() {
                        let r = g.row(start + k);
                        // the -f J term
                        let sign = if k == 0 { -f } else { f };
                        for (k1, &(c1, v1)) in r.iter().enumerate() {
                            if !mark[c1] {
                                mark[c1] = true;
                                touched.push(c1);
                            }
                            dense_q[c1] += qk * v1;
                            let sv = sign * v1;
                            for &(c2, v2) in &r[..=k1] {
                                add(c1, c2, sv * v2, &mut mat);
                            }
                        }
                    }
                    touched.sort_unstable();
                    let two_f = 2.0 * f;
                    for (i1, &c1) in touched.iter().enumerate() {
                        let q1 = two_f * dense_q[c1];
                        for &c2 in &touched[..=i1] {
                            add(c1, c2, q1 * dense_q[c2], &mut mat);
                        }
                    }
                    for &c in &touched {
                        dense_q[c] = 0.0;
                        mark[c] = false;
                    }
                }
            }
        }
        for i in 0..nr {
            mat.add(i, i, STATIC_REG);
        }
        // Schur complement of the diagonal block
        for (k, dk) in diag.iter().enumerate() {
            let row = &coupling[k * nr..(k + 1) * nr];
            let nz: Vec<(usize, f64)> =
                row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect();
            for (a, &(i, vi)) in nz.iter().enumerate() {
                let s = vi / dk;
                for &(j, vj) in &nz[..=a] {
                    mat.add(i, j, -s * vj);
                }
            }
        }
        for (k, r) in split.a.rows().enumerate() {
            for &(c, v) in r {
                if let Part::Dense(j) = part[c] {
                    mat.add(nr + k, j, v);
                }
            }
            mat.add(nr + k, nr + k, -STATIC_REG);
        }
        let mut signs = vec![1.0; dim];
        signs[nr..].iter_mut().for_each(|s| *s = -1.0);
        let scale = (0..nr).map(|i| mat.get(i, i).abs()).chain(diag.iter().copied()).fold(1.0, f64::max);
        let ldl = Ldl::factor(&mat, &signs, DYNAMIC_REG * scale);
        Self { split, scaling, diag, coupling, ldl }
    }

    /// Solves the normal equations `[M A'; A 0] (x, y) = (rx, ry)`.
    fn normal_solve(&self, rx: &[f64], ry: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let split = self.split;
        let (n, nd) = (split.n, split.n_diag);
        let nr = n - nd;
        let mut rd = vec![0.0; nd];
        let mut rhs = vec![0.0; nr + ry.len()];
        for (c, part) in split.part.iter().enumerate() {
            match *part {
                Part::Diag(i) => rd[i] = rx[c],
                Part::Dense(j) => rhs[j] = rx[c],
            }
        }
        rhs[nr..].copy_from_slice(ry);
        for (k, dk) in self.diag.iter().enumerate() {
            let s = rd[k] / dk;
            if s != 0.0 {
                for (j, b) in self.coupling[k * nr..(k + 1) * nr].iter().enumerate() {
                    rhs[j] -= b * s;
                }
            }
        }
        let sol = self.ldl.solve(&rhs);
        let mut x = vec![0.0; n];
        let mut xd = rd;
        for (k, dk) in self.diag.iter().enumerate() {
            let row = &self.coupling[k * nr..(k + 1) * nr];
            let bz: f64 = row.iter().zip(&sol[..nr]).map(|(a, b)| a * b).sum();
            xd[k] = (xd[k] - bz) / dk;
        }
        for (c, part) in split.part.iter().enumerate() {
            x[c] = match *part {
                Part::Diag(i) => xd[i],
                Part::Dense(j) => sol[j],
            };
        }
        (x, sol[nr..].to_vec())
    }

    fn w_inv_sq(&self, v: &[f64]) -> Vec<f64> {
        let t = self.scaling.apply(v, true);
        self.scaling.apply(&t, true)
    }

    /// Reduced solve of `[0 A' G'; A 0 0; G 0 -W^2] (x, y, z) = (rx, ry, rz)`.
    fn reduced(&self, rx: &[f64], ry: &[f64], rz: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.split.n;
        let wz = self.w_inv_sq(rz);
        let gt = self.split.g.tr_mul_vec(&wz);
        let mut rhs = Vec::with_capacity(n + ry.len());
        rhs.extend(rx.iter().zip(&gt).map(|(a, b)| a + b));
        let (x, y) = self.normal_solve(&rhs, ry);
        let gx = self.split.g.mul_vec(&x);
        let diff: Vec<f64> = gx.iter().zip(rz).map(|(a, b)| a - b).collect();
        let z = self.w_inv_sq(&diff);
        (x, y, z)
    }

    fn solve(&self, rx: &[f64], ry: &[f64], rz: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (mut x, mut y, mut z) = self.reduced(rx, ry, rz);
        let rnorm = inf_norm(rx).max(inf_norm(ry)).max(inf_norm(rz)).max(1.0);
        let mut last = f64::INFINITY;
        for _ in 0..REFINE_STEPS {
            let s = self.split;
            let aty = s.a.tr_mul_vec(&y);
            let gtz = s.g.tr_mul_vec(&z);
            let ex: Vec<f64> = (0..s.n).map(|i| rx[i] - aty[i] - gtz[i]).collect();
            let ax = s.a.mul_vec(&x);
            let ey: Vec<f64> = ry.iter().zip(&ax).map(|(r, v)| r - v).collect();
            let gx = s.g.mul_vec(&x);
            let w2z = self.scaling.apply_sq(&z);
            let ez: Vec<f64> = (0..s.m()).map(|i| rz[i] - gx[i] + w2z[i]).collect();
            let err = inf_norm(&ex).max(inf_norm(&ey)).max(inf_norm(&ez));
            if err <= 1e-14 * rnorm || err >= 0.5 * last {
                break;
            }
            last = err;
            let (dx, dy, dz) = self.reduced(&ex, &ey, &ez);
            add_assign(&mut x, &dx);
            add_assign(&mut y, &dy);
            add_assign(&mut z, &dz);
        }
        (x, y, z)
    }
}

#[derive(Clone)]
struct Iterate {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Residual {
    rx: Vec<f64>,
    ry: Vec<f64>,
    rz: Vec<f64>,
    rtau: f64,
}

pub(super) fn solve(prog: &ConicProgram, settings: &SolverSettings) -> SolveReport {
    let split = Split::new(prog);
    let c = &prog.c;
    let (n, p, m) = (split.n, split.p(), split.m());
    let blocks = &split.blocks;
    let nu = cones::degree(blocks) as f64;
    let tol = settings.tol;
    let max_iter = settings.max_iter.min(IPM_ITER_CAP);

    let mut it = initial_point(&split, c);
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut stalls = 0;
    let mut best_optimal: Option<(f64, Iterate, usize)> = None;
    // least-residual iterate, reported when nothing converges
    let mut best_any: Option<(f64, Iterate)> = None;
    let mut polish_steps = 0;

    loop {
        let res = residual(&split, c, &it);
        let (x, y, z, s) = (&it.x, &it.y, &it.z, &it.s);

        // termination tests on the de-homogenized point
        let pres = inf_norm(&res.ry).max(inf_norm(&res.rz)) / it.tau;
        let dres = inf_norm(&res.rx) / it.tau;
        let cx = cones::dot(c, x);
        let byhz = cones::dot(&split.b, y) + cones::dot(&split.h, z);
        let gap = (cx + byhz).abs() / it.tau;
        let worst = pres.max(dres).max(gap);
        if worst <= tol && worst < best_optimal.as_ref().map_or(f64::INFINITY, |b| b.0) {
            best_optimal = Some((worst, it.clone(), iterations));
        }
        if worst < best_any.as_ref().map_or(f64::INFINITY, |b| b.0) {
            best_any = Some((worst, it.clone()));
        }
        // keep going past `tol` while the iteration still makes progress
        if worst <= POLISH * tol {
            status = SolveStatus::Optimal;
            break;
        }
        if best_optimal.is_none() && it.kappa > it.tau {
            if byhz < 0.0 {
                let aty = split.a.tr_mul_vec(y);
                let gtz = split.g.tr_mul_vec(z);
                let viol = (0..n).map(|i| (aty[i] + gtz[i]).abs()).fold(0.0, f64::max);
                if viol / -byhz <= tol {
                    status = SolveStatus::Infeasible;
                    break;
                }
            }
            if cx < 0.0 {
                let ax = split.a.mul_vec(x);
                let gx = split.g.mul_vec(x);
                let viol = inf_norm(&ax).max((0..m).map(|i| (gx[i] + s[i]).abs()).fold(0.0, f64::max));
                if viol / -cx <= tol {
                    status = SolveStatus::Unbounded;
                    break;
                }
            }
        }
        if iterations >= max_iter || !all_finite(&it) || (best_optimal.is_some() && polish_steps >= POLISH_STEPS) {
            break;
        }
        if best_optimal.is_some() {
            polish_steps += 1;
        }
        iterations += 1;

        let (scaling, lambda) = Scaling::new(blocks, s, z);
        let kkt = Kkt::new(&split, &scaling);
        let neg_c: Vec<f64> = c.iter().map(|v| -v).collect();
        let (x2, y2, z2) = kkt.solve(&neg_c, &split.b, &split.h);
        let mu = (cones::dot(s, z) + it.tau * it.kappa) / (nu + 1.0);

        // predictor
        let lam_sq = cones::circ(blocks, &lambda, &lambda);
        let rc_aff: Vec<f64> = lam_sq.iter().map(|v| -v).collect();
        let rk_aff = -it.tau * it.kappa;
        let aff = direction(&split, c, &it, &res, &kkt, &scaling, &lambda, &rc_aff, rk_aff, 1.0, (&x2, &y2, &z2));
        let alpha_aff = step_length(blocks, &it, &aff, 1.0);
        let sigma = (1.0 - alpha_aff).clamp(0.0, 1.0).powi(3);

        // corrector
        let ws = scaling.apply(&aff.s, true);
        let wz = scaling.apply(&aff.z, false);
        let cross = cones::circ(blocks, &ws, &wz);
        let e = cones::identity(blocks, m);
        let rc: Vec<f64> = (0..m).map(|i| -lam_sq[i] + sigma * mu * e[i] - cross[i]).collect();
        let rk = -it.tau * it.kappa + sigma * mu - aff.tau * aff.kappa;
        let dir = direction(&split, c, &it, &res, &kkt, &scaling, &lambda, &rc, rk, 1.0 - sigma, (&x2, &y2, &z2));
        let alpha = (STEP_FRACTION * step_length(blocks, &it, &dir, f64::INFINITY)).min(1.0);

        if alpha < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
        let prev = it.clone();
        axpy(&mut it.x, alpha, &dir.x);
        axpy(&mut it.y, alpha, &dir.y);
        axpy(&mut it.z, alpha, &dir.z);
        axpy(&mut it.s, alpha, &dir.s);
        it.tau += alpha * dir.tau;
        it.kappa += alpha * dir.kappa;
        debug_assert_eq!(it.y.len(), p);
        if !all_finite(&it) {
            it = prev;
            break;
        }
    }

    if status == SolveStatus::MaxIterations {
        if let Some((_, best, _)) = best_optimal {
            it = best;
            status = SolveStatus::Optimal;
        } else if let Some((_, best)) = best_any {
            it = best;
        }
    }
    finish(prog, &split, it, status, iterations)
}

struct Direction {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

/// Newton direction with linear target `-(eta) R` and complementarity
/// targets `lambda o (W^-1 ds + W dz) = rc`, `kappa dtau + tau dkappa = rk`.
#[allow(clippy::too_many_arguments)]
fn direction(
    split: &Split,
    c: &[f64],
    it: &Iterate,
    res: &Residual,
    kkt: &Kkt<'_>,
    scaling: &Scaling,
    lambda: &[f64],
    rc: &[f64],
    rk: f64,
    eta: f64,
    (x2, y2, z2): (&[f64], &[f64], &[f64]),
) -> Direction {
    let blocks = &split.blocks;
    let tx: Vec<f64> = res.rx.iter().map(|v| -eta * v).collect();
    let ty: Vec<f64> = res.ry.iter().map(|v| -eta * v).collect();
    let tz: Vec<f64> = res.rz.iter().map(|v| -eta * v).collect();
    let ttau = -eta * res.rtau;

    let lr = cones::inv_circ(blocks, lambda, rc);
    let wlr = scaling.apply(&lr, false);
    let rz1: Vec<f64> = tz.iter().zip(&wlr).map(|(a, b)| a - b).collect();
    let (x1, y1, z1) = kkt.solve(&tx, &ty, &rz1);

    let num = ttau - cones::dot(c, &x1) - cones::dot(&split.b, &y1) - cones::dot(&split.h, &z1) - rk / it.tau;
    let den = cones::dot(c, x2) + cones::dot(&split.b, y2) + cones::dot(&split.h, z2) - it.kappa / it.tau;
    let dtau = num / den;

    let comb = |u1: &[f64], u2: &[f64]| -> Vec<f64> { u1.iter().zip(u2).map(|(a, b)| a + dtau * b).collect() };
    let dx = comb(&x1, x2);
    let dy = comb(&y1, y2);
    let dz = comb(&z1, z2);
    let w2dz = scaling.apply_sq(&dz);
    let ds: Vec<f64> = wlr.iter().zip(&w2dz).map(|(a, b)| a - b).collect();
    let dkappa = (rk - it.kappa * dtau) / it.tau;
    Direction { x: dx, y: dy, z: dz, s: ds, tau: dtau, kappa: dkappa }
}

fn step_length(blocks: &[Block], it: &Iterate, d: &Direction, cap: f64) -> f64 {
    let mut a = cones::max_step(blocks, &it.s, &d.s, cap);
    a = cones::max_step(blocks, &it.z, &d.z, a);
    if d.tau < 0.0 {
        a = a.min(-it.tau / d.tau);
    }
    if d.kappa < 0.0 {
        a = a.min(-it.kappa / d.kappa);
    }
    a.min(cap)
}

fn residual(split: &Split, c: &[f64], it: &Iterate) -> Residual {
    let aty = split.a.tr_mul_vec(&it.y);
    let gtz = split.g.tr_mul_vec(&it.z);
    let rx = (0..split.n).map(|i| aty[i] + gtz[i] + c[i] * it.tau).collect();
    let ax = split.a.mul_vec(&it.x);
    let ry = ax.iter().zip(&split.b).map(|(a, b)| a - b * it.tau).collect();
    let gx = split.g.mul_vec(&it.x);
    let rz = (0..split.m()).map(|i| gx[i] + it.s[i] - split.h[i] * it.tau).collect();
    let rtau = cones::dot(c, &it.x) + cones::dot(&split.b, &it.y) + cones::dot(&split.h, &it.z) + it.kappa;
    Residual { rx, ry, rz, rtau }
}

fn initial_point(split: &Split, c: &[f64]) -> Iterate {
    let (n, p, m) = (split.n, split.p(), split.m());
    let blocks = &split.blocks;
    let e = cones::identity(blocks, m);
    let (unit, _) = Scaling::new(blocks, &e, &e);
    let kkt = Kkt::new(split, &unit);
    // primal: minimize ||s|| subject to the linear constraints
    let (x, _, zp) = kkt.solve(&vec![0.0; n], &split.b, &split.h);
    let mut s: Vec<f64> = zp.iter().map(|v| -v).collect();
    cones::shift_interior(blocks, &mut s);
    // dual: minimize ||z|| subject to A'y + G'z + c = 0
    let neg_c: Vec<f64> = c.iter().map(|v| -v).collect();
    let (_, y, mut z) = kkt.solve(&neg_c, &vec![0.0; p], &vec![0.0; m]);
    cones::shift_interior(blocks, &mut z);
    Iterate { x, y, z, s, tau: 1.0, kappa: 1.0 }
}

fn finish(prog: &ConicProgram, split: &Split, it: Iterate, status: SolveStatus, iterations: usize) -> SolveReport {
    let (scale_primal, scale_dual) = match status {
        SolveStatus::Optimal | SolveStatus::MaxIterations => (1.0 / it.tau, 1.0 / it.tau),
        SolveStatus::Infeasible => {
            let byhz = cones::dot(&split.b, &it.y) + cones::dot(&split.h, &it.z);
            (f64::NAN, -1.0 / byhz)
        }
        SolveStatus::Unbounded => (-1.0 / cones::dot(&prog.c, &it.x), f64::NAN),
    };
    let sp = if scale_primal.is_nan() { 0.0 } else { scale_primal };
    let sd = if scale_dual.is_nan() { 0.0 } else { scale_dual };
    let z: Vec<f64> = it.x.iter().map(|v| v * sp).collect();
    let mut s = vec![0.0; prog.n_con()];
    let mut y = vec![0.0; prog.n_con()];
    for (row, &(eq, k)) in split.origin.iter().enumerate() {
        if eq {
            y[row] = it.y[k] * sd;
        } else {
            s[row] = it.s[k] * sp;
            y[row] = it.z[k] * sd;
        }
    }
    let mut report = SolveReport {
        status,
        objective: cones::dot(&prog.c, &z),
        z,
        s,
        y,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        gap: f64::NAN,
        iterations,
    };
    if matches!(status, SolveStatus::Optimal | SolveStatus::MaxIterations) {
        let r = super::certify(prog, &report);
        report.primal_residual = r.primal;
        report.dual_residual = r.dual;
        report.gap = r.gap;
    } else {
        report.objective = if status == SolveStatus::Infeasible { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    report
}

fn all_finite(it: &Iterate) -> bool {
    it.tau.is_finite()
        && it.kappa.is_finite()
        && it.x.iter().chain(&it.y).chain(&it.z).chain(&it.s).all(|v| v.is_finite())
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn add_assign(y: &mut [f64], x: &[f64]) {
    axpy(y, 1.0, x);
}
