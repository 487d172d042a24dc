#![allow(dead_code)]
//! Independent oracles and instance generators shared by the integration
//! tests. Nothing here calls into the library's solvers.

use ddro::market_sim::{self, MarketModel};
use ddro::model::{compute_moments, ReturnSample, SampleMoments};
use ddro::socp::{Cone, ConicProgram, SparseMatrix};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// A draw from the standard market with `m` assets.
pub fn fixture(seed: u64, m: usize, n: usize) -> ReturnSample {
    market_sim::generate(&MarketModel::standard(m), n, seed).unwrap()
}

/// A target strictly between the smallest and largest sample means.
pub fn mid_target(moments: &SampleMoments) -> f64 {
    let lo = moments.mean.min();
    let hi = moments.mean.max();
    lo + 0.6 * (hi - lo)
}

/// `min_tau tau + sum (l - tau)_+ / (alpha N)`, with `tau` scanned over the
/// losses (the minimum of a convex piecewise-linear function sits on a kink).
pub fn cvar_scan(losses: &[f64], alpha: f64) -> f64 {
    let mut l = losses.to_vec();
    l.sort_by(|a, b| b.total_cmp(a));
    let n = l.len() as f64;
    let mut best = f64::INFINITY;
    let mut prefix = 0.0;
    for (k, &tau) in l.iter().enumerate() {
        // l[..k] are the losses above tau
        let v = tau + (prefix - k as f64 * tau) / (alpha * n);
        best = best.min(v);
        prefix += tau;
    }
    best
}

/// Calls `f` on every simplex point whose coordinates are multiples of
/// `1 / k`.
pub fn for_each_grid_point(m: usize, k: usize, mut f: impl FnMut(&[f64])) {
    let mut counts = vec![0usize; m];
    let mut x = vec![0.0; m];
    fn rec(j: usize, left: usize, k: usize, counts: &mut [usize], x: &mut [f64], f: &mut dyn FnMut(&[f64])) {
        let m = counts.len();
        if j == m - 1 {
            counts[j] = left;
            for i in 0..m {
                x[i] = counts[i] as f64 / k as f64;
            }
            f(x);
            return;
        }
        for c in 0..=left {
            counts[j] = c;
            rec(j + 1, left - c, k, counts, x, f);
        }
    }
    rec(0, k, k, &mut counts, &mut x, &mut f);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Grid brute force of the robust programs. Returns `None` if no grid point
/// meets the robust return constraint.
pub fn brute_force_mv(moments: &SampleMoments, eps: f64, mu: f64, step_inv: usize) -> Option<f64> {
    let m = moments.m();
    let mean: Vec<f64> = moments.mean.iter().copied().collect();
    let cov = &moments.covariance;
    let mut best: Option<f64> = None;
    for_each_grid_point(m, step_inv, |x| {
        let nx = norm(x);
        if dot(&mean, x) - eps * nx < mu {
            return;
        }
        let mut v = 0.0;
        for i in 0..m {
            for j in 0..m {
                v += x[i] * cov[(i, j)] * x[j];
            }
        }
        let obj = (v.max(0.0).sqrt() + eps * nx).powi(2);
        best = Some(best.map_or(obj, |b: f64| b.min(obj)));
    });
    best
}

pub fn brute_force_cvar(sample: &ReturnSample, eps: f64, mu: f64, alpha: f64, step_inv: usize) -> Option<f64> {
    let m = sample.m();
    let n = sample.n();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| sample.row(i)).collect();
    let mean: Vec<f64> = (0..m).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let mut losses = vec![0.0; n];
    let mut best: Option<f64> = None;
    for_each_grid_point(m, step_inv, |x| {
        let nx = norm(x);
        if dot(&mean, x) - eps * nx < mu {
            return;
        }
        for (l, r) in losses.iter_mut().zip(&rows) {
            *l = -dot(r, x);
        }
        let obj = eps / alpha * nx + cvar_scan(&losses, alpha);
        best = Some(best.map_or(obj, |b: f64| b.min(obj)));
    });
    best
}

/// Exact `min x' S x` over `{x in simplex, m'x >= mu}` by enumerating
/// supports and the activity of the return constraint, solving each
/// equality-constrained KKT system directly.
pub fn saa_min_variance(moments: &SampleMoments, mu: f64) -> Option<(f64, Vec<f64>)> {
    let m = moments.m();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << m) {
        let s: Vec<usize> = (0..m).filter(|j| mask & (1 << j) != 0).collect();
        for active in [false, true] {
            let k = s.len();
            let dim = k + 1 + active as usize;
            let mut kkt = DMatrix::zeros(dim, dim);
            let mut rhs = DVector::zeros(dim);
            for (a, &i) in s.iter().enumerate() {
                for (b, &j) in s.iter().enumerate() {
                    kkt[(a, b)] = 2.0 * moments.covariance[(i, j)];
                }
                kkt[(a, k)] = 1.0;
                kkt[(k, a)] = 1.0;
                if active {
                    kkt[(a, k + 1)] = moments.mean[i];
                    kkt[(k + 1, a)] = moments.mean[i];
                }
            }
            rhs[k] = 1.0;
            if active {
                rhs[k + 1] = mu;
            }
            let Some(sol) = kkt.lu().solve(&rhs) else { continue };
            let mut x = vec![0.0; m];
            for (a, &i) in s.iter().enumerate() {
                x[i] = sol[a];
            }
            if x.iter().any(|v| *v < -1e-12) || dot(moments.mean.as_slice(), &x) < mu - 1e-12 {
                continue;
            }
            let v = moments.variance_of(&x);
            if best.as_ref().is_none_or(|b| v < b.0) {
                best = Some((v, x));
            }
        }
    }
    best
}

pub enum Lp {
    Optimal(f64, Vec<f64>),
    Infeasible,
    Unbounded,
}

/// Dense two-phase tableau simplex with Bland's rule for
/// `min c'x  s.t.  Ax = b, x >= 0`.
pub fn simplex(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Lp {
    const TOL: f64 = 1e-10;
    let (rows, n) = (a.len(), c.len());
    let width = n + rows + 1;
    let rhs = width - 1;
    let mut t = vec![vec![0.0; width]; rows];
    for i in 0..rows {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][rhs] = sign * b[i];
    }
    let mut basis: Vec<usize> = (n..n + rows).collect();

    fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, col: usize) {
        let p = t[r][col];
        t[r].iter_mut().for_each(|v| *v /= p);
        let pr = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && row[col] != 0.0 {
                let f = row[col];
                row.iter_mut().zip(&pr).for_each(|(v, q)| *v -= f * q);
            }
        }
        basis[r] = col;
    }
    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], allowed: usize| -> bool {
        loop {
            let mut enter = None;
            for j in 0..allowed {
                if basis.contains(&j) {
                    continue;
                }
                let r = cost[j] - (0..rows).map(|i| cost[basis[i]] * t[i][j]).sum::<f64>();
                if r < -TOL {
                    enter = Some(j);
                    break;
                }
            }
            let Some(j) = enter else { return true };
            let mut leave: Option<usize> = None;
            for i in 0..rows {
                if t[i][j] > TOL {
                    let ratio = t[i][rhs] / t[i][j];
                    match leave {
                        None => leave = Some(i),
                        Some(l) => {
                            let lr = t[l][rhs] / t[l][j];
                            if ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && basis[i] < basis[l]) {
                                leave = Some(i);
                            }
                        }
                    }
                }
            }
            let Some(i) = leave else { return false };
            pivot(t, basis, i, j);
        }
    };

    let mut cost1 = vec![0.0; n + rows];
    cost1[n..].iter_mut().for_each(|v| *v = 1.0);
    run(&mut t, &mut basis, &cost1, n + rows);
    let infeas: f64 = (0..rows).filter(|&i| basis[i] >= n).map(|i| t[i][rhs]).sum();
    if infeas > 1e-9 {
        return Lp::Infeasible;
    }
    for i in 0..rows {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > 1e-9) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    let mut cost2 = c.to_vec();
    cost2.extend(std::iter::repeat_n(0.0, rows));
    if !run(&mut t, &mut basis, &cost2, n) {
        return Lp::Unbounded;
    }
    let mut x = vec![0.0; n];
    for i in 0..rows {
        if basis[i] < n {
            x[basis[i]] = t[i][rhs];
        }
    }
    Lp::Optimal(dot(c, &x), x)
}

/// Rockafellar-Uryasev LP `min tau + sum u / (alpha N)` with
/// `u_i >= -r_i'x - tau`, `u >= 0`, `x` in the simplex and `m'x >= mu`.
pub fn saa_min_cvar(sample: &ReturnSample, alpha: f64, mu: f64) -> Option<f64> {
    let (n, m) = (sample.n(), sample.m());
    // columns: x (m), tau+, tau-, u (n), s (n), slack t
    let nv = m + 2 + 2 * n + 1;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        let mut row = vec![0.0; nv];
        let r = sample.row(i);
        row[..m].copy_from_slice(&r);
        row[m] = 1.0;
        row[m + 1] = -1.0;
        row[m + 2 + i] = 1.0;
        row[m + 2 + n + i] = -1.0;
        a.push(row);
        b.push(0.0);
    }
    let mut row = vec![0.0; nv];
    row[..m].iter_mut().for_each(|v| *v = 1.0);
    a.push(row);
    b.push(1.0);
    let mean = compute_moments(sample).mean;
    let mut row = vec![0.0; nv];
    row[..m].copy_from_slice(mean.as_slice());
    row[nv - 1] = -1.0;
    a.push(row);
    b.push(mu);
    let mut c = vec![0.0; nv];
    c[m] = 1.0;
    c[m + 1] = -1.0;
    for i in 0..n {
        c[m + 2 + i] = 1.0 / (alpha * n as f64);
    }
    match simplex(&c, &a, &b) {
        Lp::Optimal(v, _) => Some(v),
        _ => None,
    }
}

/// A bounded random LP `min c'x s.t. Gx <= h` with `0 <= x <= 1` among its
/// rows and the origin strictly feasible.
pub struct RandomLp {
    pub c: Vec<f64>,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<f64>,
}

impl RandomLp {
    pub fn new(seed: u64) -> Self {
        let mut r = rng(seed);
        let n = r.random_range(1..=6usize);
        let extra = r.random_range(0..=4usize);
        let c = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let mut g = Vec::new();
        let mut h = Vec::new();
        for j in 0..n {
            let mut up = vec![0.0; n];
            up[j] = 1.0;
            g.push(up);
            h.push(1.0);
            let mut lo = vec![0.0; n];
            lo[j] = -1.0;
            g.push(lo);
            h.push(r.random_range(0.1..1.0));
        }
        for _ in 0..extra {
            g.push((0..n).map(|_| r.random_range(-1.0..1.0)).collect());
            h.push(r.random_range(0.1..1.0));
        }
        Self { c, g, h }
    }

    pub fn program(&self) -> ConicProgram {
        let n = self.c.len();
        ConicProgram {
            c: self.c.clone(),
            a: SparseMatrix::from_dense(&self.g, n),
            b: self.h.clone(),
            cones: vec![Cone::nonneg(self.g.len())],
        }
    }

    /// Optimal value by enumerating every basis of `n` tight rows.
    pub fn vertex_optimum(&self) -> f64 {
        let mut best = f64::INFINITY;
        self.for_each_vertex(|x| best = best.min(dot(&self.c, x)));
        best
    }

    /// Strict complementarity margin of the optimum: the smaller of the
    /// least multiplier on a tight row and the least slack on the others.
    /// Zero when the optimal vertex is degenerate or not unique.
    pub fn margin(&self) -> f64 {
        let n = self.c.len();
        let best = self.vertex_optimum();
        let mut vertices = Vec::new();
        self.for_each_vertex(|x| {
            if dot(&self.c, x) <= best + 1e-9 {
                vertices.push(x.to_vec());
            }
        });
        if vertices.len() != 1 {
            return 0.0;
        }
        let x = &vertices[0];
        let slack: Vec<f64> = self.g.iter().zip(&self.h).map(|(g, h)| h - dot(g, x)).collect();
        let tight: Vec<usize> = (0..slack.len()).filter(|&i| slack[i] <= 1e-9).collect();
        if tight.len() != n {
            return 0.0;
        }
        // c + G_T' lambda = 0
        let gt = DMatrix::from_fn(n, n, |i, j| self.g[tight[j]][i]);
        let rhs = DVector::from_fn(n, |i, _| -self.c[i]);
        let Some(lambda) = gt.lu().solve(&rhs) else { return 0.0 };
        let low_slack = (0..slack.len()).filter(|i| !tight.contains(i)).map(|i| slack[i]).fold(f64::INFINITY, f64::min);
        lambda.min().min(low_slack)
    }

    fn for_each_vertex(&self, mut f: impl FnMut(&[f64])) {
        let n = self.c.len();
        let k = self.g.len();
        let mut pick: Vec<usize> = (0..n).collect();
        loop {
            let a = DMatrix::from_fn(n, n, |i, j| self.g[pick[i]][j]);
            let rhs = DVector::from_fn(n, |i, _| self.h[pick[i]]);
            if a.determinant().abs() > 1e-10 {
                if let Some(x) = a.lu().solve(&rhs) {
                    let x = x.as_slice();
                    if self.g.iter().zip(&self.h).all(|(g, h)| dot(g, x) <= h + 1e-9) {
                        f(x);
                    }
                }
            }
            let mut i = n;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                if pick[i] < k - n + i {
                    pick[i] += 1;
                    for j in i + 1..n {
                        pick[j] = pick[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
}

/// Euclidean projection of a point onto a random polytope written as an
/// SOCP: `min t s.t. ||x - x0|| <= t, Gx <= h`. Variables are `(x, t)`.
pub struct Projection {
    pub x0: Vec<f64>,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<f64>,
}

impl Projection {
    pub fn new(seed: u64) -> Self {
        let mut r = rng(seed);
        let n = r.random_range(2..=5usize);
        let k = r.random_range(1..=5usize);
        let x0 = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
        let mut g = Vec::new();
        let mut h = Vec::new();
        for _ in 0..k {
            g.push((0..n).map(|_| r.random_range(-1.0..1.0)).collect());
            h.push(r.random_range(0.1..1.0));
        }
        Self { x0, g, h }
    }

    pub fn program(&self) -> ConicProgram {
        let n = self.x0.len();
        let mut a = SparseMatrix::new(n + 1);
        let mut b = Vec::new();
        for (g, h) in self.g.iter().zip(&self.h) {
            a.push_row(g.iter().copied().enumerate());
            b.push(*h);
        }
        a.push_row([(n, -1.0)]);
        b.push(0.0);
        for j in 0..n {
            a.push_row([(j, -1.0)]);
            b.push(-self.x0[j]);
        }
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        ConicProgram { c, a, b, cones: vec![Cone::nonneg(self.g.len()), Cone::second_order(n + 1)] }
    }
}

/// A copy of `p` with the objective and every linear row multiplied by
/// factors drawn from `[0.1, 10]`, and the largest factor used.
pub fn rescaled(p: &ConicProgram, seed: u64) -> (ConicProgram, f64) {
    let mut g = rng(seed.wrapping_add(5000));
    let factors: Vec<f64> = (0..p.n_con()).map(|_| 10f64.powf(g.random_range(-1.0..1.0))).collect();
    let obj = 10f64.powf(g.random_range(-1.0..1.0));
    let scale = factors.iter().fold(obj, |a, f| a.max(*f)).max(1.0);
    (p.with_scaled_objective(obj).with_scaled_linear_rows(&factors), scale)
}

/// A random LP made infeasible by a pair of opposing halfspaces
/// `a'x <= b` and `-a'x <= -b - gap`.
pub fn contradictory(seed: u64) -> ConicProgram {
    let lp = RandomLp::new(seed);
    let mut r = rng(seed ^ 0x9e37_79b9);
    let n = lp.c.len();
    let dir: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let level = r.random_range(-0.5..0.5);
    let gap = r.random_range(0.05..0.5);
    let mut g = lp.g.clone();
    let mut h = lp.h.clone();
    g.push(dir.clone());
    h.push(level);
    g.push(dir.iter().map(|v| -v).collect());
    h.push(-level - gap);
    let k = g.len();
    ConicProgram { c: lp.c.clone(), a: SparseMatrix::from_dense(&g, n), b: h, cones: vec![Cone::nonneg(k)] }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}
