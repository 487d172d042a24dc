//! Cone arithmetic for the interior-point iteration: Jordan products,
//! Nesterov-Todd scaling and step-to-boundary computations over a product
//! of nonnegative orthants and second-order cones.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BlockKind {
    Nonneg,
    Soc,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Block {
    pub kind: BlockKind,
    pub start: usize,
    pub dim: usize,
}

impl Block {
    fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.dim
    }
}

/// Barrier degree of the product cone.
pub(crate) fn degree(blocks: &[Block]) -> usize {
    blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::Nonneg => b.dim,
            BlockKind::Soc => 1,
        })
        .sum()
}

pub(crate) fn identity(blocks: &[Block], len: usize) -> Vec<f64> {
    let mut e = vec![0.0; len];
    for b in blocks {
        match b.kind {
            BlockKind::Nonneg => e[b.range()].iter_mut().for_each(|v| *v = 1.0),
            BlockKind::Soc => e[b.start] = 1.0,
        }
    }
    e
}

/// `u o v`
pub(crate) fn circ(blocks: &[Block], u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for b in blocks {
        let r = b.range();
        match b.kind {
            BlockKind::Nonneg => {
                for i in r {
                    out[i] = u[i] * v[i];
                }
            }
            BlockKind::Soc => {
                let (u0, v0) = (u[b.start], v[b.start]);
                out[b.start] = dot(&u[r.clone()], &v[r.clone()]);
                for i in b.start + 1..r.end {
                    out[i] = u0 * v[i] + v0 * u[i];
                }
            }
        }
    }
    out
}

/// Solves `lambda o x = r` for `x`.
pub(crate) fn inv_circ(blocks: &[Block], lambda: &[f64], r: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; r.len()];
    for b in blocks {
        let rg = b.range();
        match b.kind {
            BlockKind::Nonneg => {
                for i in rg {
                    out[i] = r[i] / lambda[i];
                }
            }
            BlockKind::Soc => {
                let l0 = lambda[b.start];
                let l1 = &lambda[b.start + 1..rg.end];
                let r0 = r[b.start];
                let r1 = &r[b.start + 1..rg.end];
                let det = soc_residual(l0, l1);
                let x0 = (l0 * r0 - dot(l1, r1)) / det;
                out[b.start] = x0;
                for (k, i) in (b.start + 1..rg.end).enumerate() {
                    out[i] = (r1[k] - x0 * l1[k]) / l0;
                }
            }
        }
    }
    out
}

fn soc_residual(t: f64, u: &[f64]) -> f64 {
    // (t - |u|)(t + |u|) is better conditioned than t^2 - |u|^2
    let nu = norm(u);
    (t - nu) * (t + nu)
}

/// Nesterov-Todd scaling `W` with `W z = W^{-1} s = lambda`.
#[derive(Debug, Clone)]
pub(crate) struct Scaling {
    blocks: Vec<BlockScaling>,
}

#[derive(Debug, Clone)]
enum BlockScaling {
    /// Diagonal of `W`.
    Nonneg { start: usize, w: Vec<f64> },
    /// `W = eta * [[a, b'], [b, I + b b' / (1 + a)]]` with `a^2 - |b|^2 = 1`.
    Soc { start: usize, eta: f64, a: f64, b: Vec<f64> },
}

impl Scaling {
    /// Returns the scaling and the scaled point `lambda`.
    pub fn new(blocks: &[Block], s: &[f64], z: &[f64]) -> (Self, Vec<f64>) {
        let mut out = Vec::with_capacity(blocks.len());
        for blk in blocks {
            let r = blk.range();
            match blk.kind {
                BlockKind::Nonneg => {
                    let w = r.map(|i| (s[i] / z[i]).sqrt()).collect();
                    out.push(BlockScaling::Nonneg { start: blk.start, w });
                }
                BlockKind::Soc => {
                    let (s0, s1) = (s[blk.start], &s[blk.start + 1..r.end]);
                    let (z0, z1) = (z[blk.start], &z[blk.start + 1..r.end]);
                    let sres = soc_residual(s0, s1).max(f64::MIN_POSITIVE);
                    let zres = soc_residual(z0, z1).max(f64::MIN_POSITIVE);
                    let (sn, zn) = (sres.sqrt(), zres.sqrt());
                    let sz = (s0 * z0 + dot(s1, z1)) / (sn * zn);
                    let gamma = ((1.0 + sz) / 2.0).max(1.0).sqrt();
                    let b: Vec<f64> = s1.iter().zip(z1).map(|(si, zi)| (si / sn - zi / zn) / (2.0 * gamma)).collect();
                    // a = (s0/sn + z0/zn) / (2 gamma) in exact arithmetic
                    let a = (1.0 + dot(&b, &b)).sqrt();
                    let eta = (sres / zres).powf(0.25);
                    out.push(BlockScaling::Soc { start: blk.start, eta, a, b });
                }
            }
        }
        let scaling = Self { blocks: out };
        let lambda = scaling.apply(z, false);
        (scaling, lambda)
    }

    /// `W v` (or `W^{-1} v` when `inverse`).
    pub fn apply(&self, v: &[f64], inverse: bool) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for blk in &self.blocks {
            match blk {
                BlockScaling::Nonneg { start, w } => {
                    for (k, wi) in w.iter().enumerate() {
                        let i = start + k;
                        out[i] = if inverse { v[i] / wi } else { v[i] * wi };
                    }
                }
                BlockScaling::Soc { start, eta, a, b } => {
                    let (sign, scale) = if inverse { (-1.0, 1.0 / eta) } else { (1.0, *eta) };
                    let v0 = v[*start];
                    let v1 = &v[start + 1..start + 1 + b.len()];
                    let bv = dot(b, v1);
                    out[*start] = scale * (a * v0 + sign * bv);
                    let coef = sign * v0 + bv / (1.0 + a);
                    for (k, bk) in b.iter().enumerate() {
                        out[start + 1 + k] = scale * (v1[k] + coef * bk);
                    }
                }
            }
        }
        out
    }

    /// `W^2 v`
    pub fn apply_sq(&self, v: &[f64]) -> Vec<f64> {
        let t = self.apply(v, false);
        self.apply(&t, false)
    }

    /// `W^{-2}` block by block.
    pub fn inv_sq_blocks(&self) -> impl Iterator<Item = InvSq> + '_ {
        self.blocks.iter().map(|blk| match blk {
            BlockScaling::Nonneg { start, w } => {
                InvSq::Diag { start: *start, d: w.iter().map(|wi| 1.0 / (wi * wi)).collect() }
            }
            BlockScaling::Soc { start, eta, a, b } => {
                let mut q = Vec::with_capacity(b.len() + 1);
                q.push(*a);
                q.extend(b.iter().map(|x| -x));
                InvSq::Soc { start: *start, f: 1.0 / (eta * eta), q }
            }
        })
    }
}

/// One block of `W^{-2}`: `Diag(d)`, or `f (2 q q' - J)` for a
/// second-order block.
pub(crate) enum InvSq {
    Diag { start: usize, d: Vec<f64> },
    Soc { start: usize, f: f64, q: Vec<f64> },
}

/// Largest `alpha` (capped at `cap`) with `u + alpha du` in the cone.
pub(crate) fn max_step(blocks: &[Block], u: &[f64], du: &[f64], cap: f64) -> f64 {
    let mut alpha = cap;
    for blk in blocks {
        let r = blk.range();
        match blk.kind {
            BlockKind::Nonneg => {
                for i in r {
                    if du[i] < 0.0 {
                        alpha = alpha.min(-u[i] / du[i]);
                    }
                }
            }
            BlockKind::Soc => {
                alpha = alpha.min(soc_step(&u[r.clone()], &du[r]));
            }
        }
    }
    alpha.max(0.0)
}

/// First positive root of `q(t) = (u0 + t d0)^2 - |u1 + t d1|^2`, or
/// infinity if the ray never leaves the cone.
fn soc_step(u: &[f64], d: &[f64]) -> f64 {
    let (u0, u1) = (u[0], &u[1..]);
    let (d0, d1) = (d[0], &d[1..]);
    let qa = d0 * d0 - dot(d1, d1);
    let qb = u0 * d0 - dot(u1, d1);
    let qc = soc_residual(u0, u1).max(0.0);
    let mut best = f64::INFINITY;
    if qa.abs() <= 1e-14 * (d0 * d0 + dot(d1, d1)).max(f64::MIN_POSITIVE) {
        if qb < 0.0 {
            best = -qc / (2.0 * qb);
        }
    } else {
        let disc = qb * qb - qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // numerically stable roots of qa t^2 + 2 qb t + qc
            let t1 = if qb >= 0.0 { -(qb + sq) } else { -qb + sq };
            let roots = [t1 / qa, if t1 != 0.0 { qc / t1 } else { f64::INFINITY }];
            for t in roots {
                if t > 0.0 && t.is_finite() {
                    best = best.min(t);
                }
            }
        }
    }
    // leaving through the negative sheet would require passing the apex
    if d0 < 0.0 {
        best = best.min(-u0 / d0);
    }
    best
}

/// Moves `u` into the interior: `u + (1 + a) e` where `a` is the most
/// negative "eigenvalue" of `u`, if any.
pub(crate) fn shift_interior(blocks: &[Block], u: &mut [f64]) {
    let mut worst = f64::NEG_INFINITY;
    for blk in blocks {
        let r = blk.range();
        match blk.kind {
            BlockKind::Nonneg => {
                for i in r {
                    worst = worst.max(-u[i]);
                }
            }
            BlockKind::Soc => {
                let nu = norm(&u[blk.start + 1..r.end]);
                worst = worst.max(nu - u[blk.start]);
            }
        }
    }
    if worst >= 0.0 {
        let shift = 1.0 + worst;
        let e = identity(blocks, u.len());
        for (ui, ei) in u.iter_mut().zip(e) {
            *ui += shift * ei;
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
