//! Largest attainable target return and largest feasible radius of the
//! portfolio instance.
//!
//! With `G(x, xi) = <x, xi>` the Lipschitz constant is `||x||`, so the robust
//! return constraint is feasible at radius `eps` iff some simplex point has
//! `(m'x - mu) / (c(p) ||x||) >= eps`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dro::{c_factor, DroError};
use crate::model::{Portfolio, SampleMoments};
use crate::socp::{self, Cone, ConicProgram, SolveStatus, SparseMatrix, DEFAULT_MAX_ITER};

pub const BISECTION_CAP: usize = 60;
pub const BISECTION_REL_TOL: f64 = 1e-9;
/// Slack allowed above `mu_max` before a target counts as unattainable.
pub const MU_SLACK: f64 = 1e-12;
const SUBPROBLEM_TOL: f64 = 1e-10;
/// Used when the tight solve stalls on its accuracy floor.
const SUBPROBLEM_FALLBACK_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeasibilityError {
    #[error("target return {mu} exceeds the largest attainable mean {mu_max}")]
    MuAboveMax { mu: f64, mu_max: f64 },
    #[error(transparent)]
    Dro(#[from] DroError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub mu: f64,
    pub p: u32,
    pub mu_max: f64,
    pub eps_max: f64,
    pub achieving_portfolio: Portfolio,
    pub bisection_iterations: usize,
}

/// Largest sample mean over the simplex, attained at the best single asset.
pub fn mu_max(moments: &SampleMoments) -> f64 {
    moments.mean.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (j, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = j;
        }
    }
    best
}

/// `(m'x - mu) / ||x||`.
fn ratio(mean: &[f64], mu: f64, x: &[f64]) -> f64 {
    let num: f64 = mean.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - mu;
    num / x.iter().map(|w| w * w).sum::<f64>().sqrt()
}

/// `max m'x - k ||x||` over the simplex, as `(value, argmax)`.
fn penalized_max(mean: &[f64], k: f64) -> Result<(f64, Vec<f64>), DroError> {
    let m = mean.len();
    let n = m + 1;
    let v = m;
    let mut c: Vec<f64> = mean.iter().map(|x| -x).collect();
    c.push(k);
    let mut a = SparseMatrix::new(n);
    let mut b = Vec::new();
    a.push_row((0..m).map(|j| (j, 1.0)));
    b.push(1.0);
    for j in 0..m {
        a.push_row([(j, -1.0)]);
        b.push(0.0);
    }
    a.push_row([(v, -1.0)]);
    b.push(0.0);
    for j in 0..m {
        a.push_row([(j, -1.0)]);
        b.push(0.0);
    }
    let prog = ConicProgram { c, a, b, cones: vec![Cone::zero(1), Cone::nonneg(m), Cone::second_order(m + 1)] };
    let mut rep = socp::solve(&prog, SUBPROBLEM_TOL, DEFAULT_MAX_ITER)?;
    if rep.status == SolveStatus::MaxIterations {
        rep = socp::solve(&prog, SUBPROBLEM_FALLBACK_TOL, DEFAULT_MAX_ITER)?;
    }
    if rep.status != SolveStatus::Optimal {
        return Err(DroError::SolverFailed(rep.status));
    }
    let x = Portfolio::from_solver(&rep.z[..m])?;
    let value = x.dot(mean) - k * x.norm();
    Ok((value.max(-rep.objective), x.weights().to_vec()))
}

/// Largest radius keeping `m'x - eps c(p) ||x|| >= mu` feasible on the simplex.
///
/// Bisects on `k = eps c(p)` over `[0, sqrt(m) (max_j m_j - mu)]`; each step
/// solves the concave program `max m'x - k ||x||`. The reported value is the
/// best certified ratio found, divided by `c(p)`.
pub fn eps_max(moments: &SampleMoments, mu: f64, p: u32) -> Result<FeasibilityReport, FeasibilityError> {
    let c = c_factor(p)?;
    let mean: Vec<f64> = moments.mean.iter().copied().collect();
    let m = mean.len();
    let top = mu_max(moments);
    let vertex = |j: usize| {
        let mut w = vec![0.0; m];
        w[j] = 1.0;
        w
    };
    if mu > top + MU_SLACK {
        return Err(FeasibilityError::MuAboveMax { mu, mu_max: top });
    }
    if mu >= top - MU_SLACK {
        let x = Portfolio::new(vertex(argmax(&mean))).map_err(DroError::from)?;
        return Ok(FeasibilityReport {
            mu,
            p,
            mu_max: top,
            eps_max: 0.0,
            achieving_portfolio: x,
            bisection_iterations: 0,
        });
    }

    let mut best_x = vertex(argmax(&mean));
    let mut lo = ratio(&mean, mu, &best_x);
    let mut hi = (m as f64).sqrt() * (top - mu);
    let mut iterations = 0;
    while iterations < BISECTION_CAP && hi - lo > BISECTION_REL_TOL * hi {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let (value, x) = penalized_max(&mean, mid)?;
        let r = ratio(&mean, mu, &x);
        if r > lo {
            lo = r;
            best_x = x;
        }
        if value >= mu {
            lo = lo.max(mid);
        } else {
            hi = mid;
        }
        if lo > hi {
            hi = lo;
        }
    }
    let achieving_portfolio = Portfolio::new(best_x).map_err(DroError::from)?;
    let certified = ratio(&mean, mu, achieving_portfolio.weights()).max(0.0);
    Ok(FeasibilityReport {
        mu,
        p,
        mu_max: top,
        eps_max: certified.max(lo.min(hi)) / c,
        achieving_portfolio,
        bisection_iterations: iterations,
    })
}
