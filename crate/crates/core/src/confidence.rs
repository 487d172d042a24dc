//! Bootstrap estimate of how often a DRO solution keeps its return target
//! out of sample.
//!
//! Replicate `k` resamples `N` rows with replacement using ChaCha20 seeded
//! with `seed` on stream `k`, so every replicate is reproducible on its own
//! and parallel evaluation matches sequential evaluation exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dro::{self, DroError};
use crate::model::{compute_moments, DroConfig, ProblemKind, ReturnSample, SolutionStatus};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;
pub const DEFAULT_REPLICATES: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfidenceError {
    #[error("invalid bootstrap settings: {0}")]
    InvalidSettings(String),
    #[error("replicate {replicate}: {source}")]
    Replicate { replicate: usize, source: DroError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReplicateOutcome {
    Satisfied,
    Violated,
    /// The training problem had no feasible portfolio at this radius.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceReport {
    pub kind: ProblemKind,
    pub epsilon: f64,
    pub mu: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub n_train: usize,
    pub n_valid: usize,
    pub level_percent: f64,
    pub per_replicate: Vec<ReplicateOutcome>,
    pub all_infeasible: bool,
    pub seed: u64,
}

/// Sizes of the train and validation parts for a sample of `n` rows.
pub fn split_sizes(n: usize, train_fraction: f64) -> Result<(usize, usize), ConfidenceError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(ConfidenceError::InvalidSettings(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n_train = (train_fraction * n as f64).ceil() as usize;
    if n_train >= n {
        return Err(ConfidenceError::InvalidSettings(format!(
            "a sample of {n} rows leaves no validation rows at train fraction {train_fraction}"
        )));
    }
    Ok((n_train, n - n_train))
}

/// Row indices drawn for replicate `replicate`.
pub fn resample_indices(n: usize, seed: u64, replicate: usize) -> Vec<usize> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

fn replicate(
    sample: &ReturnSample,
    cfg: &DroConfig,
    kind: ProblemKind,
    n_train: usize,
    seed: u64,
    k: usize,
) -> Result<ReplicateOutcome, DroError> {
    let idx = resample_indices(sample.n(), seed, k);
    let train = sample.select_rows(&idx[..n_train])?;
    let valid = sample.select_rows(&idx[n_train..])?;
    let sol = dro::solve_portfolio(kind, &train, &compute_moments(&train), cfg)?;
    match (sol.status, sol.portfolio) {
        (SolutionStatus::Optimal, Some(x)) => {
            let r = valid.portfolio_returns(x.weights());
            let mean = r.iter().sum::<f64>() / r.len() as f64;
            Ok(if mean >= cfg.mu { ReplicateOutcome::Satisfied } else { ReplicateOutcome::Violated })
        }
        _ => Ok(ReplicateOutcome::Infeasible),
    }
}

pub fn expected_confidence(
    sample: &ReturnSample,
    cfg: &DroConfig,
    kind: ProblemKind,
    replicates: usize,
    train_fraction: f64,
    seed: u64,
) -> Result<ConfidenceReport, ConfidenceError> {
    if replicates == 0 {
        return Err(ConfidenceError::InvalidSettings("at least one replicate is required".into()));
    }
    let (n_train, n_valid) = split_sizes(sample.n(), train_fraction)?;
    let per_replicate = (0..replicates)
        .into_par_iter()
        .map(|k| {
            replicate(sample, cfg, kind, n_train, seed, k)
                .map_err(|source| ConfidenceError::Replicate { replicate: k, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let satisfied = per_replicate.iter().filter(|o| **o == ReplicateOutcome::Satisfied).count();
    Ok(ConfidenceReport {
        kind,
        epsilon: cfg.epsilon,
        mu: cfg.mu,
        k: replicates,
        n_train,
        n_valid,
        level_percent: 100.0 * satisfied as f64 / replicates as f64,
        all_infeasible: per_replicate.iter().all(|o| *o == ReplicateOutcome::Infeasible),
        per_replicate,
        seed,
    })
}
