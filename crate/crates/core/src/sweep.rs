//! Repeated out-of-sample evaluation over a grid of radii.
//!
//! Each run draws a fresh sample, solves both portfolio programs at every grid
//! radius, and scores the solution against the true distribution (or, for a
//! bootstrap over observed data, against the full data set).

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::confidence::resample_indices;
use crate::dro::{self, DroError};
use crate::feasibility::{self, FeasibilityError};
use crate::market_sim::{self, MarketModel};
use crate::model::{
    compute_moments, format_float, DroConfig, ModelError, ProblemKind, ReturnSample, SampleMoments, SolutionStatus,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Invalid(String),
    #[error("run {run}: {msg}")]
    Run { run: usize, msg: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Where the runs' samples come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// Fresh draws of `n` rows from the model; scored by the model's oracles.
    Model { model: MarketModel, n: usize },
    /// Bootstrap resamples of the data; scored against the full data.
    Data(ReturnSample),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EpsGrid {
    /// The same radii in every run.
    Absolute(Vec<f64>),
    /// Multiples of each run's own largest feasible radius.
    FractionOfEpsMax(Vec<f64>),
    /// `points` radii evenly spaced on `[0, fraction * min_run eps_max]`,
    /// shared by all runs.
    CommonFeasible { points: usize, fraction: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub source: Source,
    pub runs: usize,
    pub seed: u64,
    pub mu: f64,
    pub alpha: f64,
    pub grid: EpsGrid,
    pub kinds: Vec<ProblemKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowStatus {
    Optimal,
    /// Radius above the run's largest feasible radius, or solver-reported.
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub run: usize,
    pub epsilon: f64,
    pub kind: ProblemKind,
    pub status: RowStatus,
    pub eps_max: f64,
    pub true_return: f64,
    pub true_variance: f64,
    pub true_cvar: f64,
    pub sharpe: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub mean: f64,
    pub q20: f64,
    pub q80: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub kind: ProblemKind,
    /// Grid position; radii differ per run under `FractionOfEpsMax`.
    pub grid_index: usize,
    pub epsilon: f64,
    pub feasible_runs: usize,
    /// Share of feasible runs whose true return reaches `mu`.
    pub constraint_rate: f64,
    pub true_return: Band,
    pub true_variance: Band,
    pub true_cvar: Band,
    pub sharpe: Band,
    pub objective: Band,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// Sorted by run, grid position, then kind.
    pub rows: Vec<SweepRow>,
    pub grid_index: Vec<usize>,
    pub aggregate: Vec<AggregateRow>,
}

/// Sample quantile with linear interpolation between order statistics
/// (the `(n - 1) q` convention).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

struct Truth {
    moments: SampleMoments,
    model: Option<MarketModel>,
    full: Option<ReturnSample>,
}

impl Truth {
    fn score(&self, x: &[f64], alpha: f64) -> (f64, f64, f64) {
        match (&self.model, &self.full) {
            (Some(m), _) => (
                market_sim::true_return(m, x),
                market_sim::true_variance(m, x),
                market_sim::true_cvar_gaussian(m, x, alpha),
            ),
            (None, Some(data)) => {
                let losses: Vec<f64> = data.portfolio_returns(x).iter().map(|r| -r).collect();
                (self.moments.mean_of(x), self.moments.variance_of(x), crate::backtest::empirical_cvar(&losses, alpha))
            }
            _ => unreachable!("sweep truth without model or data"),
        }
    }
}

fn draw(cfg: &SweepConfig, run: usize) -> Result<ReturnSample, ModelError> {
    match &cfg.source {
        Source::Model { model, n } => market_sim::generate_stream(model, *n, cfg.seed, run as u64),
        Source::Data(data) => data.select_rows(&resample_indices(data.n(), cfg.seed, run)),
    }
}

fn run_eps_max(sample: &SampleMoments, mu: f64) -> Result<f64, DroError> {
    match feasibility::eps_max(sample, mu, 2) {
        Ok(r) => Ok(r.eps_max),
        Err(FeasibilityError::MuAboveMax { .. }) => Ok(f64::NEG_INFINITY),
        Err(FeasibilityError::Dro(e)) => Err(e),
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport, SweepError> {
    if cfg.runs == 0 {
        return Err(SweepError::Invalid("at least one run is required".into()));
    }
    if cfg.kinds.is_empty() {
        return Err(SweepError::Invalid("no problem kinds".into()));
    }
    DroConfig { alpha: cfg.alpha, mu: cfg.mu, ..DroConfig::default() }.validate()?;
    let truth = match &cfg.source {
        Source::Model { model, n } => {
            if *n == 0 {
                return Err(SweepError::Invalid("sample size must be positive".into()));
            }
            model.validate()?;
            Truth { moments: market_sim::true_moments(model), model: Some(model.clone()), full: None }
        }
        Source::Data(d) => Truth { moments: compute_moments(d), model: None, full: Some(d.clone()) },
    };

    let err = |run: usize| move |e: DroError| SweepError::Run { run, msg: e.to_string() };
    let samples: Vec<(ReturnSample, SampleMoments, f64)> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let s = draw(cfg, run)?;
            let mm = compute_moments(&s);
            let e = run_eps_max(&mm, cfg.mu).map_err(err(run))?;
            Ok((s, mm, e))
        })
        .collect::<Result<_, SweepError>>()?;

    let grid_for = |eps_max: f64| -> Vec<f64> {
        match &cfg.grid {
            EpsGrid::Absolute(g) => g.clone(),
            EpsGrid::FractionOfEpsMax(f) => f.iter().map(|k| k * eps_max.max(0.0)).collect(),
            EpsGrid::CommonFeasible { points, fraction } => {
                let min = samples.iter().map(|s| s.2).fold(f64::INFINITY, f64::min).max(0.0);
                let top = fraction * min;
                let p = *points;
                (0..p).map(|k| if p > 1 { top * k as f64 / (p - 1) as f64 } else { top }).collect()
            }
        }
    };
    if let EpsGrid::CommonFeasible { points, .. } = cfg.grid {
        if points == 0 {
            return Err(SweepError::Invalid("grid needs at least one point".into()));
        }
    }

    let jobs: Vec<(usize, usize, usize)> = (0..cfg.runs)
        .flat_map(|r| {
            let g = grid_for(samples[r].2).len();
            (0..g).flat_map(move |e| (0..cfg.kinds.len()).map(move |k| (r, e, k)))
        })
        .collect();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(run, e, k)| {
            let (sample, mm, eps_max) = &samples[run];
            let epsilon = grid_for(*eps_max)[e];
            let kind = cfg.kinds[k];
            let infeasible = SweepRow {
                run,
                epsilon,
                kind,
                status: RowStatus::Infeasible,
                eps_max: *eps_max,
                true_return: f64::NAN,
                true_variance: f64::NAN,
                true_cvar: f64::NAN,
                sharpe: f64::NAN,
                objective: f64::NAN,
            };
            if epsilon > *eps_max {
                return Ok(infeasible);
            }
            let dcfg = DroConfig { epsilon, mu: cfg.mu, alpha: cfg.alpha, ..DroConfig::default() };
            let sol = dro::solve_portfolio(kind, sample, mm, &dcfg).map_err(err(run))?;
            match (sol.status, sol.portfolio) {
                (SolutionStatus::Optimal, Some(x)) => {
                    let (r, v, c) = truth.score(x.weights(), cfg.alpha);
                    Ok(SweepRow {
                        status: RowStatus::Optimal,
                        true_return: r,
                        true_variance: v,
                        true_cvar: c,
                        sharpe: if v > 0.0 { r / v.sqrt() } else { f64::NAN },
                        objective: sol.objective,
                        ..infeasible
                    })
                }
                _ => Ok(infeasible),
            }
        })
        .collect::<Result<_, SweepError>>()?;
    let grid_index: Vec<usize> = jobs.iter().map(|j| j.1).collect();

    let points = jobs.iter().map(|j| j.1 + 1).max().unwrap_or(0);
    let mut aggregate = Vec::new();
    for &kind in &cfg.kinds {
        for gi in 0..points {
            let sel: Vec<&SweepRow> =
                rows.iter().zip(&grid_index).filter(|(r, g)| r.kind == kind && **g == gi).map(|(r, _)| r).collect();
            let ok: Vec<&SweepRow> = sel.iter().copied().filter(|r| r.status == RowStatus::Optimal).collect();
            let band = |f: fn(&SweepRow) -> f64| {
                let v: Vec<f64> = ok.iter().map(|r| f(r)).filter(|x| x.is_finite()).collect();
                let mean = if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
                Band { mean, q20: quantile(&v, 0.2), q80: quantile(&v, 0.8) }
            };
            let eps: Vec<f64> = sel.iter().map(|r| r.epsilon).collect();
            aggregate.push(AggregateRow {
                kind,
                grid_index: gi,
                epsilon: eps.iter().sum::<f64>() / eps.len().max(1) as f64,
                feasible_runs: ok.len(),
                constraint_rate: if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().filter(|r| r.true_return >= cfg.mu).count() as f64 / ok.len() as f64
                },
                true_return: band(|r| r.true_return),
                true_variance: band(|r| r.true_variance),
                true_cvar: band(|r| r.true_cvar),
                sharpe: band(|r| r.sharpe),
                objective: band(|r| r.objective),
            });
        }
    }
    Ok(SweepReport { rows, grid_index, aggregate })
}

fn kind_label(k: ProblemKind) -> &'static str {
    match k {
        ProblemKind::MeanVariance => "mean_variance",
        ProblemKind::MeanCVaR => "mean_cvar",
    }
}

pub fn write_rows_csv<W: Write>(report: &SweepReport, w: W) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "run",
        "grid_index",
        "epsilon",
        "kind",
        "status",
        "eps_max",
        "true_return",
        "true_variance",
        "true_cvar",
        "sharpe",
        "objective",
    ])?;
    for (r, g) in report.rows.iter().zip(&report.grid_index) {
        let status = match r.status {
            RowStatus::Optimal => "Optimal",
            RowStatus::Infeasible => "Infeasible",
        };
        let mut rec =
            vec![r.run.to_string(), g.to_string(), format_float(r.epsilon), kind_label(r.kind).into(), status.into()];
        for v in [r.eps_max, r.true_return, r.true_variance, r.true_cvar, r.sharpe, r.objective] {
            rec.push(format_float(v));
        }
        out.write_record(&rec)?;
    }
    out.flush()
}

pub fn write_aggregate_csv<W: Write>(report: &SweepReport, w: W) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> =
        ["kind", "grid_index", "epsilon", "feasible_runs", "constraint_rate"].iter().map(|s| s.to_string()).collect();
    for name in ["true_return", "true_variance", "true_cvar", "sharpe", "objective"] {
        for stat in ["mean", "q20", "q80"] {
            header.push(format!("{name}_{stat}"));
        }
    }
    out.write_record(&header)?;
    for a in &report.aggregate {
        let mut rec = vec![
            kind_label(a.kind).to_string(),
            a.grid_index.to_string(),
            format_float(a.epsilon),
            a.feasible_runs.to_string(),
            format_float(a.constraint_rate),
        ];
        for b in [a.true_return, a.true_variance, a.true_cvar, a.sharpe, a.objective] {
            rec.extend([b.mean, b.q20, b.q80].iter().map(|v| format_float(*v)));
        }
        out.write_record(&rec)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_type_seven() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.2), 1.8);
        assert_eq!(quantile(&v, 0.8), 4.2);
        assert_eq!(quantile(&[3.0], 0.8), 3.0);
        assert!(quantile(&[], 0.5).is_nan());
    }

    fn small(runs: usize, grid: EpsGrid) -> SweepConfig {
        SweepConfig {
            source: Source::Model { model: MarketModel::standard(4), n: 40 },
            runs,
            seed: 5,
            mu: 0.06,
            alpha: 0.05,
            grid,
            kinds: vec![ProblemKind::MeanVariance, ProblemKind::MeanCVaR],
        }
    }

    #[test]
    fn single_run_is_reproducible_and_bands_are_ordered() {
        let cfg = small(3, EpsGrid::FractionOfEpsMax(vec![0.0, 0.5, 1.5]));
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(format!("{:?}", a.rows), format!("{:?}", b.rows));
        assert_eq!(a.rows.len(), 3 * 3 * 2);
        for r in a.rows.iter().zip(&a.grid_index).filter(|(_, g)| **g == 2) {
            assert_eq!(r.0.status, RowStatus::Infeasible);
        }
        for ag in &a.aggregate {
            if ag.feasible_runs > 0 {
                assert!(
                    ag.true_return.q20 <= ag.true_return.mean + 1e-15
                        && ag.true_return.mean <= ag.true_return.q80 + 1e-15
                );
            }
        }
        let one = run_sweep(&small(1, EpsGrid::Absolute(vec![0.0]))).unwrap();
        assert_eq!(one.rows.len(), 2);
    }

    #[test]
    fn empty_settings_rejected() {
        assert!(run_sweep(&small(0, EpsGrid::Absolute(vec![0.0]))).is_err());
        assert!(run_sweep(&small(1, EpsGrid::CommonFeasible { points: 0, fraction: 0.9 })).is_err());
    }
}
