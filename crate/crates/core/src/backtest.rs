//! Rolling-window backtest with daily rebalancing.
//!
//! Day `t` fits every strategy on the `window` rows before it, holds the
//! resulting weights over row `t`, and compounds wealth. Fits do not depend
//! on realized wealth, so all (strategy, day) fits run in parallel; only the
//! fallback to the previous day's weights is applied sequentially.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dro::{self, DroError};
use crate::feasibility::{self, FeasibilityError, FeasibilityReport};
use crate::model::{
    compute_moments, format_float, DroConfig, ModelError, Portfolio, ProblemKind, ReturnSample, SampleMoments,
    SolutionStatus,
};
use crate::socp::{self, Cone, ConicProgram, SolveStatus, SparseMatrix, DEFAULT_MAX_ITER, DEFAULT_TOL};

pub const AVG_ASSETS_THRESHOLD: f64 = 1e-4;
pub const CVAR_LEVEL: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BacktestError {
    #[error("invalid backtest setup: {0}")]
    InvalidSetup(String),
    #[error("day {day}: {source}")]
    Fit { day: usize, source: DroError },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyKind {
    CVaRWass,
    VarWass,
    CVaRSAA,
    VarSAA,
    EW,
    MinCVaR,
    MinVar,
    MaxSR,
}

impl StrategyKind {
    pub fn is_wasserstein(self) -> bool {
        matches!(self, Self::CVaRWass | Self::VarWass)
    }

    fn label(self) -> &'static str {
        match self {
            Self::CVaRWass => "CVaR Wass",
            Self::VarWass => "Var Wass",
            Self::CVaRSAA => "CVaR SAA",
            Self::VarSAA => "Var SAA",
            Self::EW => "EW",
            Self::MinCVaR => "MinCVaR",
            Self::MinVar => "MinVar",
            Self::MaxSR => "MaxSR",
        }
    }
}

/// Daily radius choice for the Wasserstein strategies, relative to that
/// day's largest feasible radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EpsRule {
    MaxFact,
    ThreeQuarterMaxFact,
    HalfMaxFact,
    Fixed(f64),
}

impl EpsRule {
    pub fn epsilon(self, eps_max: f64) -> f64 {
        match self {
            Self::MaxFact => eps_max,
            Self::ThreeQuarterMaxFact => 0.75 * eps_max,
            Self::HalfMaxFact => 0.5 * eps_max,
            Self::Fixed(e) => e,
        }
    }

    fn label(self) -> String {
        match self {
            Self::MaxFact => "MaxFact".into(),
            Self::ThreeQuarterMaxFact => "3MaxFact/4".into(),
            Self::HalfMaxFact => "MaxFact/2".into(),
            Self::Fixed(e) => format!("eps={}", format_float(e)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub kind: StrategyKind,
    pub eps_rule: Option<EpsRule>,
    /// `alpha` is used by the CVaR kinds; `epsilon` and `mu` are set per day.
    pub cfg: DroConfig,
}

impl Strategy {
    pub fn new(kind: StrategyKind, eps_rule: Option<EpsRule>) -> Result<Self, BacktestError> {
        if kind.is_wasserstein() != eps_rule.is_some() {
            return Err(BacktestError::InvalidSetup(format!(
                "{} {} an eps rule",
                kind.label(),
                if kind.is_wasserstein() { "requires" } else { "does not take" }
            )));
        }
        if let Some(EpsRule::Fixed(e)) = eps_rule {
            if !(e >= 0.0) || !e.is_finite() {
                return Err(BacktestError::InvalidSetup(format!("fixed radius must be finite and >= 0, got {e}")));
            }
        }
        Ok(Self { kind, eps_rule, cfg: DroConfig::default() })
    }

    pub fn name(&self) -> String {
        match self.eps_rule {
            Some(r) => format!("{} {}", self.kind.label(), r.label()),
            None => self.kind.label().to_string(),
        }
    }

    /// The comparison set: six Wasserstein variants and six baselines.
    pub fn standard_set() -> Vec<Self> {
        use EpsRule::*;
        use StrategyKind::*;
        let mut out = Vec::new();
        for kind in [CVaRWass, VarWass] {
            for rule in [MaxFact, ThreeQuarterMaxFact, HalfMaxFact] {
                out.push(Self { kind, eps_rule: Some(rule), cfg: DroConfig::default() });
            }
        }
        for kind in [CVaRSAA, VarSAA, EW, MinCVaR, MinVar, MaxSR] {
            out.push(Self { kind, eps_rule: None, cfg: DroConfig::default() });
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DayFlag {
    /// No feasible portfolio; the previous weights were held.
    InfeasibleDay,
    /// No asset had a positive mean; minimum variance was used instead.
    DegenerateSharpe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub name: String,
    pub strategy: Strategy,
    pub mean: f64,
    pub std_dev: f64,
    pub sharpe: f64,
    pub turnover: f64,
    pub avg_assets: f64,
    pub cvar05: f64,
    /// `T + 1` entries starting at 1.
    pub wealth_path: Vec<f64>,
    pub daily_returns: Vec<f64>,
    pub daily_weights: Vec<Vec<f64>>,
    /// Radius used each day (Wasserstein kinds).
    pub daily_epsilon: Vec<Option<f64>>,
    pub flags: Vec<(usize, DayFlag)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub window: usize,
    pub mu: f64,
    /// Labels of the out-of-sample days.
    pub dates: Vec<String>,
    /// Label of the last in-sample day, paired with wealth 1.
    pub start_date: String,
    pub daily_mu_max: Vec<f64>,
    /// `None` on days where `mu` exceeds `mu_max`.
    pub daily_eps_max: Vec<Option<f64>>,
    pub strategies: Vec<StrategyReport>,
}

/// Empirical CVaR of `losses` at tail level `alpha`, i.e.
/// `min_tau tau + sum_i max(loss_i - tau, 0) / (alpha T)`, by a sorted scan.
pub fn empirical_cvar(losses: &[f64], alpha: f64) -> f64 {
    let mut sorted = losses.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let t = sorted.len() as f64;
    // the tail holds alpha T observations; the boundary one is weighted fractionally
    let mut budget = alpha * t;
    let mut acc = 0.0;
    for l in &sorted {
        if budget <= 0.0 {
            break;
        }
        let w = budget.min(1.0);
        acc += w * l;
        budget -= w;
    }
    acc / (alpha * t)
}

/// Mean over consecutive days of `sum_j |x_{t+1,j} - drift(x_t)_j|`, where
/// `returns[t]` is the return earned while holding `weights[t]`.
pub fn turnover(weights: &[Vec<f64>], returns: &[Vec<f64>]) -> f64 {
    if weights.len() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for t in 0..weights.len() - 1 {
        let grown: Vec<f64> = weights[t].iter().zip(&returns[t]).map(|(w, r)| w * (1.0 + r)).collect();
        let sum: f64 = grown.iter().sum();
        total += weights[t + 1].iter().zip(&grown).map(|(n, g)| (n - g / sum).abs()).sum::<f64>();
    }
    total / (weights.len() - 1) as f64
}

/// Mean number of weights at or above `threshold`.
pub fn avg_assets(weights: &[Vec<f64>], threshold: f64) -> f64 {
    if weights.is_empty() {
        return 0.0;
    }
    let held: usize = weights.iter().map(|w| w.iter().filter(|x| **x >= threshold).count()).sum();
    held as f64 / weights.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineKind {
    EW,
    MinVar,
    MinCVaR,
    MaxSR,
}

/// Baseline weights on one window, with a flag when MaxSR had to fall back.
pub fn baseline_weights(kind: BaselineKind, window: &ReturnSample) -> Result<(Portfolio, Option<DayFlag>), DroError> {
    let moments = compute_moments(window);
    baseline_with_moments(kind, window, &moments)
}

fn solved_portfolio(prog: &dro::DroProgram) -> Result<Portfolio, DroError> {
    let sol = dro::solve_dro(prog)?;
    sol.portfolio.ok_or(DroError::SolverFailed(SolveStatus::Infeasible))
}

fn baseline_with_moments(
    kind: BaselineKind,
    window: &ReturnSample,
    moments: &SampleMoments,
) -> Result<(Portfolio, Option<DayFlag>), DroError> {
    let m = window.m();
    match kind {
        BaselineKind::EW => Ok((Portfolio::equal(m), None)),
        BaselineKind::MinVar => Ok((solved_portfolio(&dro::build_min_variance(moments)?)?, None)),
        BaselineKind::MinCVaR => Ok((solved_portfolio(&dro::build_min_cvar(window, CVAR_LEVEL)?)?, None)),
        BaselineKind::MaxSR => match max_sharpe(moments)? {
            Some(x) => Ok((x, None)),
            None => Ok((solved_portfolio(&dro::build_min_variance(moments)?)?, Some(DayFlag::DegenerateSharpe))),
        },
    }
}

/// `argmax m'x / sqrt(x' S x)` over the simplex via `y = x / (m'x)`:
/// minimize `||L y||` subject to `m'y = 1`, `y >= 0`, then renormalize.
/// `None` when no asset has a positive mean.
fn max_sharpe(moments: &SampleMoments) -> Result<Option<Portfolio>, DroError> {
    let m = moments.m();
    if moments.mean.iter().all(|v| *v <= 0.0) {
        return Ok(None);
    }
    let l = dro::covariance_factor(&moments.covariance)?;
    let u = m;
    let mut c = vec![0.0; m + 1];
    c[u] = 1.0;
    let mut a = SparseMatrix::new(m + 1);
    let mut b = Vec::new();
    a.push_row(moments.mean.iter().enumerate().map(|(j, v)| (j, *v)));
    b.push(1.0);
    for j in 0..m {
        a.push_row([(j, -1.0)]);
        b.push(0.0);
    }
    a.push_row([(u, -1.0)]);
    b.push(0.0);
    for i in 0..m {
        a.push_row((0..m).map(|j| (j, -l[(i, j)])));
        b.push(0.0);
    }
    let prog = ConicProgram { c, a, b, cones: vec![Cone::zero(1), Cone::nonneg(m), Cone::second_order(m + 1)] };
    let rep = socp::solve(&prog, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    if rep.status != SolveStatus::Optimal {
        return Err(DroError::SolverFailed(rep.status));
    }
    Ok(Some(Portfolio::from_solver(&rep.z[..m])?))
}

struct DayFit {
    window: ReturnSample,
    moments: SampleMoments,
    mu_max: f64,
    feas: Option<FeasibilityReport>,
}

/// Outcome of fitting one strategy on one day.
struct Fit {
    weights: Option<Portfolio>,
    epsilon: Option<f64>,
    flag: Option<DayFlag>,
}

fn fit(strategy: &Strategy, day: &DayFit, mu: f64) -> Result<Fit, DroError> {
    use StrategyKind::*;
    let infeasible = Fit { weights: None, epsilon: None, flag: Some(DayFlag::InfeasibleDay) };
    let kind = match strategy.kind {
        CVaRWass | CVaRSAA => ProblemKind::MeanCVaR,
        VarWass | VarSAA => ProblemKind::MeanVariance,
        EW | MinCVaR | MinVar | MaxSR => {
            let b = match strategy.kind {
                EW => BaselineKind::EW,
                MinCVaR => BaselineKind::MinCVaR,
                MinVar => BaselineKind::MinVar,
                _ => BaselineKind::MaxSR,
            };
            let (x, flag) = baseline_with_moments(b, &day.window, &day.moments)?;
            return Ok(Fit { weights: Some(x), epsilon: None, flag });
        }
    };
    let Some(feas) = &day.feas else {
        return Ok(infeasible);
    };
    let epsilon = match strategy.eps_rule {
        Some(rule) => rule.epsilon(feas.eps_max),
        None => 0.0,
    };
    if strategy.eps_rule.is_some() && epsilon >= feas.eps_max {
        // the feasible set is the maximizer of the feasibility ratio (or empty)
        if epsilon > feas.eps_max {
            return Ok(infeasible);
        }
        return Ok(Fit { weights: Some(feas.achieving_portfolio.clone()), epsilon: Some(epsilon), flag: None });
    }
    let cfg = DroConfig { epsilon, mu, ..strategy.cfg };
    let sol = dro::solve_portfolio(kind, &day.window, &day.moments, &cfg)?;
    match (sol.status, sol.portfolio) {
        (SolutionStatus::Optimal, Some(x)) => {
            Ok(Fit { weights: Some(x), epsilon: strategy.eps_rule.map(|_| epsilon), flag: None })
        }
        _ => Ok(infeasible),
    }
}

pub fn run_backtest(
    data: &ReturnSample,
    strategies: &[Strategy],
    window: usize,
    mu: f64,
) -> Result<BacktestReport, BacktestError> {
    let (n, m) = (data.n(), data.m());
    if window < m + 1 {
        return Err(BacktestError::InvalidSetup(format!("window {window} must be at least m + 1 = {}", m + 1)));
    }
    if n < window + 1 {
        return Err(BacktestError::InvalidSetup(format!("{n} rows leave no out-of-sample day for window {window}")));
    }
    if strategies.is_empty() {
        return Err(BacktestError::InvalidSetup("no strategies".into()));
    }
    for s in strategies {
        s.cfg.validate()?;
    }
    let needs_feas = strategies
        .iter()
        .any(|s| s.kind.is_wasserstein() || matches!(s.kind, StrategyKind::CVaRSAA | StrategyKind::VarSAA));
    let days: Vec<usize> = (window..n).collect();

    let fits: Vec<DayFit> = days
        .par_iter()
        .map(|&t| {
            let w = data.window(t - window, t)?;
            let moments = compute_moments(&w);
            let mu_max = feasibility::mu_max(&moments);
            let feas = if needs_feas {
                match feasibility::eps_max(&moments, mu, 2) {
                    Ok(r) => Some(r),
                    Err(FeasibilityError::MuAboveMax { .. }) => None,
                    Err(FeasibilityError::Dro(e)) => return Err(BacktestError::Fit { day: t, source: e }),
                }
            } else {
                None
            };
            Ok(DayFit { window: w, moments, mu_max, feas })
        })
        .collect::<Result<_, BacktestError>>()?;

    let jobs: Vec<(usize, usize)> = (0..strategies.len()).flat_map(|s| (0..days.len()).map(move |d| (s, d))).collect();
    let results: Vec<Fit> = jobs
        .par_iter()
        .map(|&(s, d)| fit(&strategies[s], &fits[d], mu).map_err(|e| BacktestError::Fit { day: days[d], source: e }))
        .collect::<Result<_, _>>()?;

    let realized: Vec<Vec<f64>> = days.iter().map(|&t| data.row(t)).collect();
    let mut reports = Vec::with_capacity(strategies.len());
    for (s, strategy) in strategies.iter().enumerate() {
        let mut prev = Portfolio::equal(m);
        let mut weights = Vec::with_capacity(days.len());
        let mut rets = Vec::with_capacity(days.len());
        let mut eps = Vec::with_capacity(days.len());
        let mut flags = Vec::new();
        let mut wealth = vec![1.0];
        for (d, &t) in days.iter().enumerate() {
            let f = &results[s * days.len() + d];
            if let Some(fl) = f.flag {
                flags.push((t, fl));
            }
            let x = f.weights.clone().unwrap_or_else(|| prev.clone());
            let r = x.dot(&realized[d]);
            wealth.push(wealth[wealth.len() - 1] * (1.0 + r));
            rets.push(r);
            eps.push(f.epsilon);
            weights.push(x.weights().to_vec());
            prev = x;
        }
        let (mean, std_dev) = mean_std(&rets);
        let losses: Vec<f64> = rets.iter().map(|r| -r).collect();
        reports.push(StrategyReport {
            name: strategy.name(),
            strategy: *strategy,
            mean,
            std_dev,
            sharpe: if std_dev > 0.0 { mean / std_dev } else { 0.0 },
            turnover: turnover(&weights, &realized),
            avg_assets: avg_assets(&weights, AVG_ASSETS_THRESHOLD),
            cvar05: empirical_cvar(&losses, CVAR_LEVEL),
            wealth_path: wealth,
            daily_returns: rets,
            daily_weights: weights,
            daily_epsilon: eps,
            flags,
        });
    }

    let label = |t: usize| data.period_labels().map_or_else(|| t.to_string(), |p| p[t].clone());
    Ok(BacktestReport {
        window,
        mu,
        dates: days.iter().map(|&t| label(t)).collect(),
        start_date: label(window - 1),
        daily_mu_max: fits.iter().map(|f| f.mu_max).collect(),
        daily_eps_max: fits
            .iter()
            .map(|f| if needs_feas { f.feas.as_ref().map(|r| r.eps_max) } else { None })
            .collect(),
        strategies: reports,
    })
}

/// Mean and sample standard deviation (divisor `T - 1`).
fn mean_std(v: &[f64]) -> (f64, f64) {
    let t = v.len() as f64;
    let mean = v.iter().sum::<f64>() / t;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1.0);
    (mean, var.sqrt())
}

/// Metrics table: one row per strategy in the order
/// `Mean, Std, Sharpe, Turnover, Avg. Portfolio Assets, CVaR_0.05`.
pub fn write_metrics_csv<W: Write>(report: &BacktestReport, w: W) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["strategy", "mean", "std", "sharpe", "turnover", "avg_assets", "cvar_0.05"])?;
    for s in &report.strategies {
        let vals = [s.mean, s.std_dev, s.sharpe, s.turnover, s.avg_assets, s.cvar05];
        let mut rec = vec![s.name.clone()];
        rec.extend(vals.iter().map(|v| format_float(*v)));
        out.write_record(&rec)?;
    }
    out.flush()
}

/// Wealth paths: `date` then one column per strategy.
pub fn write_wealth_csv<W: Write>(report: &BacktestReport, w: W) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["date".to_string()];
    header.extend(report.strategies.iter().map(|s| s.name.clone()));
    out.write_record(&header)?;
    for k in 0..=report.dates.len() {
        let date = if k == 0 { report.start_date.clone() } else { report.dates[k - 1].clone() };
        let mut rec = vec![date];
        rec.extend(report.strategies.iter().map(|s| format_float(s.wealth_path[k])));
        out.write_record(&rec)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn cvar_examples() {
        assert_eq!(empirical_cvar(&[1.0; 4], 0.5), 1.0);
        assert_eq!(empirical_cvar(&[0.0, 0.0, 0.0, 10.0], 0.25), 10.0);
        assert_abs_diff_eq!(empirical_cvar(&[1.0, 2.0, 6.0], 1.0 - 1e-12), 3.0, epsilon = 1e-9);
    }

    #[test]
    fn cvar_matches_rockafellar_uryasev_minimum() {
        let losses = [0.3, -0.1, 0.7, 0.2, 0.25, -0.4, 1.1];
        for alpha in [0.05, 0.1, 0.3, 0.5, 0.9] {
            let ru =
                |tau: f64| tau + losses.iter().map(|l| (l - tau).max(0.0)).sum::<f64>() / (alpha * losses.len() as f64);
            let best = losses.iter().map(|t| ru(*t)).fold(f64::INFINITY, f64::min);
            assert_abs_diff_eq!(empirical_cvar(&losses, alpha), best, epsilon = 1e-12);
        }
    }

    #[test]
    fn turnover_examples() {
        let w = vec![vec![0.5, 0.5]; 2];
        let r = vec![vec![0.10, 0.0], vec![0.0, 0.0]];
        assert_abs_diff_eq!(turnover(&w, &r), 1.0 / 21.0, epsilon = 1e-15);
        assert_abs_diff_eq!(1.0 / 21.0, 0.047619, epsilon = 1e-6);
        let hold = vec![vec![1.0]; 5];
        let rs = vec![vec![0.03]; 5];
        assert_eq!(turnover(&hold, &rs), 0.0);
        let z = vec![vec![0.25, 0.75]; 4];
        assert_eq!(turnover(&z, &vec![vec![0.0, 0.0]; 4]), 0.0);
    }

    #[test]
    fn avg_assets_examples() {
        assert_eq!(avg_assets(&[vec![1.0 / 23.0; 23]], 1e-4), 23.0);
        assert_eq!(avg_assets(&[vec![0.0, 1.0, 0.0]], 1e-4), 1.0);
        assert_eq!(avg_assets(&[vec![0.5, 0.5, 1e-9]], 1e-4), 2.0);
    }

    #[test]
    fn min_variance_diagonal() {
        let mm = SampleMoments {
            mean: DVector::from_vec(vec![0.0, 0.0]),
            covariance: DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0])),
        };
        let window = ReturnSample::from_rows(&[vec![0.0, 0.0]]).unwrap();
        let (x, _) = baseline_with_moments(BaselineKind::MinVar, &window, &mm).unwrap();
        assert_abs_diff_eq!(x.weights()[0], 0.8, epsilon = 1e-6);
        assert_abs_diff_eq!(x.weights()[1], 0.2, epsilon = 1e-6);
    }

    #[test]
    fn max_sharpe_two_assets() {
        // with diagonal S the optimum is proportional to S^-1 m
        let mm = SampleMoments {
            mean: DVector::from_vec(vec![0.02, 0.03]),
            covariance: DMatrix::from_diagonal(&DVector::from_vec(vec![0.01, 0.04])),
        };
        let x = max_sharpe(&mm).unwrap().unwrap();
        let raw = [0.02 / 0.01, 0.03 / 0.04];
        let s = raw[0] + raw[1];
        assert_abs_diff_eq!(x.weights()[0], raw[0] / s, epsilon = 1e-6);
        let neg = SampleMoments { mean: DVector::from_vec(vec![-0.01, 0.0]), covariance: mm.covariance.clone() };
        assert!(max_sharpe(&neg).unwrap().is_none());
    }

    #[test]
    fn identical_assets_baselines_are_equal_weight() {
        let rows: Vec<Vec<f64>> = [0.01, -0.02, 0.03, 0.0, 0.015, 0.02].iter().map(|r| vec![*r; 3]).collect();
        let s = ReturnSample::from_rows(&rows).unwrap();
        for kind in [BaselineKind::EW, BaselineKind::MinVar, BaselineKind::MinCVaR, BaselineKind::MaxSR] {
            let (x, _) = baseline_weights(kind, &s).unwrap();
            for w in x.weights() {
                assert_abs_diff_eq!(*w, 1.0 / 3.0, epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn single_asset_wealth_is_cumulative_product() {
        let rets = [0.01, -0.02, 0.03, 0.0, 0.015, 0.02, -0.01];
        let s = ReturnSample::from_rows(&rets.iter().map(|r| vec![*r]).collect::<Vec<_>>()).unwrap();
        let strategies = Strategy::standard_set();
        let rep = run_backtest(&s, &strategies, 3, -0.5).unwrap();
        let want: f64 = rets[3..].iter().map(|r| 1.0 + r).product();
        for st in &rep.strategies {
            assert!(st.daily_weights.iter().all(|w| (w[0] - 1.0).abs() < 1e-12));
            assert_abs_diff_eq!(*st.wealth_path.last().unwrap(), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn strategy_validation() {
        assert!(Strategy::new(StrategyKind::CVaRWass, None).is_err());
        assert!(Strategy::new(StrategyKind::EW, Some(EpsRule::MaxFact)).is_err());
        assert!(Strategy::new(StrategyKind::VarWass, Some(EpsRule::Fixed(-1.0))).is_err());
        assert_eq!(
            Strategy::new(StrategyKind::VarWass, Some(EpsRule::HalfMaxFact)).unwrap().name(),
            "Var Wass MaxFact/2"
        );
    }
}
