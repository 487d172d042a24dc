//! Domain types shared by every module: return samples, portfolios,
//! configuration, moments, and the returns CSV format.

use std::io::{Read, Write};

use chrono::{Days, NaiveDate};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for the simplex invariants of [`Portfolio`].
pub const SIMPLEX_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("sample must have at least one row and one column")]
    Empty,
    #[error("non-finite return at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("{what} labels: expected {expected}, got {got}")]
    LabelLength { what: &'static str, expected: usize, got: usize },
    #[error("weights sum to {0}, not 1")]
    SumNotOne(f64),
    #[error("weight {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("returns csv, line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

/// `N x m` matrix of per-period fractional returns, one row per period.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSample {
    returns: DMatrix<f64>,
    asset_labels: Option<Vec<String>>,
    period_labels: Option<Vec<String>>,
}

impl ReturnSample {
    pub fn new(returns: DMatrix<f64>) -> Result<Self, ModelError> {
        if returns.nrows() == 0 || returns.ncols() == 0 {
            return Err(ModelError::Empty);
        }
        for row in 0..returns.nrows() {
            for col in 0..returns.ncols() {
                if !returns[(row, col)].is_finite() {
                    return Err(ModelError::NonFinite { row, col });
                }
            }
        }
        Ok(Self { returns, asset_labels: None, period_labels: None })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(ModelError::DimensionMismatch { expected: m, got: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }

    pub fn with_asset_labels(mut self, labels: Vec<String>) -> Result<Self, ModelError> {
        if labels.len() != self.m() {
            return Err(ModelError::LabelLength { what: "asset", expected: self.m(), got: labels.len() });
        }
        self.asset_labels = Some(labels);
        Ok(self)
    }

    pub fn with_period_labels(mut self, labels: Vec<String>) -> Result<Self, ModelError> {
        if labels.len() != self.n() {
            return Err(ModelError::LabelLength { what: "period", expected: self.n(), got: labels.len() });
        }
        self.period_labels = Some(labels);
        Ok(self)
    }

    /// Number of periods.
    pub fn n(&self) -> usize {
        self.returns.nrows()
    }

    /// Number of assets.
    pub fn m(&self) -> usize {
        self.returns.ncols()
    }

    pub fn returns(&self) -> &DMatrix<f64> {
        &self.returns
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.returns.row(i).iter().copied().collect()
    }

    pub fn asset_labels(&self) -> Option<&[String]> {
        self.asset_labels.as_deref()
    }

    pub fn period_labels(&self) -> Option<&[String]> {
        self.period_labels.as_deref()
    }

    /// Asset labels, falling back to `a1..am`.
    pub fn asset_names(&self) -> Vec<String> {
        match &self.asset_labels {
            Some(l) => l.clone(),
            None => (1..=self.m()).map(|j| format!("a{j}")).collect(),
        }
    }

    /// New sample made of the given rows, in order. Labels follow the rows.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self, ModelError> {
        let m = self.m();
        let returns = DMatrix::from_fn(idx.len(), m, |i, j| self.returns[(idx[i], j)]);
        let mut out = Self::new(returns)?;
        out.asset_labels = self.asset_labels.clone();
        out.period_labels = self.period_labels.as_ref().map(|p| idx.iter().map(|&i| p[i].clone()).collect());
        Ok(out)
    }

    /// Rows `start..end`.
    pub fn window(&self, start: usize, end: usize) -> Result<Self, ModelError> {
        self.select_rows(&(start..end).collect::<Vec<_>>())
    }

    /// `<x, xi_i>` for every row.
    pub fn portfolio_returns(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n()).map(|i| self.returns.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Long-only weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Portfolio {
    weights: Vec<f64>,
}

impl Portfolio {
    pub fn new(weights: Vec<f64>) -> Result<Self, ModelError> {
        if weights.is_empty() {
            return Err(ModelError::Empty);
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(**w >= -SIMPLEX_TOL)) {
            return Err(ModelError::NegativeWeight { index, value });
        }
        let sum: f64 = weights.iter().sum();
        if !((sum - 1.0).abs() <= SIMPLEX_TOL) {
            return Err(ModelError::SumNotOne(sum));
        }
        Ok(Self { weights })
    }

    pub fn equal(m: usize) -> Self {
        Self { weights: vec![1.0 / m as f64; m] }
    }

    /// Clips tiny negatives and rescales onto the simplex. Intended for solver
    /// output that is feasible up to the solver tolerance.
    pub fn from_solver(raw: &[f64]) -> Result<Self, ModelError> {
        let clipped: Vec<f64> = raw.iter().map(|w| w.max(0.0)).collect();
        let sum: f64 = clipped.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(ModelError::SumNotOne(sum));
        }
        let w: Vec<f64> = clipped.iter().map(|v| v / sum).collect();
        Self::new(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.weights.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn check_dim(&self, m: usize) -> Result<(), ModelError> {
        if self.len() != m {
            return Err(ModelError::DimensionMismatch { expected: m, got: self.len() });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for Portfolio {
    type Error = ModelError;
    fn try_from(v: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(v)
    }
}

impl From<Portfolio> for Vec<f64> {
    fn from(p: Portfolio) -> Self {
        p.weights
    }
}

/// Checks `x` against the simplex invariants, optionally against an
/// expected dimension.
pub fn validate_portfolio(x: &[f64], m: Option<usize>) -> Result<Portfolio, ModelError> {
    if let Some(m) = m {
        if x.len() != m {
            return Err(ModelError::DimensionMismatch { expected: m, got: x.len() });
        }
    }
    Portfolio::new(x.to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DroConfig {
    /// Wasserstein radius.
    pub epsilon: f64,
    /// Wasserstein order.
    pub p: u32,
    /// Ground-metric norm index.
    pub q: u32,
    /// CVaR tail level.
    pub alpha: f64,
    /// Target expected return per period.
    pub mu: f64,
}

impl Default for DroConfig {
    fn default() -> Self {
        Self { epsilon: 0.0, p: 2, q: 2, alpha: 0.05, mu: 0.0 }
    }
}

impl DroConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(ModelError::InvalidConfig(format!("epsilon must be finite and >= 0, got {}", self.epsilon)));
        }
        if self.p < 1 {
            return Err(ModelError::InvalidConfig("p must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ModelError::InvalidConfig(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !self.mu.is_finite() {
            return Err(ModelError::InvalidConfig("mu must be finite".into()));
        }
        Ok(())
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }
}

/// Sample mean and biased (divisor `N`) covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMoments {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl SampleMoments {
    pub fn m(&self) -> usize {
        self.mean.len()
    }

    pub fn variance_of(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        (x.transpose() * &self.covariance * &x)[(0, 0)]
    }

    pub fn mean_of(&self, x: &[f64]) -> f64 {
        self.mean.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

pub fn compute_moments(sample: &ReturnSample) -> SampleMoments {
    let r = sample.returns();
    let n = r.nrows() as f64;
    let mean = DVector::from_iterator(r.ncols(), r.column_iter().map(|c| c.sum() / n));
    let mut centered = r.clone();
    for mut row in centered.row_iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v -= mean[j];
        }
    }
    let mut covariance = centered.transpose() * &centered / n;
    // exact symmetry
    let m = covariance.nrows();
    for i in 0..m {
        for j in 0..i {
            let v = 0.5 * (covariance[(i, j)] + covariance[(j, i)]);
            covariance[(i, j)] = v;
            covariance[(j, i)] = v;
        }
    }
    SampleMoments { mean, covariance }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    MeanVariance,
    MeanCVaR,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionStatus {
    Optimal,
    Infeasible,
    NumericalLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustSolution {
    pub kind: ProblemKind,
    /// Absent when the program is infeasible.
    pub portfolio: Option<Portfolio>,
    /// CVaR threshold, mean-CVaR only.
    pub tau: Option<f64>,
    /// Mean-variance objectives are reported squared.
    pub objective: f64,
    /// `m'x - eps ||x||`.
    pub robust_constraint_value: f64,
    pub status: SolutionStatus,
    pub solver_iterations: usize,
}

/// Formats `x` with at most 12 significant digits.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    let a = rounded.abs();
    if (1e-6..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Reads the returns CSV: header `date,<label1>,...`, then one ISO-8601 date
/// and `m` decimals per row.
pub fn read_returns_csv<R: Read>(reader: R) -> Result<ReturnSample, ModelError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| ModelError::Csv { line: 1, msg: e.to_string() })?.clone();
    if header.len() < 2 || !header[0].eq_ignore_ascii_case("date") {
        return Err(ModelError::Csv { line: 1, msg: "header must be `date,<asset labels>`".into() });
    }
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let m = labels.len();
    let mut rows = Vec::new();
    let mut dates = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| ModelError::Csv { line, msg: e.to_string() })?;
        if rec.len() != m + 1 {
            return Err(ModelError::Csv { line, msg: format!("expected {} cells, got {}", m + 1, rec.len()) });
        }
        let date = &rec[0];
        NaiveDate::parse_from_str(date, "%Y-%m-%d")
            .map_err(|e| ModelError::Csv { line, msg: format!("bad date `{date}`: {e}") })?;
        let mut row = Vec::with_capacity(m);
        for (j, cell) in rec.iter().skip(1).enumerate() {
            if cell.is_empty() {
                return Err(ModelError::Csv { line, msg: format!("missing value for `{}`", labels[j]) });
            }
            let v: f64 = cell.parse().map_err(|_| ModelError::Csv { line, msg: format!("bad number `{cell}`") })?;
            if !v.is_finite() {
                return Err(ModelError::Csv { line, msg: format!("non-finite value `{cell}`") });
            }
            row.push(v);
        }
        rows.push(row);
        dates.push(date.to_string());
    }
    if rows.is_empty() {
        return Err(ModelError::Csv { line: 2, msg: "no data rows".into() });
    }
    ReturnSample::from_rows(&rows)?.with_asset_labels(labels)?.with_period_labels(dates)
}

/// Writes `sample` in the returns CSV format. Missing period labels become
/// consecutive calendar days from 2000-01-01.
pub fn write_returns_csv<W: Write>(sample: &ReturnSample, writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_string()];
    header.extend(sample.asset_names());
    w.write_record(&header)?;
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
    for i in 0..sample.n() {
        let date = match sample.period_labels() {
            Some(p) => p[i].clone(),
            None => (start + Days::new(i as u64)).format("%Y-%m-%d").to_string(),
        };
        let mut rec = vec![date];
        rec.extend(sample.returns().row(i).iter().map(|v| format_float(*v)));
        w.write_record(&rec)?;
    }
    w.flush()
}
