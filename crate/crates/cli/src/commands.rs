use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ddro::backtest::{self, Strategy};
use ddro::confidence::{self, DEFAULT_REPLICATES, DEFAULT_TRAIN_FRACTION};
use ddro::dro;
use ddro::feasibility::{self, FeasibilityError};
use ddro::market_sim::{self, MarketModel};
use ddro::model::{
    compute_moments, format_float, read_returns_csv, write_returns_csv, DroConfig, ReturnSample, SolutionStatus,
};
use ddro::sweep::{self, EpsGrid, Source, SweepConfig};
use serde::Serialize;

use crate::config::{parse_eps_rule, parse_strategy, Kind, RunConfig, STANDARD_STRATEGIES};

pub const DEFAULT_OUT: &str = "ddro-out";
const DEFAULT_ASSETS: usize = 10;
const DEFAULT_N: usize = 300;
const DEFAULT_RUNS: usize = 200;
const DEFAULT_WINDOW: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Infeasible,
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

/// Creates the output directory and writes the resolved config into it.
fn prepare(resolved: &RunConfig) -> Result<PathBuf> {
    let dir = out_dir(resolved);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut f = create(&dir, "config.json")?;
    serde_json::to_writer_pretty(&mut f, resolved)?;
    writeln!(f)?;
    f.flush()?;
    Ok(dir)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut f = create(dir, name)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(f.flush()?)
}

fn read_data(cfg: &RunConfig) -> Result<ReturnSample> {
    let Some(path) = &cfg.data else { bail!("no returns CSV given (use --data or `data` in the config)") };
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_returns_csv(f).with_context(|| format!("reading {}", path.display()))
}

fn model_of(cfg: &RunConfig) -> MarketModel {
    cfg.model.clone().unwrap_or_else(|| MarketModel::standard(cfg.assets.unwrap_or(DEFAULT_ASSETS)))
}

fn dro_config(cfg: &RunConfig) -> DroConfig {
    let d = DroConfig::default();
    DroConfig {
        epsilon: cfg.epsilon.unwrap_or(0.0),
        p: cfg.p.unwrap_or(d.p),
        alpha: cfg.alpha.unwrap_or(d.alpha),
        mu: cfg.mu.unwrap_or(d.mu),
        ..d
    }
}

/// Fills the radius fields: a rule is kept as given, otherwise epsilon
/// defaults to zero.
fn resolve_radius(cfg: &mut RunConfig) -> Result<()> {
    if let Some(r) = &cfg.eps_rule {
        if cfg.epsilon.is_some() {
            bail!("give either epsilon or eps_rule, not both");
        }
        parse_eps_rule(r)?;
    } else {
        cfg.epsilon.get_or_insert(0.0);
    }
    Ok(())
}

fn resolve_common(cfg: &RunConfig) -> RunConfig {
    let d = DroConfig::default();
    RunConfig {
        output_dir: Some(out_dir(cfg)),
        mu: Some(cfg.mu.unwrap_or(d.mu)),
        alpha: Some(cfg.alpha.unwrap_or(d.alpha)),
        ..Default::default()
    }
}

pub fn simulate(cfg: RunConfig) -> Result<Outcome> {
    let n = cfg.n.unwrap_or(DEFAULT_N);
    if n == 0 {
        bail!("sample size must be positive");
    }
    let model = model_of(&cfg);
    model.validate()?;
    let resolved = RunConfig {
        output_dir: Some(out_dir(&cfg)),
        seed: Some(cfg.seed.unwrap_or(0)),
        model: Some(model.clone()),
        n: Some(n),
        ..Default::default()
    };
    let sample = market_sim::generate(&model, n, resolved.seed.unwrap())?;
    let dir = prepare(&resolved)?;
    let mut f = create(&dir, "returns.csv")?;
    write_returns_csv(&sample, &mut f)?;
    f.flush()?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct SolveOutput {
    epsilon: f64,
    eps_rule: Option<String>,
    eps_max: Option<f64>,
    mu_max: f64,
    n: usize,
    m: usize,
    n_var: usize,
    n_con: usize,
    solution: ddro::model::RobustSolution,
}

/// Radius for `cfg`: the fixed value, or the rule applied to this sample's
/// largest feasible radius. `None` means the target is above every mean.
fn radius(cfg: &RunConfig, dcfg: &DroConfig, sample: &ReturnSample) -> Result<(f64, Option<f64>)> {
    let Some(rule) = &cfg.eps_rule else { return Ok((dcfg.epsilon, None)) };
    let rule = parse_eps_rule(rule)?;
    match feasibility::eps_max(&compute_moments(sample), dcfg.mu, dcfg.p) {
        Ok(r) => Ok((rule.epsilon(r.eps_max), Some(r.eps_max))),
        Err(FeasibilityError::MuAboveMax { .. }) => Ok((0.0, None)),
        Err(e) => Err(e.into()),
    }
}

pub fn solve(cfg: RunConfig) -> Result<Outcome> {
    let mut resolved = RunConfig {
        data: cfg.data.clone(),
        kind: Some(cfg.kind.unwrap_or(Kind::MeanCvar)),
        epsilon: cfg.epsilon,
        eps_rule: cfg.eps_rule.clone(),
        p: Some(cfg.p.unwrap_or(2)),
        dump_conic: Some(cfg.dump_conic.unwrap_or(false)),
        ..resolve_common(&cfg)
    };
    resolve_radius(&mut resolved)?;
    let sample = read_data(&resolved)?;
    let dcfg = dro_config(&resolved);
    let (epsilon, eps_max) = radius(&resolved, &dcfg, &sample)?;
    let dcfg = dcfg.with_epsilon(epsilon);
    let moments = compute_moments(&sample);
    let prog = dro::build(resolved.kind.unwrap().into(), &sample, &moments, &dcfg)?;
    let solution = dro::solve_dro(&prog)?;
    let dir = prepare(&resolved)?;
    if resolved.dump_conic == Some(true) {
        let mut f = create(&dir, "program.txt")?;
        f.write_all(prog.program.to_text().as_bytes())?;
        f.flush()?;
    }
    let status = solution.status;
    write_json(
        &dir,
        "solution.json",
        &SolveOutput {
            epsilon,
            eps_rule: resolved.eps_rule.clone(),
            eps_max,
            mu_max: feasibility::mu_max(&moments),
            n: sample.n(),
            m: sample.m(),
            n_var: prog.program.n_var(),
            n_con: prog.program.n_con(),
            solution,
        },
    )?;
    Ok(if status == SolutionStatus::Infeasible { Outcome::Infeasible } else { Outcome::Done })
}

pub fn feasibility(cfg: RunConfig) -> Result<Outcome> {
    let sample = read_data(&cfg)?;
    let moments = compute_moments(&sample);
    let grid = cfg.mu_grid.clone().unwrap_or_else(|| {
        let lo = moments.mean.min();
        let hi = moments.mean.max();
        (0..=20).map(|k| lo + (hi - lo) * k as f64 / 20.0).collect()
    });
    let p = cfg.p.unwrap_or(2);
    let resolved = RunConfig {
        output_dir: Some(out_dir(&cfg)),
        data: cfg.data.clone(),
        mu_grid: Some(grid.clone()),
        p: Some(p),
        ..Default::default()
    };
    let mut rows = Vec::with_capacity(grid.len());
    for &mu in &grid {
        let row = match feasibility::eps_max(&moments, mu, p) {
            Ok(r) => {
                format!("{},{},{},{},feasible", format_float(mu), p, format_float(r.mu_max), format_float(r.eps_max))
            }
            Err(FeasibilityError::MuAboveMax { mu_max, .. }) => {
                format!("{},{},{},,above_mu_max", format_float(mu), p, format_float(mu_max))
            }
            Err(e) => return Err(e.into()),
        };
        rows.push(row);
    }
    let dir = prepare(&resolved)?;
    let mut f = create(&dir, "feasibility.csv")?;
    writeln!(f, "mu,p,mu_max,eps_max,status")?;
    for r in rows {
        writeln!(f, "{r}")?;
    }
    f.flush()?;
    Ok(Outcome::Done)
}

pub fn confidence(cfg: RunConfig) -> Result<Outcome> {
    let mut resolved = RunConfig {
        data: cfg.data.clone(),
        seed: Some(cfg.seed.unwrap_or(0)),
        kind: Some(cfg.kind.unwrap_or(Kind::MeanCvar)),
        epsilon: cfg.epsilon,
        eps_rule: cfg.eps_rule.clone(),
        replicates: Some(cfg.replicates.unwrap_or(DEFAULT_REPLICATES)),
        train_fraction: Some(cfg.train_fraction.unwrap_or(DEFAULT_TRAIN_FRACTION)),
        ..resolve_common(&cfg)
    };
    resolve_radius(&mut resolved)?;
    let sample = read_data(&resolved)?;
    let dcfg = dro_config(&resolved);
    let (epsilon, _) = radius(&resolved, &dcfg, &sample)?;
    let report = confidence::expected_confidence(
        &sample,
        &dcfg.with_epsilon(epsilon),
        resolved.kind.unwrap().into(),
        resolved.replicates.unwrap(),
        resolved.train_fraction.unwrap(),
        resolved.seed.unwrap(),
    )?;
    let dir = prepare(&resolved)?;
    write_json(&dir, "confidence.json", &report)?;
    Ok(if report.all_infeasible { Outcome::Infeasible } else { Outcome::Done })
}

pub fn sweep(cfg: RunConfig) -> Result<Outcome> {
    let from_data = cfg.data.is_some();
    if from_data && (cfg.model.is_some() || cfg.assets.is_some()) {
        bail!("give either a returns CSV or a market model, not both");
    }
    let grid =
        cfg.eps_grid.clone().unwrap_or_else(|| EpsGrid::FractionOfEpsMax((0..10).map(|k| k as f64 / 10.0).collect()));
    let kinds = cfg.kinds.clone().unwrap_or_else(|| vec![Kind::MeanVariance, Kind::MeanCvar]);
    let mut resolved = RunConfig {
        seed: Some(cfg.seed.unwrap_or(0)),
        runs: Some(cfg.runs.unwrap_or(DEFAULT_RUNS)),
        eps_grid: Some(grid.clone()),
        kinds: Some(kinds.clone()),
        ..resolve_common(&cfg)
    };
    let source = if from_data {
        resolved.data = cfg.data.clone();
        Source::Data(read_data(&cfg)?)
    } else {
        let n = cfg.n.unwrap_or(DEFAULT_N);
        let model = model_of(&cfg);
        resolved.model = Some(model.clone());
        resolved.n = Some(n);
        Source::Model { model, n }
    };
    let report = sweep::run_sweep(&SweepConfig {
        source,
        runs: resolved.runs.unwrap(),
        seed: resolved.seed.unwrap(),
        mu: resolved.mu.unwrap(),
        alpha: resolved.alpha.unwrap(),
        grid,
        kinds: kinds.into_iter().map(Into::into).collect(),
    })?;
    let dir = prepare(&resolved)?;
    let mut f = create(&dir, "sweep_runs.csv")?;
    sweep::write_rows_csv(&report, &mut f)?;
    f.flush()?;
    let mut f = create(&dir, "sweep_aggregate.csv")?;
    sweep::write_aggregate_csv(&report, &mut f)?;
    f.flush()?;
    Ok(Outcome::Done)
}

pub fn backtest(cfg: RunConfig) -> Result<Outcome> {
    let names: Vec<String> =
        cfg.strategies.clone().unwrap_or_else(|| STANDARD_STRATEGIES.iter().map(|s| s.to_string()).collect());
    let resolved = RunConfig {
        data: cfg.data.clone(),
        window: Some(cfg.window.unwrap_or(DEFAULT_WINDOW)),
        strategies: Some(names.clone()),
        ..resolve_common(&cfg)
    };
    let dcfg = dro_config(&resolved);
    let strategies: Vec<Strategy> = names
        .iter()
        .map(|s| parse_strategy(s).map(|st| Strategy { cfg: DroConfig { alpha: dcfg.alpha, ..st.cfg }, ..st }))
        .collect::<Result<_>>()?;
    let sample = read_data(&resolved)?;
    let report = backtest::run_backtest(&sample, &strategies, resolved.window.unwrap(), dcfg.mu)?;
    let dir = prepare(&resolved)?;
    let mut f = create(&dir, "metrics.csv")?;
    backtest::write_metrics_csv(&report, &mut f)?;
    f.flush()?;
    let mut f = create(&dir, "wealth.csv")?;
    backtest::write_wealth_csv(&report, &mut f)?;
    f.flush()?;
    write_json(&dir, "report.json", &report)?;
    let mut f = create(&dir, "daily.csv")?;
    writeln!(f, "date,mu_max,eps_max")?;
    for ((d, mm), e) in report.dates.iter().zip(&report.daily_mu_max).zip(&report.daily_eps_max) {
        writeln!(f, "{d},{},{}", format_float(*mm), e.map(format_float).unwrap_or_default())?;
    }
    f.flush()?;
    Ok(Outcome::Done)
}
