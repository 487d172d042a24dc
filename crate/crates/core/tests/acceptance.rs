//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use ddro::backtest::{self, avg_assets, turnover, EpsRule, Strategy, StrategyKind};
use ddro::confidence::expected_confidence;
use ddro::dro::{self, c_factor};
use ddro::feasibility::{eps_max, mu_max};
use ddro::market_sim::{self, MarketModel};
use ddro::model::{compute_moments, read_returns_csv, DroConfig, ProblemKind, ReturnSample, SolutionStatus};
use ddro::socp::{self, certify_infeasibility, SolveStatus, SolverSettings};
use ddro::sweep::{run_sweep, EpsGrid, RowStatus, Source, SweepConfig};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

const KINDS: [ProblemKind; 2] = [ProblemKind::MeanVariance, ProblemKind::MeanCVaR];

/// Recorded from the reference run: seed 42, N = 300, mu = 0.25,
/// eps = 2 eps_max / 5, K = 100, mean-variance then mean-CVaR.
const GOLDEN_LEVELS: [f64; 2] = [66.0, 64.0];

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c1_formula() -> Check {
    let c2 = c_factor(2).map_err(|e| e.to_string())?;
    let c3 = c_factor(3).map_err(|e| e.to_string())?;
    let err = (c3 - (1.0 / 3.0 + 2.0 / 3f64.sqrt())).abs();
    ensure(c2 == 1.0 && err <= 1e-12, format!("c(2) = {c2}, |c(3) - 1/3 - 2/sqrt3| = {err:.1e}"))
}

fn saa_fixtures() -> Vec<ReturnSample> {
    (0..20u64).map(|s| fixture(s, 2 + (s % 4) as usize, 20 + (s as usize * 7) % 31)).collect()
}

fn grid_fixtures() -> Vec<(ReturnSample, f64)> {
    (0..10u64)
        .map(|s| (fixture(100 + s, 3 + (s % 2) as usize, 20 + (s as usize) % 11), [0.2, 0.5, 0.8][s as usize % 3]))
        .collect()
}

fn c2_saa() -> Check {
    let mut worst: f64 = 0.0;
    for s in saa_fixtures() {
        let mm = compute_moments(&s);
        let mu = mid_target(&mm);
        let cfg = DroConfig { mu, ..DroConfig::default() };
        let mv = dro::solve_portfolio(ProblemKind::MeanVariance, &s, &mm, &cfg).map_err(|e| e.to_string())?;
        let cv = dro::solve_portfolio(ProblemKind::MeanCVaR, &s, &mm, &cfg).map_err(|e| e.to_string())?;
        let v = saa_min_variance(&mm, mu).ok_or("variance oracle found no point")?.0;
        let c = saa_min_cvar(&s, cfg.alpha, mu).ok_or("CVaR oracle found no point")?;
        worst = worst.max((mv.objective - v).abs()).max((cv.objective - c).abs());
    }
    ensure(worst <= 1e-6, format!("20 fixtures, max |DRO(0) - SAA| = {worst:.2e}"))
}

fn c3_grid() -> Check {
    let mut worst: f64 = 0.0;
    for (s, frac) in grid_fixtures() {
        let mm = compute_moments(&s);
        let mu = mid_target(&mm);
        let eps = frac * eps_max(&mm, mu, 2).map_err(|e| e.to_string())?.eps_max;
        let cfg = DroConfig { epsilon: eps, mu, ..DroConfig::default() };
        for kind in KINDS {
            let sol = dro::solve_portfolio(kind, &s, &mm, &cfg).map_err(|e| e.to_string())?;
            let grid = match kind {
                ProblemKind::MeanVariance => brute_force_mv(&mm, eps, mu, 200),
                ProblemKind::MeanCVaR => brute_force_cvar(&s, eps, mu, cfg.alpha, 200),
            }
            .ok_or("no feasible grid point")?;
            worst = worst.max((sol.objective - grid).abs());
        }
    }
    ensure(worst <= 1e-3, format!("10 fixtures, max |DRO - grid| = {worst:.2e}"))
}

fn c4_boundary() -> Check {
    let samples: Vec<ReturnSample> =
        saa_fixtures().into_iter().chain(grid_fixtures().into_iter().map(|f| f.0)).collect();
    let mut checked = 0;
    for (i, s) in samples.iter().enumerate() {
        let mm = compute_moments(s);
        let mu = mid_target(&mm);
        let e = eps_max(&mm, mu, 2).map_err(|e| e.to_string())?.eps_max;
        for kind in KINDS {
            let at = |eps: f64| {
                dro::solve_portfolio(kind, s, &mm, &DroConfig { epsilon: eps, mu, ..DroConfig::default() })
                    .map(|r| r.status)
            };
            let inside = at(0.999 * e).map_err(|e| e.to_string())?;
            let outside = at(1.01 * e + 1e-6).map_err(|e| e.to_string())?;
            if inside != SolutionStatus::Optimal || outside != SolutionStatus::Infeasible {
                return Err(format!("fixture {i} {kind:?}: {inside:?} inside, {outside:?} outside"));
            }
            checked += 1;
        }
        let top = eps_max(&mm, mu_max(&mm), 2).map_err(|e| e.to_string())?.eps_max;
        if top != 0.0 {
            return Err(format!("fixture {i}: eps_max at mu_max is {top}"));
        }
    }
    ensure(true, format!("{} fixtures, {checked} boundary pairs flip as expected, eps_max(mu_max) = 0", samples.len()))
}

fn market(runs: usize, grid: EpsGrid) -> SweepConfig {
    SweepConfig {
        source: Source::Model { model: MarketModel::standard(10), n: 300 },
        runs,
        seed: 2024,
        mu: 0.25,
        alpha: 0.05,
        grid,
        kinds: KINDS.to_vec(),
    }
}

fn c5_constraint_rate() -> Check {
    let rep = run_sweep(&market(50, EpsGrid::FractionOfEpsMax(vec![0.4]))).map_err(|e| e.to_string())?;
    let rates: Vec<f64> = rep.aggregate.iter().map(|a| a.constraint_rate).collect();
    let feasible: Vec<usize> = rep.aggregate.iter().map(|a| a.feasible_runs).collect();
    ensure(
        rates.iter().all(|r| *r >= 0.90) && feasible.iter().all(|f| *f == 50),
        format!("R(x) >= mu in mean-variance {:.2}, mean-CVaR {:.2} of 50 runs", rates[0], rates[1]),
    )
}

fn c6_monotone() -> Check {
    let fracs: Vec<f64> = (0..10).map(|k| k as f64 / 10.0).collect();
    let rep = run_sweep(&market(50, EpsGrid::FractionOfEpsMax(fracs))).map_err(|e| e.to_string())?;
    let mut msg = Vec::new();
    let mut ok = true;
    for kind in KINDS {
        let mut rho_sum = 0.0;
        let mut drops = 0;
        for run in 0..50 {
            let rows: Vec<_> = rep.rows.iter().filter(|r| r.run == run && r.kind == kind).collect();
            if rows.iter().any(|r| r.status != RowStatus::Optimal) {
                return Err(format!("run {run} {kind:?}: infeasible grid point below eps_max"));
            }
            let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
            let ret: Vec<f64> = rows.iter().map(|r| r.true_return).collect();
            rho_sum += spearman(&eps, &ret);
            for w in rows.windows(2) {
                // solver accuracy allowance
                if w[1].objective < w[0].objective - 1e-7 * (1.0 + w[0].objective.abs()) {
                    drops += 1;
                }
            }
        }
        let rho = rho_sum / 50.0;
        ok &= rho > 0.5 && drops == 0;
        msg.push(format!("{kind:?}: mean rho {rho:.3}, objective decreases {drops}"));
    }
    ensure(ok, msg.join("; "))
}

fn c7_gaussian_cvar() -> Check {
    let model = MarketModel::standard(10);
    let alpha = 0.05;
    let draws = 10_000_000usize;
    let mut r = rng(77);
    let mut worst: f64 = 0.0;
    for k in 0..5 {
        let mut x: Vec<f64> = (0..10).map(|_| r.random_range(0.0..1.0)).collect();
        let s: f64 = x.iter().sum();
        x.iter_mut().for_each(|v| *v /= s);
        let mut g = rng(1000 + k);
        let mut losses = Vec::with_capacity(draws);
        for _ in 0..draws {
            let z0: f64 = StandardNormal.sample(&mut g);
            let psi = model.psi_std * z0;
            let mut ret = 0.0;
            for j in 0..10 {
                let z: f64 = StandardNormal.sample(&mut g);
                ret += x[j] * (psi + model.means[j] + model.idio_stds[j] * z);
            }
            losses.push(-ret);
        }
        let tail = (alpha * draws as f64) as usize;
        let cut = draws - tail;
        losses.select_nth_unstable_by(cut, f64::total_cmp);
        let mc = losses[cut..].iter().sum::<f64>() / tail as f64;
        let exact = market_sim::true_cvar_gaussian(&model, &x, alpha);
        worst = worst.max(((exact - mc) / mc).abs());
    }
    ensure(worst <= 0.01, format!("5 portfolios, 1e7 draws, max relative error {:.3}%", 100.0 * worst))
}

fn c8_bootstrap() -> Check {
    let s = market_sim::generate(&MarketModel::standard(10), 300, 42).map_err(|e| e.to_string())?;
    let mm = compute_moments(&s);
    let e = eps_max(&mm, 0.25, 2).map_err(|e| e.to_string())?.eps_max;
    let cfg = DroConfig { epsilon: 0.4 * e, mu: 0.25, ..DroConfig::default() };
    let mut levels = Vec::new();
    for kind in KINDS {
        let a = expected_confidence(&s, &cfg, kind, 100, 0.7, 42).map_err(|e| e.to_string())?;
        let b = expected_confidence(&s, &cfg, kind, 100, 0.7, 42).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{kind:?}: repeated runs differ"));
        }
        if !(0.0..=100.0).contains(&a.level_percent) {
            return Err(format!("{kind:?}: level {} out of range", a.level_percent));
        }
        levels.push(a.level_percent);
    }
    let constant = ReturnSample::from_rows(&vec![vec![0.02, 0.03, 0.01]; 20]).map_err(|e| e.to_string())?;
    let easy = expected_confidence(
        &constant,
        &DroConfig { mu: 0.005, ..DroConfig::default() },
        ProblemKind::MeanCVaR,
        10,
        0.7,
        1,
    )
    .map_err(|e| e.to_string())?;
    let hard = expected_confidence(
        &constant,
        &DroConfig { mu: 0.05, ..DroConfig::default() },
        ProblemKind::MeanCVaR,
        10,
        0.7,
        1,
    )
    .map_err(|e| e.to_string())?;
    let golden = levels.iter().zip(GOLDEN_LEVELS).all(|(a, b)| *a == b);
    ensure(
        golden && easy.level_percent == 100.0 && hard.level_percent == 0.0,
        format!(
            "levels {:?} (golden {:?}), constant data {} and {}",
            levels, GOLDEN_LEVELS, easy.level_percent, hard.level_percent
        ),
    )
}

fn c9_backtest() -> Check {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/six_assets.csv");
    let data = read_returns_csv(std::fs::File::open(path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    if (data.n(), data.m()) != (300, 6) {
        return Err(format!("fixture has shape {}x{}", data.n(), data.m()));
    }
    let mut strategies = Strategy::standard_set();
    let fixed = |k| Strategy::new(k, Some(EpsRule::Fixed(0.0))).unwrap();
    strategies.push(fixed(StrategyKind::CVaRWass));
    strategies.push(fixed(StrategyKind::VarWass));
    let (window, mu) = (120, 0.0006);
    let csv = |r: &backtest::BacktestReport| {
        let mut buf = Vec::new();
        backtest::write_metrics_csv(r, &mut buf).map(|_| buf).map_err(|e| e.to_string())
    };
    let a = backtest::run_backtest(&data, &strategies, window, mu).map_err(|e| e.to_string())?;
    let b = backtest::run_backtest(&data, &strategies, window, mu).map_err(|e| e.to_string())?;
    let identical = csv(&a)? == csv(&b)?;
    let by = |name: &str| a.strategies.iter().find(|s| s.name == name).unwrap();
    let ew = by("EW").avg_assets;

    let w = vec![vec![0.5, 0.5], vec![0.2, 0.8], vec![1.0, 0.0]];
    let r = vec![vec![0.1, -0.1], vec![0.0, 0.25], vec![0.0, 0.0]];
    let hand = (0.7 + 5.0 / 3.0) / 2.0;
    let t_err = (turnover(&w, &r) - hand).abs();
    let unit_assets = avg_assets(&w, 0.5) == 4.0 / 3.0;

    let mut path_err: f64 = 0.0;
    for (wass, saa) in [("CVaR Wass eps=0", "CVaR SAA"), ("Var Wass eps=0", "Var SAA")] {
        for (x, y) in by(wass).daily_weights.iter().zip(&by(saa).daily_weights) {
            for (u, v) in x.iter().zip(y) {
                path_err = path_err.max((u - v).abs());
            }
        }
    }
    ensure(
        identical && ew == 6.0 && t_err <= 1e-12 && unit_assets && path_err <= 1e-6,
        format!(
            "metrics identical {identical}, EW avg_assets {ew}, turnover error {t_err:.1e}, eps=0 vs SAA max weight gap {path_err:.1e}"
        ),
    )
}

fn max_gap(a: &[f64], b: &[f64], n: usize) -> f64 {
    (0..n).map(|j| (a[j] - b[j]).abs()).fold(0.0, f64::max)
}

fn c10_solver() -> Check {
    let settings = SolverSettings::default();
    let (mut lp_err, mut lp_scale, mut proj_scale, mut cert): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for seed in 0..100u64 {
        let lp = RandomLp::new(seed);
        let p = lp.program();
        // residuals of a scaled copy are measured in its own units
        let (q, scale) = rescaled(&p, seed);
        let a = socp::solve_with(&p, &settings).map_err(|e| e.to_string())?;
        let b = socp::solve_with(&q, &SolverSettings::with_tol(settings.tol * scale)).map_err(|e| e.to_string())?;
        if a.status != SolveStatus::Optimal || b.status != SolveStatus::Optimal {
            return Err(format!("LP {seed}: {:?} / {:?}", a.status, b.status));
        }
        lp_err = lp_err.max((a.objective - lp.vertex_optimum()).abs());
        lp_scale = lp_scale.max(max_gap(&a.z, &b.z, lp.c.len()));

        // a projection argmin is only pinned down to about sqrt(tol)
        let proj = Projection::new(seed);
        let p = proj.program();
        let (q, scale) = rescaled(&p, seed);
        let a = socp::solve_with(&p, &SolverSettings::with_tol(1e-9)).map_err(|e| e.to_string())?;
        let b = socp::solve_with(&q, &SolverSettings::with_tol(1e-9 * scale)).map_err(|e| e.to_string())?;
        if a.status != SolveStatus::Optimal || b.status != SolveStatus::Optimal {
            return Err(format!("projection {seed}: {:?} / {:?}", a.status, b.status));
        }
        proj_scale = proj_scale.max(max_gap(&a.z, &b.z, proj.x0.len()));

        let bad = contradictory(seed);
        let rep = socp::solve_with(&bad, &settings).map_err(|e| e.to_string())?;
        if rep.status != SolveStatus::Infeasible {
            return Err(format!("contradictory {seed}: {:?}", rep.status));
        }
        cert = cert.max(certify_infeasibility(&bad, &rep.y));
    }
    ensure(
        lp_err <= 1e-6 && lp_scale <= 1e-6 && proj_scale <= 1e-4 && cert <= 1e-6,
        format!(
            "100 instances each: LP vs vertices {lp_err:.1e}, rescaled argmin gap LP {lp_scale:.1e} / SOCP {proj_scale:.1e}, certificate residual {cert:.1e}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check, Duration); 10] = [
        ("formula checks", c1_formula, Duration::from_secs(1)),
        ("SAA reduction", c2_saa, Duration::from_secs(10)),
        ("oracle equivalence", c3_grid, Duration::from_secs(120)),
        ("feasibility boundary", c4_boundary, Duration::from_secs(30)),
        ("constraint-satisfaction trend", c5_constraint_rate, Duration::from_secs(600)),
        ("monotonicity sweep", c6_monotone, Duration::from_secs(600)),
        ("Gaussian CVaR oracle", c7_gaussian_cvar, Duration::from_secs(60)),
        ("bootstrap determinism", c8_bootstrap, Duration::from_secs(60)),
        ("backtest fixture", c9_backtest, Duration::from_secs(60)),
        ("solver properties", c10_solver, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let took = start.elapsed();
        let (ok, detail) = match res {
            Ok(m) if took <= *limit => (true, m),
            Ok(m) => (false, format!("{m}; over the {}s budget", limit.as_secs())),
            Err(m) => (false, m),
        };
        failed += !ok as usize;
        println!(
            "criterion {:>2} {:<30} {} ({:.1}s) {}",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
