//! `ddro`: batch front-end for the ddro library.
//!
//! Every subcommand reads an optional JSON config (`--config`), applies
//! flag overrides, writes its outputs into `--out` and echoes the resolved
//! config there as `config.json`. Exit status is 0 on success, 2 when the
//! model is infeasible and 1 on any other failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ddro::sweep::EpsGrid;

use ddro_cli::commands::{self, Outcome};
use ddro_cli::config::{self, Kind, RunConfig};

#[derive(Parser)]
#[command(name = "ddro", version, about = "Decision-dependent Wasserstein DRO portfolio tools")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Default)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Target expected return.
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// CVaR tail level.
    #[arg(long)]
    alpha: Option<f64>,
    /// Fixed Wasserstein radius.
    #[arg(long, conflicts_with = "eps_rule")]
    epsilon: Option<f64>,
    /// Radius relative to the largest feasible one: maxfact, 3maxfact/4, maxfact/2.
    #[arg(long)]
    eps_rule: Option<String>,
    /// Wasserstein order.
    #[arg(long)]
    p: Option<u32>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw returns from the factor market.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Number of periods.
        #[arg(long)]
        n: Option<usize>,
        /// Number of assets of the standard market.
        #[arg(long)]
        assets: Option<usize>,
    },
    /// Solve one robust portfolio program.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        /// Also write the conic program as `program.txt`.
        #[arg(long)]
        dump_conic: bool,
    },
    /// Largest attainable return and largest feasible radius over a grid of targets.
    Feasibility {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Comma-separated targets.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        mu_grid: Option<Vec<f64>>,
    },
    /// Bootstrap estimate of the out-of-sample confidence level.
    Confidence {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        /// Number of bootstrap replicates.
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        train_fraction: Option<f64>,
    },
    /// Out-of-sample performance over a grid of radii and repeated samples.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Bootstrap from this returns CSV instead of simulating.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        assets: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long, value_enum, value_delimiter = ',')]
        kinds: Option<Vec<Kind>>,
        /// Absolute radii, comma-separated.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["eps_fractions", "grid_points"])]
        eps_grid: Option<Vec<f64>>,
        /// Radii as fractions of each run's largest feasible radius.
        #[arg(long, value_delimiter = ',', conflicts_with = "grid_points")]
        eps_fractions: Option<Vec<f64>>,
        /// Evenly spaced radii up to `grid_fraction` of the smallest per-run maximum.
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long, default_value_t = 0.9, requires = "grid_points")]
        grid_fraction: f64,
    },
    /// Rolling-window backtest of a set of strategies.
    Backtest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        window: Option<usize>,
        /// `kind[:rule]`, repeatable, e.g. `cvar-wass:maxfact/2`, `var-wass:eps=0.01`, `ew`.
        #[arg(long = "strategy")]
        strategies: Vec<String>,
    },
}

impl Common {
    fn flags(&self) -> RunConfig {
        RunConfig {
            output_dir: self.out.clone(),
            seed: self.seed,
            mu: self.mu,
            alpha: self.alpha,
            epsilon: self.epsilon,
            eps_rule: self.eps_rule.clone(),
            p: self.p,
            ..Default::default()
        }
    }

    fn resolve(&self, extra: RunConfig) -> anyhow::Result<RunConfig> {
        let base = match &self.config {
            Some(path) => config::load(path)?,
            None => RunConfig::default(),
        };
        Ok(base.overlay(extra.overlay(self.flags())))
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.cmd {
        Cmd::Simulate { common, n, assets } => {
            commands::simulate(common.resolve(RunConfig { n, assets, ..Default::default() })?)
        }
        Cmd::Solve { common, data, kind, dump_conic } => commands::solve(common.resolve(RunConfig {
            data,
            kind,
            dump_conic: dump_conic.then_some(true),
            ..Default::default()
        })?),
        Cmd::Feasibility { common, data, mu_grid } => {
            commands::feasibility(common.resolve(RunConfig { data, mu_grid, ..Default::default() })?)
        }
        Cmd::Confidence { common, data, kind, replicates, train_fraction } => {
            commands::confidence(common.resolve(RunConfig {
                data,
                kind,
                replicates,
                train_fraction,
                ..Default::default()
            })?)
        }
        Cmd::Sweep { common, data, assets, n, runs, kinds, eps_grid, eps_fractions, grid_points, grid_fraction } => {
            let grid = match (eps_grid, eps_fractions, grid_points) {
                (Some(g), _, _) => Some(EpsGrid::Absolute(g)),
                (_, Some(f), _) => Some(EpsGrid::FractionOfEpsMax(f)),
                (_, _, Some(points)) => Some(EpsGrid::CommonFeasible { points, fraction: grid_fraction }),
                _ => None,
            };
            commands::sweep(common.resolve(RunConfig {
                data,
                assets,
                n,
                runs,
                kinds,
                eps_grid: grid,
                ..Default::default()
            })?)
        }
        Cmd::Backtest { common, data, window, strategies } => commands::backtest(common.resolve(RunConfig {
            data,
            window,
            strategies: (!strategies.is_empty()).then_some(strategies),
            ..Default::default()
        })?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => {
            eprintln!("model is infeasible");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
