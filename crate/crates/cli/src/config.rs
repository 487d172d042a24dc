//! Run configuration: a JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use ddro::backtest::{EpsRule, Strategy, StrategyKind};
use ddro::market_sim::MarketModel;
use ddro::model::ProblemKind;
use ddro::sweep::EpsGrid;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    MeanVariance,
    MeanCvar,
}

impl From<Kind> for ProblemKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::MeanVariance => ProblemKind::MeanVariance,
            Kind::MeanCvar => ProblemKind::MeanCVaR,
        }
    }
}

/// Every parameter any subcommand reads. Unset fields fall back to the
/// command's defaults; the echoed copy has all fields the command used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<MarketModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assets: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kinds: Option<Vec<Kind>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<EpsGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategies: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dump_conic: Option<bool>,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    Ok(serde_json::from_str(text)?)
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("parsing config {}", path.display()))
}

impl RunConfig {
    /// Field-wise `flags.or(self)`. A radius given on the command line
    /// replaces both radius fields of the file.
    pub fn overlay(self, flags: RunConfig) -> RunConfig {
        let radius_flag = flags.epsilon.is_some() || flags.eps_rule.is_some();
        let (epsilon, eps_rule) =
            if radius_flag { (flags.epsilon, flags.eps_rule) } else { (self.epsilon, self.eps_rule) };
        RunConfig {
            output_dir: flags.output_dir.or(self.output_dir),
            seed: flags.seed.or(self.seed),
            data: flags.data.or(self.data),
            model: flags.model.or(self.model),
            assets: flags.assets.or(self.assets),
            n: flags.n.or(self.n),
            kind: flags.kind.or(self.kind),
            kinds: flags.kinds.or(self.kinds),
            mu: flags.mu.or(self.mu),
            alpha: flags.alpha.or(self.alpha),
            epsilon,
            eps_rule,
            p: flags.p.or(self.p),
            mu_grid: flags.mu_grid.or(self.mu_grid),
            replicates: flags.replicates.or(self.replicates),
            train_fraction: flags.train_fraction.or(self.train_fraction),
            runs: flags.runs.or(self.runs),
            eps_grid: flags.eps_grid.or(self.eps_grid),
            window: flags.window.or(self.window),
            strategies: flags.strategies.or(self.strategies),
            dump_conic: flags.dump_conic.or(self.dump_conic),
        }
    }
}

/// Accepts `maxfact`, `3maxfact/4` and `maxfact/2`, case-insensitively.
pub fn parse_eps_rule(s: &str) -> Result<EpsRule> {
    Ok(match s.to_ascii_lowercase().as_str() {
        "maxfact" => EpsRule::MaxFact,
        "3maxfact/4" => EpsRule::ThreeQuarterMaxFact,
        "maxfact/2" => EpsRule::HalfMaxFact,
        _ => bail!("unknown eps rule `{s}` (expected maxfact, 3maxfact/4 or maxfact/2)"),
    })
}

/// `kind[:rule]`, e.g. `cvar-wass:maxfact/2`, `var-wass:eps=0.01`, `ew`.
pub fn parse_strategy(s: &str) -> Result<Strategy> {
    let (kind, rule) = match s.split_once(':') {
        Some((k, r)) => (k, Some(r)),
        None => (s, None),
    };
    let kind = match kind.to_ascii_lowercase().as_str() {
        "cvar-wass" => StrategyKind::CVaRWass,
        "var-wass" => StrategyKind::VarWass,
        "cvar-saa" => StrategyKind::CVaRSAA,
        "var-saa" => StrategyKind::VarSAA,
        "ew" => StrategyKind::EW,
        "min-cvar" => StrategyKind::MinCVaR,
        "min-var" => StrategyKind::MinVar,
        "max-sr" => StrategyKind::MaxSR,
        _ => bail!("unknown strategy kind `{kind}`"),
    };
    let rule = match rule {
        None => None,
        Some(r) => match r.strip_prefix("eps=") {
            Some(v) => Some(EpsRule::Fixed(v.parse().with_context(|| format!("bad radius in `{s}`"))?)),
            None => Some(parse_eps_rule(r)?),
        },
    };
    Ok(Strategy::new(kind, rule)?)
}

pub const STANDARD_STRATEGIES: [&str; 12] = [
    "cvar-wass:maxfact",
    "cvar-wass:3maxfact/4",
    "cvar-wass:maxfact/2",
    "var-wass:maxfact",
    "var-wass:3maxfact/4",
    "var-wass:maxfact/2",
    "cvar-saa",
    "var-saa",
    "ew",
    "min-cvar",
    "min-var",
    "max-sr",
];
