//! Portfolio selection under a Wasserstein ambiguity set whose worst case
//! in the return constraint depends on the portfolio itself.
//!
//! [`dro`] builds the robust mean-variance and mean-CVaR programs as conic
//! programs and [`socp`] solves them. [`feasibility`] gives the largest
//! attainable return and radius, [`confidence`], [`sweep`] and [`backtest`]
//! evaluate the resulting portfolios out of sample, and [`market_sim`] draws
//! synthetic returns.

pub mod backtest;
pub mod confidence;
pub mod dro;
pub mod feasibility;
pub mod market_sim;
pub mod model;
pub mod socp;
pub mod sweep;
