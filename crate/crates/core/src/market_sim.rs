//! Single-factor Gaussian market: `xi_i = psi + zeta_i` with a shared factor
//! `psi ~ N(0, psi_std^2)` and independent `zeta_i ~ N(mean_i, idio_std_i^2)`.
//! Analytic return, variance and CVaR of a fixed portfolio are provided as
//! out-of-sample oracles.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::model::{ModelError, ReturnSample, SampleMoments};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketModel {
    pub m: usize,
    pub psi_std: f64,
    pub means: Vec<f64>,
    pub idio_stds: Vec<f64>,
}

impl MarketModel {
    /// Asset `i` (1-based) has mean `0.03 i` and idiosyncratic std `0.025 i`;
    /// the factor std is 0.02.
    pub fn standard(m: usize) -> Self {
        Self {
            m,
            psi_std: 0.02,
            means: (1..=m).map(|i| 0.03 * i as f64).collect(),
            idio_stds: (1..=m).map(|i| 0.025 * i as f64).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.m == 0 {
            return Err(ModelError::Empty);
        }
        for (what, v) in [("means", &self.means), ("idio_stds", &self.idio_stds)] {
            if v.len() != self.m {
                return Err(ModelError::InvalidConfig(format!("{what} has length {}, expected {}", v.len(), self.m)));
            }
        }
        if !(self.psi_std >= 0.0) || self.idio_stds.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(ModelError::InvalidConfig("standard deviations must be finite and >= 0".into()));
        }
        if self.means.iter().any(|m| !m.is_finite()) || !self.psi_std.is_finite() {
            return Err(ModelError::InvalidConfig("means must be finite".into()));
        }
        Ok(())
    }
}

impl Default for MarketModel {
    fn default() -> Self {
        Self::standard(10)
    }
}

/// `n` draws from the market. Per row, the factor is drawn first and the
/// idiosyncratic terms follow in asset order, all from a seeded ChaCha20.
pub fn generate(model: &MarketModel, n: usize, seed: u64) -> Result<ReturnSample, ModelError> {
    generate_stream(model, n, seed, 0)
}

/// Like [`generate`], drawing from ChaCha20 stream `stream` of `seed`.
/// Stream 0 reproduces [`generate`].
pub fn generate_stream(model: &MarketModel, n: usize, seed: u64, stream: u64) -> Result<ReturnSample, ModelError> {
    model.validate()?;
    if n == 0 {
        return Err(ModelError::Empty);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let m = model.m;
    let mut data = DMatrix::zeros(n, m);
    for i in 0..n {
        let z: f64 = StandardNormal.sample(&mut rng);
        let psi = model.psi_std * z;
        for j in 0..m {
            let e: f64 = StandardNormal.sample(&mut rng);
            data[(i, j)] = psi + model.means[j] + model.idio_stds[j] * e;
        }
    }
    ReturnSample::new(data)
}

pub fn true_moments(model: &MarketModel) -> SampleMoments {
    let m = model.m;
    let s2 = model.psi_std * model.psi_std;
    let covariance = DMatrix::from_fn(m, m, |i, j| if i == j { s2 + model.idio_stds[i].powi(2) } else { s2 });
    SampleMoments { mean: DVector::from_column_slice(&model.means), covariance }
}

pub fn true_return(model: &MarketModel, x: &[f64]) -> f64 {
    model.means.iter().zip(x).map(|(a, b)| a * b).sum()
}

pub fn true_variance(model: &MarketModel, x: &[f64]) -> f64 {
    let s: f64 = x.iter().sum();
    let idio: f64 = model.idio_stds.iter().zip(x).map(|(sd, w)| (sd * w).powi(2)).sum();
    (model.psi_std * s).powi(2) + idio
}

/// CVaR at level `alpha` of the Gaussian loss `-<x, xi>`.
pub fn true_cvar_gaussian(model: &MarketModel, x: &[f64], alpha: f64) -> f64 {
    let r = true_return(model, x);
    let v = true_variance(model, x);
    -r + v.max(0.0).sqrt() * normal_pdf(normal_quantile(1.0 - alpha)) / alpha
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse standard normal CDF: Acklam's rational approximation refined by
/// one Halley step against `erfc`.
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00, 3.754408661907416e+00];
    const P_LOW: f64 = 0.02425;

    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}
