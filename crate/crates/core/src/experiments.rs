//! Fluorescence model, detector-noise study and error metrics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::{intensity, tr_mfe, Target};
use crate::spinsys::{SpinDynamics, SpinSystemSpec};
use crate::sweep;

/// `F(t) = A e^{-t/t1} + B (1 + t/t2)^{-α}`, counts/ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtParams {
    pub a: f64,
    pub b: f64,
    pub t1: f64,
    pub t2: f64,
    pub alpha: f64,
}

impl FtParams {
    pub const TMP: FtParams = FtParams {
        a: 3.12e6,
        b: 2.21e5,
        t1: 3.47,
        t2: 123.0,
        alpha: 6.11,
    };
    pub const DPS: FtParams = FtParams {
        a: 1.317e6,
        b: 6.658e5,
        t1: 2.1432,
        t2: 5.1549,
        alpha: 1.223,
    };

    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.t1, self.t2, self.alpha];
        if all.iter().all(|x| *x > 0.0 && x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "F(t) parameters must be positive: {self:?}"
            )))
        }
    }
}

pub fn ft_model(t: f64, p: &FtParams) -> f64 {
    p.a * (-t / p.t1).exp() + p.b * (1.0 + t / p.t2).powf(-p.alpha)
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// 121 points over `[0, 60]` ns (DPS) or `[0, 100]` ns (TMP).
pub fn default_grid(dps: bool) -> Vec<f64> {
    linspace(0.0, if dps { 60.0 } else { 100.0 }, 121)
}

/// Mean squared difference, as a percentage.
pub fn mse(series: &[f64], reference: &[f64]) -> Result<f64> {
    if series.len() != reference.len() {
        return Err(Error::DimensionMismatch(format!(
            "series of length {} vs reference of length {}",
            series.len(),
            reference.len()
        )));
    }
    if series.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = series
        .iter()
        .zip(reference)
        .map(|(x, r)| (x - r).powi(2))
        .sum();
    Ok(100.0 * sum / series.len() as f64)
}

/// Pointwise `M(t)` from low- and high-field yields.
pub fn mfe_series(s_low: &[f64], s_high: &[f64], theta: f64) -> Result<Vec<f64>> {
    if s_low.len() != s_high.len() {
        return Err(Error::DimensionMismatch(format!(
            "low-field grid has {} points, high-field {}",
            s_low.len(),
            s_high.len()
        )));
    }
    Ok(s_low
        .iter()
        .zip(s_high)
        .map(|(&s0, &sb)| tr_mfe(sb, s0, theta))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseStudyConfig {
    /// Detector noise standard deviation, counts.
    pub sigma: f64,
    #[serde(default)]
    pub mu: f64,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseStudyConfig {
    pub const TMP_SIGMA: f64 = 75.0;
    pub const DPS_SIGMA: f64 = 700.0;

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise sigma = {}, mu = {}",
                self.sigma, self.mu
            )));
        }
        if self.trials < 2 {
            return Err(Error::InvalidParameter(
                "noise study needs at least 2 trials".into(),
            ));
        }
        Ok(())
    }
}

/// Per-time statistics of the reconstructed `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisePoint {
    pub t: f64,
    pub m_theory: f64,
    pub mean: f64,
    pub std: f64,
    /// `(σ / I_0) sqrt(1 + M²)`.
    pub predicted_std: f64,
    /// `I_0 > 20 σ`, where the first-order prediction applies.
    pub prediction_valid: bool,
    pub accepted: usize,
    pub rejected: usize,
    pub i_low: f64,
    pub i_high: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStudy {
    pub points: Vec<NoisePoint>,
    pub rejected: usize,
}

/// Add independent Gaussian counts to both fluorescence curves, reconstruct
/// `M` from the ratio, and summarize over trials. Samples whose noisy
/// low-field intensity is not positive are rejected and counted.
pub fn noisy_mfe_study(
    low: &SpinSystemSpec,
    high: &SpinSystemSpec,
    ft: &FtParams,
    theta: f64,
    config: &NoiseStudyConfig,
    grid: &[f64],
) -> Result<NoiseStudy> {
    config.validate()?;
    ft.validate()?;
    low.validate()?;
    high.validate()?;
    let relaxed = |spec: &SpinSystemSpec| -> Result<Vec<f64>> {
        let dynamics = SpinDynamics::new(spec)?;
        let target = Target::of(spec);
        Ok(grid
            .iter()
            .map(|&t| target.closed_form(dynamics.singlet_probability(t), t))
            .collect())
    };
    let (s0, sb) = (relaxed(low)?, relaxed(high)?);
    let f: Vec<f64> = grid.iter().map(|&t| ft_model(t, ft)).collect();
    let i0: Vec<f64> = f
        .iter()
        .zip(&s0)
        .map(|(&f, &s)| intensity(f, s, theta))
        .collect();
    let ib: Vec<f64> = f
        .iter()
        .zip(&sb)
        .map(|(&f, &s)| intensity(f, s, theta))
        .collect();

    let noise =
        Normal::new(config.mu, config.sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let trials: Vec<usize> = (0..config.trials).collect();
    // one row per trial, NaN marks a rejected sample
    let rows = sweep::map(&trials, |k, _| {
        let mut rng = ChaCha8Rng::seed_from_u64(sweep::derive_seed(config.seed, k as u64));
        i0.iter()
            .zip(&ib)
            .map(|(&a, &b)| {
                let n0 = a + noise.sample(&mut rng);
                let nb = b + noise.sample(&mut rng);
                if n0 > 0.0 {
                    nb / n0
                } else {
                    f64::NAN
                }
            })
            .collect::<Vec<f64>>()
    });

    let mut points = Vec::with_capacity(grid.len());
    let mut rejected = 0;
    for (j, &t) in grid.iter().enumerate() {
        let samples: Vec<f64> = rows.iter().map(|r| r[j]).filter(|x| !x.is_nan()).collect();
        let n = samples.len();
        let rej = config.trials - n;
        rejected += rej;
        let mean = samples.iter().sum::<f64>() / n.max(1) as f64;
        let var = if n > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            f64::NAN
        };
        let m_theory = tr_mfe(sb[j], s0[j], theta);
        points.push(NoisePoint {
            t,
            m_theory,
            mean,
            std: var.sqrt(),
            predicted_std: config.sigma / i0[j] * (1.0 + m_theory * m_theory).sqrt(),
            prediction_valid: i0[j] > 20.0 * config.sigma,
            accepted: n,
            rejected: rej,
            i_low: i0[j],
            i_high: ib[j],
        });
    }
    Ok(NoiseStudy { points, rejected })
}
