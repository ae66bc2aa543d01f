//! Growth models for evolution counts: a power-law susceptible-infected rate
//! and the Bass diffusion rate, with least-squares fitting and MAPE scoring.

mod fit;
mod optimize;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dynamics::TimeBin;
use crate::error::{Error, Result};

pub use fit::{fit_bass, fit_si, FitConfig, GrowthFit};

/// Per-bin new-evolution counts `y` with the cumulative state `n` at the
/// start of each bin and the population total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSeries {
    pub y: Vec<f64>,
    pub n: Vec<f64>,
    pub total: f64,
    pub bin_width: i64,
}

impl EvolutionSeries {
    /// `n(t)` is the sum of all earlier bins and the total is the sum of all.
    pub fn from_counts(y: Vec<f64>, bin_width: i64) -> Result<EvolutionSeries> {
        if let Some(bad) = y.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("series value {bad} is not a finite count")));
        }
        let mut n = Vec::with_capacity(y.len());
        let mut acc = 0.0;
        for v in &y {
            n.push(acc);
            acc += v;
        }
        Ok(EvolutionSeries {
            y,
            n,
            total: acc,
            bin_width,
        })
    }

    /// Uses each bin's `value`, which is the raw or normalized count.
    pub fn from_bins(bins: &[TimeBin], bin_width: i64) -> Result<EvolutionSeries> {
        Self::from_counts(bins.iter().map(|b| b.value).collect(), bin_width)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiParams {
    pub beta: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub population: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BassParams {
    pub m: f64,
    pub p: f64,
    pub q: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthModel {
    Si,
    Bass,
}

impl GrowthModel {
    pub fn as_str(self) -> &'static str {
        match self {
            GrowthModel::Si => "si",
            GrowthModel::Bass => "bass",
        }
    }
}

impl std::fmt::Display for GrowthModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GrowthModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "si" => Ok(GrowthModel::Si),
            "bass" => Ok(GrowthModel::Bass),
            _ => Err(Error::InvalidParameter(format!("unknown growth model {s:?}"))),
        }
    }
}

/// `ε·β·n^α·(N−n)^γ`.
pub fn si_rate(n: f64, params: &SiParams) -> Result<f64> {
    let big_n = params.population;
    if n > big_n || n < 0.0 {
        return Err(Error::OutOfRange {
            what: "infected count",
            detail: format!("{n} outside [0, {big_n}]"),
        });
    }
    Ok(si_term(n, big_n, params.alpha, params.gamma) * params.epsilon * params.beta)
}

#[inline]
fn si_term(n: f64, big_n: f64, alpha: f64, gamma: f64) -> f64 {
    if n <= 0.0 || n >= big_n {
        return 0.0;
    }
    n.powf(alpha) * (big_n - n).powf(gamma)
}

/// Standard Bass adoption rate at time `t`.
pub fn bass_rate(t: f64, params: &BassParams) -> f64 {
    params.epsilon * params.m * bass_shape(t, params.p, params.q)
}

#[inline]
fn bass_shape(t: f64, p: f64, q: f64) -> f64 {
    let decay = (-(p + q) * t).exp();
    let denom = 1.0 + (q / p) * decay;
    (p + q).powi(2) / p * decay / (denom * denom)
}

/// Mean absolute percentage error over bins whose actual value is positive.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    let (sum, count) = actual
        .iter()
        .zip(predicted)
        .filter(|(a, _)| **a > 0.0)
        .fold((0.0, 0usize), |(s, c), (a, p)| (s + (a - p).abs() / a, c + 1));
    if count == 0 {
        return Err(Error::AllZero);
    }
    Ok(100.0 * sum / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    Si(SiParams),
    Bass(BassParams),
}

/// Multiplicative noise applied to simulated counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub relative_sd: f64,
    pub seed: u64,
}

/// Forward-Euler simulation over `bins` bins.
///
/// For SI, `y(t)` is the model rate at the current state and the state
/// advances as `n(t+1) = min(n(t) + y(t), N)` from `n(0) = seed_count`; the
/// total is `N`. For Bass, `y(t)` is the rate at time `t` and `n` is the
/// running sum. Noise, when given, scales each `y(t)` by `max(0, 1 + sd·z)`
/// after the state has been computed, so the noiseless dynamics stay intact.
pub fn simulate_series(
    params: &ModelParams,
    bins: usize,
    seed_count: f64,
    bin_width: i64,
    noise: Option<Noise>,
) -> Result<EvolutionSeries> {
    if bins < 2 {
        return Err(Error::InvalidParameter("simulation needs at least 2 bins".into()));
    }
    let (mut y, n, total) = match params {
        ModelParams::Si(p) => {
            validate_si(p)?;
            if !(seed_count >= 1.0) || seed_count > p.population {
                return Err(Error::InvalidParameter(format!(
                    "SI seed count must be in [1, N], got {seed_count}"
                )));
            }
            let mut y = Vec::with_capacity(bins);
            let mut n = Vec::with_capacity(bins);
            let mut state = seed_count;
            for _ in 0..bins {
                let rate = si_rate(state, p)?;
                n.push(state);
                y.push(rate);
                state = (state + rate).min(p.population);
            }
            (y, n, p.population)
        }
        ModelParams::Bass(p) => {
            validate_bass(p)?;
            let y: Vec<f64> = (0..bins).map(|t| bass_rate(t as f64, p)).collect();
            let s = EvolutionSeries::from_counts(y, bin_width)?;
            (s.y, s.n, s.total)
        }
    };
    if let Some(noise) = noise {
        let normal = Normal::new(0.0, noise.relative_sd)
            .map_err(|e| Error::InvalidParameter(format!("noise: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        for v in &mut y {
            *v *= (1.0 + normal.sample(&mut rng)).max(0.0);
        }
    }
    Ok(EvolutionSeries {
        y,
        n,
        total,
        bin_width,
    })
}

fn validate_si(p: &SiParams) -> Result<()> {
    let ok = p.beta > 0.0
        && p.epsilon > 0.0
        && p.alpha > 0.0
        && p.alpha <= 1.0
        && p.gamma > 0.0
        && p.gamma <= 1.0
        && p.population > 0.0
        && p.population.is_finite();
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("invalid SI parameters {p:?}")))
    }
}

fn validate_bass(p: &BassParams) -> Result<()> {
    let ok = [p.m, p.p, p.q, p.epsilon].iter().all(|v| *v > 0.0 && v.is_finite());
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("invalid Bass parameters {p:?}")))
    }
}
