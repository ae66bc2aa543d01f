use serde::{Deserialize, Serialize};

use super::optimize::nelder_mead;
use super::{bass_shape, mape, si_term, BassParams, EvolutionSeries, GrowthModel, ModelParams, SiParams};
use crate::error::{Error, Result};

const MIN_BINS: usize = 5;
const MIN_TOTAL: f64 = 5.0;
const EXPONENT_FLOOR: f64 = 1e-6;
const BASS_COEF_RANGE: (f64, f64) = (1e-5, 5.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Fixed multiplier on both model rates.
    pub epsilon: f64,
    pub beta_max: f64,
    /// Bass time of bin `i` is `i * time_scale`.
    pub time_scale: f64,
    /// Grid points per axis for the Bass `(p, q)` multi-start.
    pub bass_grid: usize,
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            epsilon: 1.0,
            beta_max: 1e9,
            time_scale: 1.0,
            bass_grid: 25,
            tolerance: 1e-6,
            max_evaluations: 5_000,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.epsilon > 0.0
            && self.epsilon.is_finite()
            && self.beta_max > 0.0
            && self.time_scale > 0.0
            && self.time_scale.is_finite()
            && self.bass_grid >= 2
            && self.tolerance > 0.0
            && self.max_evaluations > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid fit configuration {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub model: GrowthModel,
    pub params: ModelParams,
    pub predicted: Vec<f64>,
    /// First bin used for scoring. SI cannot predict bins before the
    /// cumulative count becomes positive.
    pub window_start: usize,
    pub sse: f64,
    pub mape: f64,
    pub converged: bool,
    pub evaluations: usize,
    /// SI only: an exponent reached its upper bound of 1.
    pub logistic_boundary: bool,
}

fn check_series(series: &EvolutionSeries) -> Result<()> {
    if series.len() < MIN_BINS || series.total < MIN_TOTAL {
        return Err(Error::SeriesTooShort {
            min: MIN_BINS,
            bins: series.len(),
            total: series.total,
        });
    }
    if series.n.len() != series.y.len() {
        return Err(Error::LengthMismatch {
            left: series.y.len(),
            right: series.n.len(),
        });
    }
    if series.y.iter().all(|&v| v == 0.0) {
        return Err(Error::AllZero);
    }
    Ok(())
}

/// Least-squares slope through the origin, clamped to `[lo, hi]`.
fn scale_fit(x: &[f64], y: &[f64], lo: f64, hi: f64) -> f64 {
    let (xy, xx) = x
        .iter()
        .zip(y)
        .fold((0.0, 0.0), |(xy, xx), (a, b)| (xy + a * b, xx + a * a));
    if xx == 0.0 {
        return lo;
    }
    (xy / xx).clamp(lo, hi)
}

fn sse(x: &[f64], y: &[f64], scale: f64) -> f64 {
    x.iter().zip(y).map(|(a, b)| (b - scale * a).powi(2)).sum()
}

/// Fits `ε·β·n^α·(N−n)^γ` to the series with `N` fixed to its total.
///
/// The rate is linear in β, so β is solved in closed form for every trial
/// `(α, γ)`; a 10×10 grid over the exponents picks the start for a bounded
/// simplex refinement. Scoring starts at the first bin whose cumulative count
/// is positive, since the rate is zero while nothing has evolved yet.
pub fn fit_si(series: &EvolutionSeries, config: &FitConfig) -> Result<GrowthFit> {
    config.validate()?;
    check_series(series)?;
    let big_n = series.total;
    let start = series
        .n
        .iter()
        .position(|&n| n > 0.0)
        .ok_or(Error::AllZero)?;
    let n = &series.n[start..];
    let y = &series.y[start..];
    if n.iter().any(|&v| v > big_n) {
        return Err(Error::OutOfRange {
            what: "cumulative count",
            detail: format!("exceeds series total {big_n}"),
        });
    }

    let mut evaluations = 0;
    let mut x = vec![0.0; n.len()];
    let mut objective = |alpha: f64, gamma: f64| -> (f64, f64) {
        evaluations += 1;
        for (xi, &ni) in x.iter_mut().zip(n) {
            *xi = config.epsilon * si_term(ni, big_n, alpha, gamma);
        }
        let beta = scale_fit(&x, y, f64::MIN_POSITIVE, config.beta_max);
        (sse(&x, y, beta), beta)
    };

    let mut best = (f64::INFINITY, [1.0, 1.0]);
    for i in 1..=10 {
        for j in 1..=10 {
            let (a, g) = (i as f64 / 10.0, j as f64 / 10.0);
            let (v, _) = objective(a, g);
            if v < best.0 {
                best = (v, [a, g]);
            }
        }
    }
    let refined = nelder_mead(
        |p| objective(p[0], p[1]).0,
        &best.1,
        &[0.05, 0.05],
        &[EXPONENT_FLOOR, EXPONENT_FLOOR],
        &[1.0, 1.0],
        config.tolerance,
        config.max_evaluations,
    );
    let (alpha, gamma) = (refined.x[0], refined.x[1]);
    let (fit_sse, beta) = objective(alpha, gamma);

    let params = SiParams {
        beta,
        alpha,
        gamma,
        epsilon: config.epsilon,
        population: big_n,
    };
    let predicted: Vec<f64> = series
        .n
        .iter()
        .map(|&ni| config.epsilon * beta * si_term(ni.min(big_n), big_n, alpha, gamma))
        .collect();
    let score = mape(&series.y[start..], &predicted[start..])?;
    Ok(GrowthFit {
        model: GrowthModel::Si,
        params: ModelParams::Si(params),
        predicted,
        window_start: start,
        sse: fit_sse,
        mape: score,
        converged: refined.converged,
        evaluations,
        logistic_boundary: alpha >= 1.0 - 1e-9 || gamma >= 1.0 - 1e-9,
    })
}

/// Fits the Bass rate with `m` bounded to `[N/2, 10N]` and `p, q` to
/// `[1e-5, 5]`. `m` is solved in closed form for every trial `(p, q)`; the
/// coefficients are searched on a log grid and refined in log space.
pub fn fit_bass(series: &EvolutionSeries, config: &FitConfig) -> Result<GrowthFit> {
    config.validate()?;
    check_series(series)?;
    let big_n = series.total;
    let (m_lo, m_hi) = (big_n / 2.0, 10.0 * big_n);
    let times: Vec<f64> = (0..series.len()).map(|i| i as f64 * config.time_scale).collect();
    let y = &series.y;

    let mut evaluations = 0;
    let mut x = vec![0.0; times.len()];
    let mut objective = |log_p: f64, log_q: f64| -> (f64, f64) {
        evaluations += 1;
        let (p, q) = (10f64.powf(log_p), 10f64.powf(log_q));
        for (xi, &t) in x.iter_mut().zip(&times) {
            *xi = config.epsilon * bass_shape(t, p, q);
        }
        let m = scale_fit(&x, y, m_lo, m_hi);
        (sse(&x, y, m), m)
    };

    let (lo, hi) = (BASS_COEF_RANGE.0.log10(), BASS_COEF_RANGE.1.log10());
    let k = config.bass_grid;
    let axis: Vec<f64> = (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect();
    let mut best = (f64::INFINITY, [lo, lo]);
    for &lp in &axis {
        for &lq in &axis {
            let (v, _) = objective(lp, lq);
            if v < best.0 {
                best = (v, [lp, lq]);
            }
        }
    }
    let step = (hi - lo) / (k - 1) as f64 / 2.0;
    let refined = nelder_mead(
        |v| objective(v[0], v[1]).0,
        &best.1,
        &[step, step],
        &[lo, lo],
        &[hi, hi],
        config.tolerance,
        config.max_evaluations,
    );
    let (fit_sse, m) = objective(refined.x[0], refined.x[1]);
    let params = BassParams {
        m,
        p: 10f64.powf(refined.x[0]),
        q: 10f64.powf(refined.x[1]),
        epsilon: config.epsilon,
    };
    let predicted: Vec<f64> = times
        .iter()
        .map(|&t| config.epsilon * m * bass_shape(t, params.p, params.q))
        .collect();
    let score = mape(y, &predicted)?;
    Ok(GrowthFit {
        model: GrowthModel::Bass,
        params: ModelParams::Bass(params),
        predicted,
        window_start: 0,
        sse: fit_sse,
        mape: score,
        converged: refined.converged,
        evaluations,
        logistic_boundary: false,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{simulate_series, Noise};
    use super::*;

    fn si_params(beta: f64, alpha: f64, gamma: f64, population: f64) -> SiParams {
        SiParams {
            beta,
            alpha,
            gamma,
            epsilon: 1.0,
            population,
        }
    }

    fn si_of(fit: &GrowthFit) -> SiParams {
        match fit.params {
            ModelParams::Si(p) => p,
            ModelParams::Bass(_) => panic!("expected SI"),
        }
    }

    fn bass_of(fit: &GrowthFit) -> BassParams {
        match fit.params {
            ModelParams::Bass(p) => p,
            ModelParams::Si(_) => panic!("expected Bass"),
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn si_logistic_recovery() {
        let truth = si_params(0.01, 1.0, 1.0, 1000.0);
        let s = simulate_series(&ModelParams::Si(truth), 100, 1.0, 86_400, None).unwrap();
        let fit = fit_si(&s, &FitConfig::default()).unwrap();
        let p = si_of(&fit);
        assert!(rel(p.beta, 0.01) < 0.05, "{p:?}");
        assert!(fit.mape <= 2.0);
        assert!(fit.logistic_boundary);
        assert!(fit.converged);
        assert_eq!(fit.predicted.len(), 100);
    }

    #[test]
    fn si_sublinear_recovery_and_fixed_point() {
        let truth = si_params(0.002, 0.6, 0.8, 5000.0);
        let s = simulate_series(&ModelParams::Si(truth), 80, 3.0, 1, None).unwrap();
        let fit = fit_si(&s, &FitConfig::default()).unwrap();
        let p = si_of(&fit);
        assert!(rel(p.alpha, 0.6) < 1e-3 && rel(p.gamma, 0.8) < 1e-3 && rel(p.beta, 0.002) < 1e-2, "{p:?}");

        let own = EvolutionSeries {
            y: fit.predicted.clone(),
            ..s.clone()
        };
        let refit = si_of(&fit_si(&own, &FitConfig::default()).unwrap());
        assert!(rel(refit.alpha, p.alpha) < 1e-3);
        assert!(rel(refit.gamma, p.gamma) < 1e-3);
        assert!(rel(refit.beta, p.beta) < 1e-3);

        let scaled = EvolutionSeries {
            y: s.y.iter().map(|v| v * 3.0).collect(),
            ..s.clone()
        };
        let k = si_of(&fit_si(&scaled, &FitConfig::default()).unwrap());
        assert!(rel(k.beta, 3.0 * p.beta) < 1e-3);
        assert!(rel(k.alpha, p.alpha) < 1e-3);
    }

    #[test]
    fn si_noisy_fit() {
        let truth = si_params(0.01, 1.0, 1.0, 1000.0);
        let noise = Some(Noise { relative_sd: 0.05, seed: 42 });
        let s = simulate_series(&ModelParams::Si(truth), 100, 1.0, 1, noise).unwrap();
        let fit = fit_si(&s, &FitConfig::default()).unwrap();
        assert!(fit.mape <= 10.0, "{}", fit.mape);
    }

    #[test]
    fn bass_recovery() {
        let truth = BassParams {
            m: 1000.0,
            p: 0.03,
            q: 0.38,
            epsilon: 1.0,
        };
        let s = simulate_series(&ModelParams::Bass(truth), 60, 0.0, 1, None).unwrap();
        let fit = fit_bass(&s, &FitConfig::default()).unwrap();
        let p = bass_of(&fit);
        assert!(rel(p.m, 1000.0) < 0.05 && rel(p.p, 0.03) < 0.05 && rel(p.q, 0.38) < 0.05, "{p:?}");
        assert!(fit.mape <= 2.0);
        let peak = fit
            .predicted
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0 as f64;
        assert!((peak - 6.19f64.round()).abs() <= 1.0);

        let scaled = EvolutionSeries {
            y: s.y.iter().map(|v| v * 2.0).collect(),
            ..s.clone()
        };
        let k = bass_of(&fit_bass(&scaled, &FitConfig::default()).unwrap());
        assert!(rel(k.m, 2.0 * p.m) < 1e-3 && rel(k.p, p.p) < 1e-3 && rel(k.q, p.q) < 1e-3);
    }

    #[test]
    fn bass_external_dominated() {
        let truth = BassParams {
            m: 400.0,
            p: 0.2,
            q: 0.05,
            epsilon: 1.0,
        };
        let s = simulate_series(&ModelParams::Bass(truth), 40, 0.0, 1, None).unwrap();
        let fit = fit_bass(&s, &FitConfig::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.predicted.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn fits_are_deterministic() {
        let s = EvolutionSeries::from_counts(vec![1.0, 4.0, 9.0, 15.0, 12.0, 6.0, 2.0, 1.0], 1).unwrap();
        let a = fit_si(&s, &FitConfig::default()).unwrap();
        let b = fit_si(&s, &FitConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.window_start, 1);
        assert_eq!(fit_bass(&s, &FitConfig::default()).unwrap(), fit_bass(&s, &FitConfig::default()).unwrap());
    }

    #[test]
    fn rejects_bad_series() {
        let zeros = EvolutionSeries::from_counts(vec![0.0; 10], 1).unwrap();
        assert!(fit_si(&zeros, &FitConfig::default()).is_err());
        let short = EvolutionSeries::from_counts(vec![5.0, 3.0, 2.0], 1).unwrap();
        assert!(matches!(fit_si(&short, &FitConfig::default()), Err(Error::SeriesTooShort { .. })));
        assert!(matches!(fit_bass(&short, &FitConfig::default()), Err(Error::SeriesTooShort { .. })));
        let lone = EvolutionSeries::from_counts(vec![9.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1).unwrap();
        assert!(fit_bass(&lone, &FitConfig::default()).is_ok());
    }
}
