//! Least-squares fits (power laws, decay exponents, the oscillating `xx`
//! ansatz) and ensemble / long-time averages of trajectory records.

mod ensemble;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use ensemble::{ensemble_summary, EnsembleSummary, SeriesStats, StationaryStat, DEFAULT_STATIONARY_FRACTION};

/// Default distance window of decay-exponent fits.
pub const DEFAULT_DECAY_WINDOW: (f64, f64) = (10.0, 60.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Slope of `ln y` vs `ln x` (for decay fits: `λ = −slope`).
    pub exponent: f64,
    pub prefactor: f64,
    pub stderr: f64,
    /// Closed interval of `x` that was fitted.
    pub window: (f64, f64),
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares `y = a + b x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Parameter(format!("x has {n} points but y has {}", y.len())));
    }
    if n < 2 {
        return Err(Error::Parameter("a linear fit needs at least two points".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Parameter("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let slope_stderr = if n > 2 { (ssr / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Ok(LinearFit { intercept, slope, slope_stderr, r_squared })
}

fn select_window(x: &[f64], y: &[f64], window: Option<(f64, f64)>) -> Result<(Vec<f64>, Vec<f64>, (f64, f64))> {
    if x.len() != y.len() {
        return Err(Error::Parameter(format!("{} abscissae but {} values", x.len(), y.len())));
    }
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let (xs, ys): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, _)| **a >= lo && **a <= hi)
        .map(|(a, b)| (*a, *b))
        .unzip();
    if xs.len() < 4 {
        return Err(Error::Parameter(format!(
            "need at least 4 points in the fit window, found {}",
            xs.len()
        )));
    }
    let used = (
        xs.iter().copied().fold(f64::INFINITY, f64::min),
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    Ok((xs, ys, used))
}

/// `v = A x^p` by least squares on `(ln x, ln v)`.
pub fn fit_power_law(x: &[f64], values: &[f64], window: Option<(f64, f64)>) -> Result<FitResult> {
    let (xs, ys, used) = select_window(x, values, window)?;
    if let Some(bad) = xs.iter().chain(&ys).find(|v| !(**v > 0.0)) {
        return Err(Error::Domain(format!(
            "power-law fits need positive data (found {bad})"
        )));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let fit = linear_fit(&lx, &ly)?;
    Ok(FitResult {
        exponent: fit.slope,
        prefactor: fit.intercept.exp(),
        stderr: fit.slope_stderr,
        window: used,
        r_squared: fit.r_squared,
        points: xs.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayRegime {
    PowerLaw,
    ExponentialLike,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Power-law fit; `lambda = −power.exponent`.
    pub power: FitResult,
    pub lambda: f64,
    /// R² of `ln C̃` vs `ℓ`.
    pub loglinear_r_squared: f64,
    /// Rate `κ` of the log-linear fit `C̃ ∝ e^{−κℓ}`.
    pub loglinear_rate: f64,
    pub regime: DecayRegime,
}

/// Decay exponent `λ` of `C̃_ℓ ∝ ℓ^{−λ}` on a distance window, with the
/// competing exponential fit for regime classification.
pub fn fit_decay_exponent(ells: &[f64], ctilde: &[f64], window: Option<(f64, f64)>) -> Result<DecayFit> {
    let window = window.or(Some(DEFAULT_DECAY_WINDOW));
    let power = fit_power_law(ells, ctilde, window)?;
    let (xs, ys, _) = select_window(ells, ctilde, window)?;
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let lin = linear_fit(&xs, &ly)?;
    let regime = if lin.r_squared > power.r_squared {
        DecayRegime::ExponentialLike
    } else {
        DecayRegime::PowerLaw
    };
    Ok(DecayFit {
        lambda: -power.exponent,
        loglinear_r_squared: lin.r_squared,
        loglinear_rate: -lin.slope,
        power,
        regime,
    })
}

/// Smallest `|cos(qℓ)|` accepted when dividing out the oscillation.
const MIN_PHASE_WEIGHT: f64 = 0.5;

/// Fits `C^xx_{1,1+ℓ} ≈ A cos((π − k*)ℓ) / ℓ^λ` with the wave vector fixed.
///
/// `cxx[k]` is the correlator at distance `ℓ = k + 1`. The envelope
/// `|C_ℓ / cos(qℓ)|` is sampled at local maxima of `|C_ℓ|` inside the window
/// and fitted by a power law; the returned exponent is `λ`.
pub fn fit_xx_ansatz(cxx: &[f64], kstar: f64, window: Option<(f64, f64)>) -> Result<FitResult> {
    if !(kstar > 0.0 && kstar < PI) {
        return Err(Error::Domain(format!("k* must lie in (0, π) (got {kstar})")));
    }
    let q = PI - kstar;
    let (lo, hi) = window.unwrap_or(DEFAULT_DECAY_WINDOW);
    let mut ells = Vec::new();
    let mut env = Vec::new();
    for k in 1..cxx.len().saturating_sub(1) {
        let ell = (k + 1) as f64;
        if ell < lo || ell > hi {
            continue;
        }
        let a = cxx[k].abs();
        if a < cxx[k - 1].abs() || a < cxx[k + 1].abs() {
            continue;
        }
        let w = (q * ell).cos().abs();
        if w < MIN_PHASE_WEIGHT || a == 0.0 {
            continue;
        }
        ells.push(ell);
        env.push(a / w);
    }
    if ells.len() < 4 {
        return Err(Error::Parameter(format!(
            "insufficient data: {} oscillation extrema in window [{lo}, {hi}], need 4",
            ells.len()
        )));
    }
    let mut fit = fit_power_law(&ells, &env, None)?;
    fit.exponent = -fit.exponent;
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn sizes() -> Vec<f64> {
        (4..=17).map(|k| (10 * k) as f64).collect()
    }

    #[test]
    fn exact_power_law() {
        let x = sizes();
        let v: Vec<f64> = x.iter().map(|l| 2.0 * l.sqrt()).collect();
        let f = fit_power_law(&x, &v, None).unwrap();
        assert!((f.exponent - 0.5).abs() < 1e-12);
        assert!((f.prefactor - 2.0).abs() < 1e-10);
        assert!(f.stderr < 1e-10);
        let c = vec![3.0; x.len()];
        assert!(fit_power_law(&x, &c, None).unwrap().exponent.abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = stream_rng(3, 0);
        let x = sizes();
        let v: Vec<f64> = x
            .iter()
            .map(|l| 3.0 * l.powf(0.75) * (1.0 + rng.random_range(-0.01..0.01)))
            .collect();
        let f = fit_power_law(&x, &v, None).unwrap();
        assert!((f.exponent - 0.75).abs() < 0.02);
    }

    #[test]
    fn affine_equivariance() {
        let x = sizes();
        let v: Vec<f64> = x.iter().map(|l| 1.3 * l.powf(0.41) + (l * 0.1).sin()).collect();
        let a = fit_power_law(&x, &v, None).unwrap();
        let w: Vec<f64> = v.iter().map(|y| 7.5 * y).collect();
        let b = fit_power_law(&x, &w, None).unwrap();
        assert!((a.exponent - b.exponent).abs() < 1e-12);
        assert!((b.prefactor / a.prefactor - 7.5).abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!(matches!(fit_power_law(&x, &[1.0, -1.0, 1.0, 1.0], None), Err(Error::Domain(_))));
        assert!(fit_power_law(&x[..3], &[1.0, 1.0, 1.0], None).is_err());
        assert!(fit_power_law(&x, &[1.0, 2.0, 3.0, 4.0], Some((2.0, 3.0))).is_err());
    }

    fn ells() -> Vec<f64> {
        (1..=80).map(|l| l as f64).collect()
    }

    #[test]
    fn decay_exponents() {
        let x = ells();
        let inv: Vec<f64> = x.iter().map(|l| 1.0 / l).collect();
        let f = fit_decay_exponent(&x, &inv, None).unwrap();
        assert!((f.lambda - 1.0).abs() < 1e-12);
        assert_eq!(f.regime, DecayRegime::PowerLaw);
        assert_eq!(f.power.window, (10.0, 60.0));

        let exp: Vec<f64> = x.iter().map(|l| (-l / 5.0).exp()).collect();
        let f = fit_decay_exponent(&x, &exp, None).unwrap();
        assert!(f.power.r_squared < 0.98);
        assert_eq!(f.regime, DecayRegime::ExponentialLike);
        assert!((f.loglinear_rate - 0.2).abs() < 1e-12);

        let mut rng = stream_rng(4, 0);
        let noisy: Vec<f64> = x
            .iter()
            .map(|l| 0.7 / l.sqrt() * (1.0 + rng.random_range(-0.01..0.01)))
            .collect();
        let f = fit_decay_exponent(&x, &noisy, None).unwrap();
        assert!((f.lambda - 0.5).abs() < 0.03);
    }

    #[test]
    fn xx_ansatz() {
        let kstar = 0.2f64.acos();
        let q = PI - kstar;
        let c: Vec<f64> = (1..=80).map(|l| (q * l as f64).cos() / (l as f64).sqrt()).collect();
        let f = fit_xx_ansatz(&c, kstar, None).unwrap();
        assert!((f.exponent - 0.5).abs() < 0.02, "{f:?}");
        assert!((f.prefactor - 1.0).abs() < 0.05);

        let ctilde: Vec<f64> = c.iter().map(|v| v.abs()).collect();
        let d = fit_decay_exponent(&ells(), &ctilde, None).unwrap();
        assert!((d.lambda - f.exponent).abs() < 0.05, "{} vs {}", d.lambda, f.exponent);

        assert!(fit_xx_ansatz(&c[..12], kstar, None).is_err());
        assert!(fit_xx_ansatz(&c, 0.0, None).is_err());
    }
}
