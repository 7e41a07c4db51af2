use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Energies below `FIT_NOISE_FLOOR` times the largest one are treated as
/// round-off and left out of the exponential fit.
pub const FIT_NOISE_FLOOR: f64 = 1e-24;

/// Least-squares fit of `sup_error ~ C mu^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub gamma: f64,
    pub log_c: f64,
    /// Standard error of the slope; `None` with only two points.
    pub stderr: Option<f64>,
    /// RMS of the log-scale residuals.
    pub residual: f64,
}

/// Fit of `E(k) <= C1 mu^p exp(-rho' |k|) + C2 mu^(p + gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationFit {
    pub rho: f64,
    pub c1: f64,
    pub c2: f64,
    /// RMS of the log residuals of the radial envelope over its log span.
    pub residual: f64,
    pub bins: usize,
}

/// Ordinary least squares `y = a + s x`; returns `(s, a, rms, stderr)`.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64, Option<f64>) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let s = sxy / sxx;
    let a = my - s * mx;
    let ss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - s * u).powi(2)).sum();
    let stderr = (x.len() > 2).then(|| (ss / (n - 2.0) / sxx).sqrt());
    (s, a, (ss / n).sqrt(), stderr)
}

/// Slope of `log err` against `log mu`.
pub fn fit_gamma(mus: &[f64], errors: &[f64]) -> Result<GammaFit> {
    if mus.len() != errors.len() {
        return Err(Error::InvalidParameter("mu and error lists differ in length".into()));
    }
    let pts: Vec<(f64, f64)> =
        mus.iter().zip(errors).filter(|(m, e)| **m > 0.0 && **e > 0.0).map(|(m, e)| (m.ln(), e.ln())).collect();
    let distinct = pts.iter().any(|p| (p.0 - pts[0].0).abs() > 1e-12);
    if pts.len() < 2 || !distinct {
        return Err(Error::InvalidParameter("need two distinct mu with positive errors".into()));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (gamma, log_c, residual, stderr) = line_fit(&x, &y);
    Ok(GammaFit { gamma, log_c, stderr, residual })
}

/// Fits the exponential envelope of a spectrum given as
/// `(K1, K2, specific energy)` triples with `|K| = sqrt(K1^2 + K2^2)`,
/// i.e. `|(kappa1/mu, kappa2/mu^sigma)|`.
///
/// The envelope is the largest energy per radial bin `round(|K|)`; a line
/// through its logarithm gives `rho'`. `C1` is the smallest constant for
/// which the exponential covers every mode above the noise floor, `C2` the
/// smallest floor covering the rest. `None` if fewer than three bins carry
/// energy or the slope is not negative.
pub fn fit_localization(
    spectrum: impl IntoIterator<Item = (i64, i64, f64)>,
    mu: f64,
    power: i32,
    gamma: f64,
) -> Option<LocalizationFit> {
    let modes: Vec<(f64, f64)> =
        spectrum.into_iter().map(|(k1, k2, e)| (((k1 * k1 + k2 * k2) as f64).sqrt(), e)).collect();
    let top = modes.iter().map(|m| m.1).fold(0.0, f64::max);
    if !(top > 0.0) {
        return None;
    }
    let floor = FIT_NOISE_FLOOR * top;
    let mut env: Vec<f64> = Vec::new();
    for &(r, e) in &modes {
        if e > floor {
            let b = r.round() as usize;
            if env.len() <= b {
                env.resize(b + 1, 0.0);
            }
            env[b] = env[b].max(e);
        }
    }
    let (x, y): (Vec<f64>, Vec<f64>) =
        env.iter().enumerate().filter(|(_, e)| **e > 0.0).map(|(r, e)| (r as f64, e.ln())).unzip();
    if x.len() < 3 {
        return None;
    }
    let (slope, _, rms, _) = line_fit(&x, &y);
    let rho = -slope;
    if !(rho > 0.0) {
        return None;
    }
    let span = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - y.iter().cloned().fold(f64::INFINITY, f64::min);
    let residual = if span > 0.0 { rms / span } else { 0.0 };
    let scale = mu.powi(power);
    let c1 = modes.iter().filter(|m| m.1 > floor).map(|&(r, e)| e * (rho * r).exp() / scale).fold(0.0, f64::max);
    let c2 = modes
        .iter()
        .map(|&(r, e)| (e - c1 * scale * (-rho * r).exp()).max(0.0))
        .fold(0.0, f64::max)
        / mu.powf(power as f64 + gamma);
    Some(LocalizationFit { rho, c1, c2, residual, bins: x.len() })
}

/// Fraction of the total energy carried by modes with `|K1| + |K2|` above
/// `2 |log mu| / rho`.
pub fn high_mode_fraction(spectrum: impl IntoIterator<Item = (i64, i64, f64)>, mu: f64, rho: f64) -> f64 {
    let cut = 2.0 * mu.ln().abs() / rho;
    let (mut high, mut total) = (0.0, 0.0);
    for (k1, k2, e) in spectrum {
        total += e;
        if (k1.abs() + k2.abs()) as f64 > cut {
            high += e;
        }
    }
    if total > 0.0 {
        high / total
    } else {
        0.0
    }
}
