use std::collections::HashMap;
use std::fmt::Write as _;

use crate::bridge::ErrorReport;
use crate::error::{Error, Result};

/// Folded spectrum of a report at snapshot time `t` as CSV with columns
/// `kappa1,kappa2,E_kappa,bound_value`, one row per mode of `Z^2_+`.
/// Modes not stored in the report (below its floor) are written as 0.
/// `bound_value = C1 mu^p exp(-rho' |(k1, k2)|) + C2 mu^(p + gamma)`, or NaN
/// when the report carries no fit.
pub fn emit_spectrum_table(report: &ErrorReport, t: f64) -> Result<String> {
    let tol = 1e-9 * t.abs().max(1.0);
    let ts = *report.snapshot_times.iter().find(|s| (*s - t).abs() <= tol).ok_or_else(|| {
        Error::Validation(format!("t = {t} is not a snapshot time; available: {:?}", report.snapshot_times))
    })?;
    let stored: HashMap<(i64, i64), f64> =
        report.spectra.iter().filter(|s| s.t == ts).map(|s| ((s.k1, s.k2), s.e)).collect();
    let mu = report.mu;
    let mu_s = 1.0 / (report.big_n2 as f64 + 0.5);
    let p = report.energy_power as f64;
    let bound = |k1: i64, k2: i64| match (report.rho_fit, report.c1, report.c2) {
        (Some(rho), Some(c1), Some(c2)) => {
            let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
            c1 * mu.powf(p) * (-rho * r).exp() + c2 * mu.powf(p + report.gamma_target)
        }
        _ => f64::NAN,
    };
    let mut out = String::from("kappa1,kappa2,E_kappa,bound_value\n");
    for k1 in 0..=report.big_n1 as i64 {
        for k2 in 0..=report.big_n2 as i64 {
            let e = stored.get(&(k1, k2)).copied().unwrap_or(0.0);
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", mu * k1 as f64, mu_s * k2 as f64, e, bound(k1, k2));
        }
    }
    Ok(out)
}
