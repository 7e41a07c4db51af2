use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `coefficient * mu^mu_power * d1^d1 * d2^d2`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionTerm {
    pub coefficient: f64,
    pub mu_power: f64,
    pub d1: u32,
    pub d2: u32,
}

impl DispersionTerm {
    /// Value on the torus mode `exp(i pi (k1 y1 + k2 y2))`.
    pub fn symbol_at(&self, mu: f64, k1: f64, k2: f64) -> f64 {
        // d^(2n) -> (i pi k)^(2n) = (-1)^n (pi k)^(2n)
        let f = |k: f64, p: u32| {
            let s = if (p / 2) % 2 == 0 { 1.0 } else { -1.0 };
            s * (PI * k).powi(p as i32)
        };
        self.coefficient * mu.powf(self.mu_power) * f(k1, self.d1) * f(k2, self.d2)
    }
}

/// Truncated expansion of the rescaled lattice Laplacian,
/// `d1^2 + mu^2/12 d1^4 + mu^(2 sigma - 2) d2^2 + ...` with the general
/// coefficient `c_m mu^(2m) d1^(2m+2)`, `c_m = 2 / (2m+2)!`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionExpansion {
    pub mu: f64,
    pub sigma: f64,
    pub order: u32,
    /// `(m, c_m)` for the `c_m` that appear, `m >= 2`
    pub coefficients: Vec<(u32, f64)>,
    pub terms: Vec<DispersionTerm>,
}

impl DispersionExpansion {
    pub fn symbol(&self, k1: f64, k2: f64) -> f64 {
        self.terms.iter().map(|t| t.symbol_at(self.mu, k1, k2)).sum()
    }

    /// `[-4 sin^2(mu pi k1 / 2) - 4 sin^2(mu^sigma pi k2 / 2)] / mu^2`
    pub fn exact_symbol(&self, k1: f64, k2: f64) -> f64 {
        let s1 = (self.mu * PI * k1 / 2.0).sin();
        let s2 = (self.mu.powf(self.sigma) * PI * k2 / 2.0).sin();
        -4.0 * (s1 * s1 + s2 * s2) / (self.mu * self.mu)
    }
}

/// `c_m = 2 / (2m+2)!` as a reduced fraction, while it fits in `u128`.
pub fn expansion_coefficient(m: u32) -> Option<(u128, u128)> {
    let mut f: u128 = 1;
    for i in 2..=(2 * m as u128 + 2) {
        f = f.checked_mul(i)?;
    }
    // (2m+2)! is even for m >= 0
    Some((1, f / 2))
}

/// Terms with derivative order up to `2 order` in each direction.
pub fn dispersion_expansion(mu: f64, sigma: f64, order: u32) -> Result<DispersionExpansion> {
    if order == 0 {
        return Err(Error::InvalidParameter("expansion order must be at least 1".into()));
    }
    let mut terms = Vec::new();
    let mut coefficients = Vec::new();
    for n in 1..=order {
        let (num, den) = expansion_coefficient(n - 1)
            .ok_or_else(|| Error::InvalidParameter(format!("expansion order {order} is too large")))?;
        let c = num as f64 / den as f64;
        if n >= 3 {
            coefficients.push((n - 1, c));
        }
        let p = 2 * n;
        terms.push(DispersionTerm { coefficient: c, mu_power: (p - 2) as f64, d1: p, d2: 0 });
        terms.push(DispersionTerm { coefficient: c, mu_power: p as f64 * sigma - 2.0, d1: 0, d2: p });
    }
    Ok(DispersionExpansion { mu, sigma, order, coefficients, terms })
}
