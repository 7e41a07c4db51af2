//! Periodic 2D lattices: the electrical transmission line (ETL) and the
//! Klein-Gordon (KG) chain, their vector fields, symplectic steppers, normal
//! mode energies and single-mode initial data.

mod energy;
mod integrator;
mod snapshot;

pub use energy::{mode_energies, quadratic_energy, total_energy, ModeSpectrum};
pub use integrator::{step_leapfrog, Integrator, Stepper};
pub use snapshot::{read_snapshot_csv, write_snapshot_csv};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{apply_delta1, delta1_symbol_unchecked, wrap_index, Fft2, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatticeRegime {
    #[serde(rename = "ETL")]
    Etl,
    #[serde(rename = "KG")]
    Kg,
}

impl std::fmt::Display for LatticeRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LatticeRegime::Etl => "ETL",
            LatticeRegime::Kg => "KG",
        })
    }
}

/// Lattice model and size. The lattice has `(2 N1 + 1) x (2 N2 + 1)` sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub regime: LatticeRegime,
    pub big_n1: usize,
    pub big_n2: usize,
    pub alpha: f64,
    pub beta: f64,
    /// KG mass; always 1.
    pub m: f64,
}

impl LatticeParams {
    pub fn new(regime: LatticeRegime, big_n1: usize, big_n2: usize, alpha: f64, beta: f64) -> Result<Self> {
        if big_n1 == 0 || big_n2 < big_n1 {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= N1 <= N2, got N1 = {big_n1}, N2 = {big_n2}"
            )));
        }
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParameter("alpha and beta must be finite".into()));
        }
        if regime == LatticeRegime::Kg && alpha != 0.0 {
            return Err(Error::InvalidParameter("the KG lattice has no cubic term; set alpha = 0".into()));
        }
        Ok(Self { regime, big_n1, big_n2, alpha, beta, m: 1.0 })
    }

    pub fn etl(big_n1: usize, big_n2: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(LatticeRegime::Etl, big_n1, big_n2, alpha, beta)
    }

    pub fn kg(big_n1: usize, big_n2: usize, beta: f64) -> Result<Self> {
        Self::new(LatticeRegime::Kg, big_n1, big_n2, 0.0, beta)
    }

    /// Lattice whose anisotropy realizes `sigma_target` as closely as the
    /// integer `N2 = round((N1 + 1/2)^sigma - 1/2)` allows.
    pub fn with_sigma(regime: LatticeRegime, big_n1: usize, sigma_target: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(regime, big_n1, n2_for_sigma(big_n1, sigma_target)?, alpha, beta)
    }

    /// Grid extents `(2 N1 + 1, 2 N2 + 1)`.
    pub fn extents(&self) -> (usize, usize) {
        (2 * self.big_n1 + 1, 2 * self.big_n2 + 1)
    }

    pub fn sites(&self) -> usize {
        let (a, b) = self.extents();
        a * b
    }

    pub fn mu(&self) -> f64 {
        2.0 / (2 * self.big_n1 + 1) as f64
    }

    pub fn sigma(&self) -> f64 {
        (self.big_n2 as f64 + 0.5).ln() / (self.big_n1 as f64 + 0.5).ln()
    }

    /// `mu^sigma`, which equals `1 / (N2 + 1/2)` exactly.
    pub fn mu_sigma(&self) -> f64 {
        1.0 / (self.big_n2 as f64 + 0.5)
    }

    /// Squared normal-mode frequency of mode `k`.
    pub fn omega_sq(&self, k1: i64, k2: i64) -> f64 {
        let lap = -delta1_symbol_unchecked((k1, k2), self.extents());
        match self.regime {
            LatticeRegime::Etl => lap,
            LatticeRegime::Kg => self.m * self.m + lap,
        }
    }

    /// `(N1 + 1/2)(N2 + 1/2)`, the normalization of the specific energy.
    pub fn specific_scale(&self) -> f64 {
        (self.big_n1 as f64 + 0.5) * (self.big_n2 as f64 + 0.5)
    }

    /// Largest linear frequency on the lattice.
    pub fn omega_max(&self) -> f64 {
        let (n1, n2) = self.extents();
        let s = |n: usize| {
            let x = (std::f64::consts::PI * (n / 2) as f64 / n as f64).sin();
            4.0 * x * x
        };
        let lap = s(n1) + s(n2);
        match self.regime {
            LatticeRegime::Etl => lap.sqrt(),
            LatticeRegime::Kg => (self.m * self.m + lap).sqrt(),
        }
    }

    /// Default step: `mu / 10` (ETL), `min(0.05, 1 / (4 omega_max))` (KG).
    pub fn default_dt(&self) -> f64 {
        match self.regime {
            LatticeRegime::Etl => self.mu() / 10.0,
            LatticeRegime::Kg => 0.05f64.min(0.25 / self.omega_max()),
        }
    }
}

pub fn n2_for_sigma(big_n1: usize, sigma: f64) -> Result<usize> {
    if !(sigma.is_finite() && sigma >= 1.0) || big_n1 == 0 {
        return Err(Error::InvalidParameter(format!("cannot realize sigma = {sigma} with N1 = {big_n1}")));
    }
    let n2 = ((big_n1 as f64 + 0.5).powf(sigma) - 0.5).round();
    if n2 > 1e8 {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} with N1 = {big_n1} needs N2 = {n2}")));
    }
    Ok(n2 as usize)
}

/// Displacements `Q` and momenta `P` on the lattice. Site `j` is stored at
/// row-major position `(j1 mod n1, j2 mod n2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
    n1: usize,
    n2: usize,
}

impl LatticeState {
    pub fn zeros(params: &LatticeParams) -> Self {
        let (n1, n2) = params.extents();
        Self { q: vec![0.0; n1 * n2], p: vec![0.0; n1 * n2], t: 0.0, n1, n2 }
    }

    pub fn from_fields(params: &LatticeParams, q: Vec<f64>, p: Vec<f64>, t: f64) -> Result<Self> {
        let (n1, n2) = params.extents();
        if q.len() != n1 * n2 || p.len() != n1 * n2 {
            return Err(Error::Config(format!(
                "state needs {} sites per field, got {} and {}",
                n1 * n2,
                q.len(),
                p.len()
            )));
        }
        Ok(Self { q, p, t, n1, n2 })
    }

    pub fn extents(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn offset(&self, j1: i64, j2: i64) -> usize {
        wrap_index(j1, self.n1) * self.n2 + wrap_index(j2, self.n2)
    }

    pub fn q_at(&self, j1: i64, j2: i64) -> f64 {
        self.q[self.offset(j1, j2)]
    }

    pub fn p_at(&self, j1: i64, j2: i64) -> f64 {
        self.p[self.offset(j1, j2)]
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.p).all(|v| v.is_finite())
    }

    /// `sup_j |Q_j - Q'_j| + |P_j - P'_j|`
    pub fn sup_distance(&self, other: &LatticeState) -> f64 {
        self.q
            .iter()
            .zip(&other.q)
            .zip(self.p.iter().zip(&other.p))
            .map(|((a, b), (c, d))| (a - b).abs() + (c - d).abs())
            .fold(0.0, f64::max)
    }

    fn check(&self, params: &LatticeParams) -> Result<()> {
        if (self.n1, self.n2) != params.extents() {
            return Err(Error::Config(format!(
                "state is {}x{} but the lattice is {:?}",
                self.n1,
                self.n2,
                params.extents()
            )));
        }
        Ok(())
    }
}

fn expect_regime(params: &LatticeParams, regime: LatticeRegime) -> Result<()> {
    if params.regime != regime {
        return Err(Error::RegimeMismatch(format!("expected {regime}, got {}", params.regime)));
    }
    Ok(())
}

/// `dQ/dt = -Delta_1 P`, `dP/dt = -Q - alpha Q^2 - beta Q^3`.
pub fn etl_rhs(state: &LatticeState, params: &LatticeParams) -> Result<(Vec<f64>, Vec<f64>)> {
    expect_regime(params, LatticeRegime::Etl)?;
    state.check(params)?;
    let (n1, n2) = state.extents();
    let mut dq = vec![0.0; n1 * n2];
    apply_delta1(n1, n2, &state.p, &mut dq);
    dq.iter_mut().for_each(|v| *v = -*v);
    let (a, b) = (params.alpha, params.beta);
    let dp = state.q.iter().map(|&q| -q - a * q * q - b * q * q * q).collect();
    Ok((dq, dp))
}

/// `dQ/dt = P`, `dP/dt = Delta_1 Q - Q - beta Q^3`.
pub fn kg_rhs(state: &LatticeState, params: &LatticeParams) -> Result<(Vec<f64>, Vec<f64>)> {
    expect_regime(params, LatticeRegime::Kg)?;
    state.check(params)?;
    let (n1, n2) = state.extents();
    let mut dp = vec![0.0; n1 * n2];
    apply_delta1(n1, n2, &state.q, &mut dp);
    let (m2, b) = (params.m * params.m, params.beta);
    for (d, &q) in dp.iter_mut().zip(&state.q) {
        *d += -m2 * q - b * q * q * q;
    }
    Ok((state.p.clone(), dp))
}

/// Data exciting the symmetric family of `k0` with folded specific energy
/// `C0 mu^4` (ETL) or `C0 mu^2` (KG). `phase = 0` puts all of it in `Q`.
pub fn single_mode_data(params: &LatticeParams, k0: (i64, i64), c0: f64, phase: f64) -> Result<LatticeState> {
    let scale = match params.regime {
        LatticeRegime::Etl => params.mu().powi(4),
        LatticeRegime::Kg => params.mu().powi(2),
    };
    multi_mode_data(params, &[(k0, c0 * scale)], phase)
}

/// Like [`single_mode_data`] but also excites the harmonics `n k0`,
/// `n = 2..=harmonics`, with energies decaying as `exp(-decay (n - 1))`.
pub fn harmonic_data(
    params: &LatticeParams,
    k0: (i64, i64),
    c0: f64,
    phase: f64,
    harmonics: usize,
    decay: f64,
) -> Result<LatticeState> {
    let scale = match params.regime {
        LatticeRegime::Etl => params.mu().powi(4),
        LatticeRegime::Kg => params.mu().powi(2),
    };
    let modes: Vec<_> = (1..=harmonics.max(1) as i64)
        .map(|n| ((n * k0.0, n * k0.1), c0 * scale * (-decay * (n - 1) as f64).exp()))
        .collect();
    multi_mode_data(params, &modes, phase)
}

/// Real state with prescribed folded specific energies on the listed modes
/// (each in `Z^2_+`); every other mode is left empty.
pub fn multi_mode_data(params: &LatticeParams, modes: &[((i64, i64), f64)], phase: f64) -> Result<LatticeState> {
    let (n1, n2) = params.extents();
    let (b1, b2) = (params.big_n1 as i64, params.big_n2 as i64);
    let mut qh = vec![C64::new(0.0, 0.0); n1 * n2];
    let mut ph = qh.clone();
    for &((k1, k2), spec) in modes {
        if k1 < 0 || k2 < 0 || k1 > b1 || k2 > b2 {
            return Err(Error::IndexOutOfRange(format!("mode ({k1}, {k2}) not in Z^2_+ of the lattice")));
        }
        if !(spec > 0.0) {
            return Err(Error::InvalidParameter(format!("mode energy must be positive, got {spec}")));
        }
        if params.regime == LatticeRegime::Etl && k1 == 0 && k2 == 0 {
            return Err(Error::InvalidParameter("the ETL zero mode must stay empty (zero average)".into()));
        }
        let variants = sign_variants(k1, k2);
        // E_k per signed mode, then |Q^|, |P^| with E = (w^2|P^|^2 + |Q^|^2)/2
        // (ETL) or (|P^|^2 + w^2|Q^|^2)/2 (KG).
        let e = spec / variants.len() as f64 * params.specific_scale();
        let w = params.omega_sq(k1, k2).sqrt();
        let (qa, pa) = match params.regime {
            LatticeRegime::Etl => ((2.0 * e).sqrt() * phase.cos(), -(2.0 * e).sqrt() * phase.sin() / w),
            LatticeRegime::Kg => ((2.0 * e).sqrt() * phase.cos() / w, -(2.0 * e).sqrt() * phase.sin()),
        };
        for (s1, s2) in variants {
            let o = wrap_index(s1, n1) * n2 + wrap_index(s2, n2);
            qh[o] = C64::new(qa, 0.0);
            ph[o] = C64::new(pa, 0.0);
        }
    }
    let fft = Fft2::new(n1, n2);
    let norm = 1.0 / ((n1 * n2) as f64).sqrt();
    fft.inverse(&mut qh);
    fft.inverse(&mut ph);
    let q = qh.iter().map(|v| v.re * norm).collect();
    let p = ph.iter().map(|v| v.re * norm).collect();
    LatticeState::from_fields(params, q, p, 0.0)
}

/// Distinct signed modes `(+-k1, +-k2)`.
pub fn sign_variants(k1: i64, k2: i64) -> Vec<(i64, i64)> {
    let mut v = vec![(k1, k2), (-k1, k2), (k1, -k2), (-k1, -k2)];
    v.sort_unstable();
    v.dedup();
    v
}
