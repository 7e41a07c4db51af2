//! Correspondence between lattice states and normal-form fields: the
//! long-wave rescalings, coordinate changes, approximate lattice solutions
//! built from PDE solutions, specific-energy formulas, and the comparison
//! driver that measures approximation error and spectral localization.

mod approx;
mod compare;
mod coords;
mod fit;

pub use approx::{
    build_approx, build_approx_etl, build_approx_kg, lattice_to_pde, spec_energies_from_pde, spec_energy_from_pde,
};
pub use compare::{
    apply_gamma_fit, default_integrator, run_comparison, run_comparison_with, run_scan, ComparisonOptions, ErrorReport, ModeGap, ReportStatus, SpectrumEntry,
};
pub use coords::{psi_to_qp, qp_to_psi, qp_to_xieta, xieta_to_qp};
pub use fit::{FIT_NOISE_FLOOR, fit_gamma, fit_localization, high_mode_fraction, GammaFit, LocalizationFit};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeParams, LatticeRegime};
use crate::normal_form::{Flow, NlsFlow, XiEtaFlow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "KP")]
    Kp,
    #[serde(rename = "KdV")]
    Kdv,
    #[serde(rename = "mKdV")]
    Mkdv,
    #[serde(rename = "NLS1D")]
    Nls1d,
    #[serde(rename = "NLS2D")]
    Nls2d,
}

impl Regime {
    pub const ALL: [Regime; 5] = [Regime::Kp, Regime::Kdv, Regime::Mkdv, Regime::Nls1d, Regime::Nls2d];

    pub fn name(self) -> &'static str {
        match self {
            Regime::Kp => "KP",
            Regime::Kdv => "KdV",
            Regime::Mkdv => "mKdV",
            Regime::Nls1d => "NLS1D",
            Regime::Nls2d => "NLS2D",
        }
    }

    pub fn lattice(self) -> LatticeRegime {
        match self {
            Regime::Kp | Regime::Kdv | Regime::Mkdv => LatticeRegime::Etl,
            Regime::Nls1d | Regime::Nls2d => LatticeRegime::Kg,
        }
    }

    /// Amplitude scalings `Q = mu^a q`, `P = mu^b p`.
    pub fn amplitude_powers(self) -> (i32, i32) {
        match self {
            Regime::Kp | Regime::Kdv => (2, 1),
            Regime::Mkdv => (1, 0),
            Regime::Nls1d | Regime::Nls2d => (1, 1),
        }
    }

    /// Specific energies scale as `mu^p`.
    pub fn energy_power(self) -> i32 {
        match self {
            Regime::Kp | Regime::Kdv => 4,
            _ => 2,
        }
    }

    /// Lattice time horizon `T0 / mu^k`.
    pub fn time_power(self) -> i32 {
        match self.lattice() {
            LatticeRegime::Etl => 3,
            LatticeRegime::Kg => 2,
        }
    }

    /// PDE time per unit of lattice time.
    pub fn tau_per_t(self, mu: f64) -> f64 {
        match self.lattice() {
            LatticeRegime::Etl => mu,
            LatticeRegime::Kg => 1.0,
        }
    }

    /// The normal form actually integrated against the lattice: comoving
    /// frame for the `(xi, eta)` systems, envelope for NLS. Coefficients use
    /// the realized `sigma`.
    pub fn bridge_flow(self, params: &LatticeParams) -> Flow {
        let mu = params.mu();
        match self {
            Regime::Kdv => Flow::XiEta(XiEtaFlow::kdv(mu, params.alpha).comoving()),
            Regime::Kp => {
                let mut f = XiEtaFlow::kp(mu, params.alpha).comoving();
                f.transverse = 0.5 * mu.powf(2.0 * params.sigma() - 2.0);
                Flow::XiEta(f)
            }
            Regime::Mkdv => {
                let mut f = XiEtaFlow::mkdv(mu, params.beta).comoving();
                f.mean_coupling = 0.0;
                f.line_coupling = 0.75 * params.beta * mu * mu;
                Flow::XiEta(f)
            }
            Regime::Nls1d | Regime::Nls2d => Flow::Nls(NlsFlow {
                rotation: 0.0,
                dispersion: mu * mu / 2.0,
                nonlinear: 0.75 * params.beta * mu * mu,
                two_dimensional: self == Regime::Nls2d,
            }),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Validation(format!("unknown regime {s:?} (KP, KdV, mKdV, NLS1D, NLS2D)")))
    }
}

/// How far the realized `sigma` may sit from 2 (KP) given that `N2` is an
/// integer.
pub const KP_SIGMA_TOL: f64 = 0.05;

/// A regime together with the target error exponent, the localization rate
/// and the slack of the logarithmic window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub regime: Regime,
    pub gamma: f64,
    pub rho: f64,
    pub delta: f64,
}

impl RegimeSpec {
    pub fn new(regime: Regime, gamma: f64, rho: f64, delta: f64) -> Result<Self> {
        let s = Self { regime, gamma, rho, delta };
        if !(gamma > 0.0) {
            return Err(Error::Validation(format!("γ > 0 violated (γ = {gamma})")));
        }
        if !(rho > 0.0) {
            return Err(Error::Validation(format!("ρ > 0 violated (ρ = {rho})")));
        }
        if !(delta > 0.0) {
            return Err(Error::Validation(format!("δ > 0 violated (δ = {delta})")));
        }
        if regime == Regime::Kp && gamma >= 0.5 {
            return Err(Error::Validation(format!("γ < 1/2 violated for KP (γ = {gamma})")));
        }
        Ok(s)
    }

    /// Checks that `sigma` lies in the window of the regime, naming the
    /// violated inequality.
    pub fn check_sigma(&self, sigma: f64) -> Result<()> {
        let g = self.gamma;
        let fail = |what: String| Err(Error::Validation(format!("{what} violated (σ = {sigma}, γ = {g})")));
        match self.regime {
            Regime::Kp => {
                if (sigma - 2.0).abs() > KP_SIGMA_TOL {
                    return fail("σ = 2".into());
                }
            }
            Regime::Kdv => {
                if sigma <= 2.0 {
                    return fail("σ > 2".into());
                }
                if sigma >= 7.0 {
                    return fail("σ < 7".into());
                }
                if sigma + 2.0 * g >= (4.0 * sigma - 5.0).min(7.0) {
                    return fail("σ+2γ < min(4σ−5,7)".into());
                }
            }
            Regime::Mkdv => {
                if sigma <= 2.0 {
                    return fail("σ > 2".into());
                }
            }
            Regime::Nls1d => {
                if sigma <= 1.0 {
                    return fail("σ > 1".into());
                }
                if sigma >= 7.0 {
                    return fail("σ < 7".into());
                }
                if sigma + 2.0 * g >= (4.0 * sigma - 1.0).min(7.0) {
                    return fail("σ+2γ < min(4σ−1,7)".into());
                }
            }
            Regime::Nls2d => {
                if sigma != 1.0 {
                    return fail("σ = 1".into());
                }
            }
        }
        Ok(())
    }
}
