use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bridge::{ComparisonOptions, Regime, RegimeSpec};
use crate::error::{Error, Result};
use crate::lattice::{Integrator, LatticeParams};

/// A validated run configuration. Field names follow the config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub regime: Regime,
    #[serde(rename = "N1_list")]
    pub n1_list: Vec<usize>,
    pub sigma_target: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub rho: f64,
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub pde_dt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrator: Option<Integrator>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub snapshot_times: Vec<f64>,
    pub samples: usize,
    pub pde_grid: [usize; 2],
    pub k0: [i64; 2],
    pub phase: f64,
    pub harmonics: usize,
    pub harmonic_decay: f64,
    pub spectrum_floor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_wall_seconds: Option<f64>,
    pub checks: Vec<Check>,
}

/// Acceptance inequalities a run can enforce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `|H(t) - H(0)| / |H(0)| <= 1e-8` at every sample.
    EnergyDrift,
    /// Exponential fit with `rho' > 0` and log residual below 10%.
    Localization,
    /// Energy above `|K1| + |K2| > 2 |log mu| / rho'` below 5% at every sample.
    NoEquipartition,
    /// Scan slope `gamma_fit >= gamma - 0.15`.
    Gamma,
}

impl Check {
    pub const ALL: [Check; 4] = [Check::EnergyDrift, Check::Localization, Check::NoEquipartition, Check::Gamma];
}

/// Everything optional in the document; defaults are filled in by
/// [`RawConfig::finish`].
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    regime: Regime,
    #[serde(rename = "N1_list")]
    n1_list: Vec<usize>,
    sigma_target: f64,
    #[serde(rename = "C0")]
    c0: Option<f64>,
    #[serde(rename = "T0")]
    t0: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    rho: Option<f64>,
    delta: Option<f64>,
    dt: Option<f64>,
    pde_dt: Option<f64>,
    integrator: Option<Integrator>,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    snapshot_times: Option<Vec<f64>>,
    samples: Option<usize>,
    pde_grid: Option<[usize; 2]>,
    k0: Option<[i64; 2]>,
    phase: Option<f64>,
    harmonics: Option<usize>,
    harmonic_decay: Option<f64>,
    spectrum_floor: Option<f64>,
    max_wall_seconds: Option<f64>,
    checks: Option<Vec<Check>>,
}

/// Target error exponent used when `gamma` is not given.
pub fn default_gamma(regime: Regime) -> f64 {
    match regime {
        Regime::Kdv | Regime::Mkdv => 1.0,
        Regime::Kp => 0.4,
        Regime::Nls1d | Regime::Nls2d => 0.5,
    }
}

/// `(alpha, beta)` used when not given.
pub fn default_coefficients(regime: Regime) -> (f64, f64) {
    match regime {
        Regime::Kp | Regime::Kdv => (1.0, 0.0),
        Regime::Mkdv | Regime::Nls1d | Regime::Nls2d => (0.0, 1.0),
    }
}

impl RawConfig {
    fn finish(self) -> RunConfig {
        let d = ComparisonOptions::default();
        let (a, b) = default_coefficients(self.regime);
        RunConfig {
            regime: self.regime,
            n1_list: self.n1_list,
            sigma_target: self.sigma_target,
            c0: self.c0.unwrap_or(d.c0),
            t0: self.t0.unwrap_or(d.t0),
            alpha: self.alpha.unwrap_or(a),
            beta: self.beta.unwrap_or(b),
            gamma: self.gamma.unwrap_or_else(|| default_gamma(self.regime)),
            rho: self.rho.unwrap_or(1.0),
            delta: self.delta.unwrap_or(0.1),
            dt: self.dt,
            pde_dt: self.pde_dt.unwrap_or(d.pde_dt),
            integrator: self.integrator,
            output_dir: self.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            seed: self.seed.unwrap_or(0),
            snapshot_times: self.snapshot_times.unwrap_or(d.snapshot_fractions),
            samples: self.samples.unwrap_or(d.samples),
            pde_grid: self.pde_grid.unwrap_or([d.pde_grid.0, d.pde_grid.1]),
            k0: self.k0.unwrap_or([d.k0.0, d.k0.1]),
            phase: self.phase.unwrap_or(d.phase),
            harmonics: self.harmonics.unwrap_or(d.harmonics),
            harmonic_decay: self.harmonic_decay.unwrap_or(d.harmonic_decay),
            spectrum_floor: self.spectrum_floor.unwrap_or(d.spectrum_floor),
            max_wall_seconds: self.max_wall_seconds,
            checks: self.checks.unwrap_or_else(|| Check::ALL.to_vec()),
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
        Error::Parse { line, msg: e.message().to_string() }
    })?;
    let cfg = raw.finish();
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical TOML text of a configuration, with every field written out.
pub fn serialize_config(cfg: &RunConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Validation(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn spec(&self) -> Result<RegimeSpec> {
        RegimeSpec::new(self.regime, self.gamma, self.rho, self.delta)
    }

    pub fn lattice(&self, n1: usize) -> Result<LatticeParams> {
        LatticeParams::with_sigma(self.regime.lattice(), n1, self.sigma_target, self.alpha, self.beta)
    }

    pub fn lattices(&self) -> Result<Vec<LatticeParams>> {
        self.n1_list.iter().map(|&n| self.lattice(n)).collect()
    }

    pub fn options(&self) -> ComparisonOptions {
        ComparisonOptions {
            c0: self.c0,
            t0: self.t0,
            samples: self.samples,
            k0: (self.k0[0], self.k0[1]),
            phase: self.phase,
            harmonics: self.harmonics,
            harmonic_decay: self.harmonic_decay,
            pde_grid: (self.pde_grid[0], self.pde_grid[1]),
            pde_dt: self.pde_dt,
            lattice_dt: self.dt,
            integrator: self.integrator,
            snapshot_fractions: self.snapshot_times.clone(),
            budget_s: self.max_wall_seconds,
            spectrum_floor: self.spectrum_floor,
        }
    }

    /// Checks everything that can be decided before computing.
    pub fn validate(&self) -> Result<()> {
        let spec = self.spec()?;
        if self.n1_list.is_empty() {
            return Err(Error::Validation("N1_list is empty".into()));
        }
        if self.n1_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(format!("N1_list must be strictly ascending, got {:?}", self.n1_list)));
        }
        if self.n1_list[0] == 0 {
            return Err(Error::Validation("N1 must be at least 1".into()));
        }
        if !self.sigma_target.is_finite() || self.sigma_target < 1.0 {
            return Err(Error::Validation(format!("σ ≥ 1 violated (σ = {})", self.sigma_target)));
        }
        spec.check_sigma(self.sigma_target)?;
        positive("C0", self.c0)?;
        positive("T0", self.t0)?;
        positive("pde_dt", self.pde_dt)?;
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        if let Some(w) = self.max_wall_seconds {
            positive("max_wall_seconds", w)?;
        }
        if !(self.spectrum_floor >= 0.0 && self.spectrum_floor < 1.0) {
            return Err(Error::Validation(format!("spectrum_floor must lie in [0, 1), got {}", self.spectrum_floor)));
        }
        if self.samples < 2 {
            return Err(Error::Validation(format!("samples must be at least 2, got {}", self.samples)));
        }
        if let Some(f) = self.snapshot_times.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return Err(Error::Validation(format!("snapshot_times are fractions of the final time, {f} is not in [0, 1]")));
        }
        if self.pde_grid.iter().any(|&n| n % 2 == 0 || n < 3) {
            return Err(Error::Validation(format!("pde_grid extents must be odd and at least 3, got {:?}", self.pde_grid)));
        }
        if self.k0[0] < 0 || self.k0[1] < 0 || self.k0 == [0, 0] {
            return Err(Error::Validation(format!("k0 must be a nonzero mode in Z^2_+, got {:?}", self.k0)));
        }
        if !(self.alpha.is_finite() && self.beta.is_finite() && self.phase.is_finite()) {
            return Err(Error::Validation("alpha, beta and phase must be finite".into()));
        }
        if self.harmonics == 0 || !(self.harmonic_decay.is_finite()) {
            return Err(Error::Validation("harmonics must be at least 1 with a finite decay".into()));
        }
        match self.regime {
            Regime::Kp | Regime::Kdv if self.alpha == 0.0 => {
                return Err(Error::Validation(format!("α ≠ 0 violated for {}", self.regime)));
            }
            Regime::Mkdv if self.alpha != 0.0 => {
                return Err(Error::Validation(format!("α = 0 violated for mKdV (α = {})", self.alpha)));
            }
            Regime::Nls1d | Regime::Nls2d => {
                if !(self.beta > 0.0) {
                    return Err(Error::Validation(format!("β > 0 violated for {} (β = {})", self.regime, self.beta)));
                }
                if self.alpha != 0.0 {
                    return Err(Error::Validation(format!("α = 0 violated for {} (α = {})", self.regime, self.alpha)));
                }
            }
            _ => {}
        }
        let (r1, r2) = ((self.pde_grid[0] - 1) / 2, (self.pde_grid[1] - 1) / 2);
        let top = self.k0.map(|k| k as usize * self.harmonics);
        if top[0] > r1 || top[1] > r2 {
            return Err(Error::Validation(format!(
                "pde_grid {:?} cannot hold the excited mode {:?} (with {} harmonics)",
                self.pde_grid, self.k0, self.harmonics
            )));
        }
        for &n1 in &self.n1_list {
            let p = self.lattice(n1).map_err(|e| Error::Validation(e.to_string()))?;
            if top[0] > p.big_n1 || top[1] > p.big_n2 {
                return Err(Error::Validation(format!("k0 {:?} does not fit the lattice with N1 = {n1}", self.k0)));
            }
            spec.check_sigma(p.sigma()).map_err(|e| Error::Validation(format!("N1 = {n1}: {e}")))?;
        }
        Ok(())
    }
}
