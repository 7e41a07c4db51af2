use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::approx::{build_approx, lattice_to_pde, leading_energy};
use super::fit::{fit_gamma, fit_localization, high_mode_fraction};
use super::RegimeSpec;
use crate::error::{Error, Result};
use crate::lattice::{
    harmonic_data, mode_energies, sign_variants, total_energy, Integrator, LatticeParams, LatticeRegime, ModeSpectrum,
    Stepper,
};
use crate::normal_form::NormalFormSolver;

/// Knobs of a single lattice-versus-normal-form comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonOptions {
    pub c0: f64,
    pub t0: f64,
    /// Number of equally spaced sample times in `[0, T0 / mu^k]`.
    pub samples: usize,
    pub k0: (i64, i64),
    pub phase: f64,
    /// Harmonics `n k0` excited besides `k0`, energies decaying as `exp(-decay (n - 1))`.
    pub harmonics: usize,
    pub harmonic_decay: f64,
    pub pde_grid: (usize, usize),
    /// PDE step in slow time `mu^2 tau`.
    pub pde_dt: f64,
    pub lattice_dt: Option<f64>,
    pub integrator: Option<Integrator>,
    /// Fractions of the final time at which full spectra are recorded.
    pub snapshot_fractions: Vec<f64>,
    /// Abort with a partial report once the projected wall time exceeds this.
    pub budget_s: Option<f64>,
    /// Spectrum entries below this fraction of the total are not recorded.
    pub spectrum_floor: f64,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        Self {
            c0: 1.0,
            t0: 0.5,
            samples: 11,
            k0: (1, 1),
            phase: 0.0,
            harmonics: 1,
            harmonic_decay: 1.0,
            pde_grid: (65, 17),
            pde_dt: 1e-3,
            lattice_dt: None,
            integrator: None,
            snapshot_fractions: vec![0.0, 1.0],
            budget_s: None,
            spectrum_floor: 1e-24,
        }
    }
}

/// Integrator used when none is configured: fourth order suffices for the
/// slow ETL runs, the stiffer KG runs need sixth.
pub fn default_integrator(regime: LatticeRegime) -> Integrator {
    match regime {
        LatticeRegime::Etl => Integrator::Yoshida4,
        LatticeRegime::Kg => Integrator::KahanLi6,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    Complete,
    BudgetAbort,
}

/// One folded specific energy at a snapshot time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub t: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub k1: i64,
    pub k2: i64,
}

/// Lattice specific energy against the leading-order PDE expression at the
/// final sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeGap {
    pub k1: i64,
    pub k2: i64,
    pub lattice: f64,
    pub leading: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub regime: super::Regime,
    pub mu: f64,
    pub sigma: f64,
    pub big_n1: usize,
    pub big_n2: usize,
    pub alpha: f64,
    pub beta: f64,
    pub c0: f64,
    pub t0: f64,
    pub gamma_target: f64,
    /// Slope of `log sup_error` against `log mu` over a scan; absent for a single run.
    pub gamma_fit: Option<f64>,
    pub rho_fit: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub fit_residual: Option<f64>,
    pub energy_power: i32,
    pub times: Vec<f64>,
    pub sup_error: Vec<f64>,
    pub max_mode_gap: Vec<f64>,
    pub energy_drift: Vec<f64>,
    /// Energy fraction above `|K1| + |K2| > 2 |log mu| / rho'` per sample.
    pub high_mode_fraction: Vec<f64>,
    pub spectrum_floor: f64,
    /// Times at which `spectra` were recorded, including empty ones.
    pub snapshot_times: Vec<f64>,
    pub spectra: Vec<SpectrumEntry>,
    pub per_mode_gap: Vec<ModeGap>,
    pub status: ReportStatus,
}

impl ErrorReport {
    pub fn max_sup_error(&self) -> f64 {
        self.sup_error.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        self.energy_drift.iter().cloned().fold(0.0, f64::max)
    }
}

/// Sample times: a uniform grid of `samples` points on `[0, t_end]` merged
/// with the snapshot fractions.
fn sample_times(t_end: f64, samples: usize, fractions: &[f64]) -> Vec<f64> {
    let mut fr: Vec<f64> = (0..samples).map(|i| i as f64 / (samples - 1) as f64).collect();
    fr.extend_from_slice(fractions);
    fr.sort_by(|a, b| a.total_cmp(b));
    fr.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    fr.into_iter().map(|f| f * t_end).collect()
}

fn is_snapshot(t: f64, t_end: f64, fractions: &[f64]) -> bool {
    fractions.iter().any(|f| (f * t_end - t).abs() <= 1e-12 * t_end.max(1.0))
}

/// [`run_comparison_with`] using default options apart from `C0`, `T0` and
/// the sample count.
pub fn run_comparison(
    spec: &RegimeSpec,
    params: &LatticeParams,
    c0: f64,
    t0: f64,
    samples: usize,
) -> Result<ErrorReport> {
    run_comparison_with(spec, params, &ComparisonOptions { c0, t0, samples, ..Default::default() })
}

/// Co-integrates the lattice from single-mode data and the regime's normal
/// form from the corresponding PDE data up to `T0 / mu^3` (ETL) or
/// `T0 / mu^2` (KG), sampling the sup-norm error, mode gaps, energy drift and
/// spectra, then fits the localization of the final spectrum.
pub fn run_comparison_with(spec: &RegimeSpec, params: &LatticeParams, opts: &ComparisonOptions) -> Result<ErrorReport> {
    let regime = spec.regime;
    if regime.lattice() != params.regime {
        return Err(Error::RegimeMismatch(format!("{regime} needs a {} lattice", regime.lattice())));
    }
    spec.check_sigma(params.sigma())?;
    if opts.samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    if !(opts.c0 > 0.0 && opts.t0 > 0.0 && opts.pde_dt > 0.0) {
        return Err(Error::InvalidParameter("C0, T0 and the PDE step must be positive".into()));
    }
    if let Some(f) = opts.snapshot_fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(Error::InvalidParameter(format!("snapshot fraction {f} outside [0, 1]")));
    }
    let clock = Instant::now();
    let mu = params.mu();
    let t_end = opts.t0 / mu.powi(regime.time_power());
    let times = sample_times(t_end, opts.samples, &opts.snapshot_fractions);

    let mut state = harmonic_data(params, opts.k0, opts.c0, opts.phase, opts.harmonics, opts.harmonic_decay)?;
    let mut fp = lattice_to_pde(regime, &state, params, opts.pde_grid)?;
    let mut solver = NormalFormSolver::new(regime.bridge_flow(params), opts.pde_grid.0, opts.pde_grid.1);
    let stepper = Stepper::new(*params, opts.integrator.unwrap_or_else(|| default_integrator(params.regime)));
    let dt = opts.lattice_dt.unwrap_or_else(|| params.default_dt());
    let dtau = opts.pde_dt / (mu * mu);
    let h0 = total_energy(&state, params);

    let (r1, r2) = fp.a.half_extents();
    let (g1, g2) = (r1.min(params.big_n1 as i64), r2.min(params.big_n2 as i64));
    let p = regime.energy_power();

    let mut rep = ErrorReport {
        regime,
        mu,
        sigma: params.sigma(),
        big_n1: params.big_n1,
        big_n2: params.big_n2,
        alpha: params.alpha,
        beta: params.beta,
        c0: opts.c0,
        t0: opts.t0,
        gamma_target: spec.gamma,
        gamma_fit: None,
        rho_fit: None,
        c1: None,
        c2: None,
        fit_residual: None,
        energy_power: p,
        times: Vec::new(),
        sup_error: Vec::new(),
        max_mode_gap: Vec::new(),
        energy_drift: Vec::new(),
        high_mode_fraction: Vec::new(),
        spectrum_floor: opts.spectrum_floor,
        snapshot_times: Vec::new(),
        spectra: Vec::new(),
        per_mode_gap: Vec::new(),
        status: ReportStatus::Complete,
    };
    let mut folded: Vec<ModeSpectrum> = Vec::new();

    for &t in &times {
        stepper.advance_to(&mut state, t, dt)?;
        fp = solver.advance_to(&fp, regime.tau_per_t(mu) * t, dtau)?;
        let approx = build_approx(regime, &fp, params, t)?;
        let spectrum = mode_energies(&state, params);

        let mut gaps = Vec::new();
        for k1 in 0..=g1 {
            for k2 in 0..=g2 {
                let lat = spectrum.specific_at(k1, k2);
                let mut lead = 0.0;
                for (s1, s2) in sign_variants(k1, k2) {
                    lead += leading_energy(regime, &fp, mu, s1, s2)?;
                }
                gaps.push(ModeGap { k1, k2, lattice: lat, leading: lead, gap: (lat - lead).abs() });
            }
        }
        let h = total_energy(&state, params);
        rep.times.push(t);
        rep.sup_error.push(state.sup_distance(&approx));
        rep.max_mode_gap.push(gaps.iter().map(|g| g.gap).fold(0.0, f64::max));
        rep.energy_drift.push(if h0 != 0.0 { ((h - h0) / h0).abs() } else { h.abs() });

        if is_snapshot(t, t_end, &opts.snapshot_fractions) {
            rep.snapshot_times.push(t);
            let total = spectrum.total_specific();
            let (m1, ms) = (params.mu(), params.mu_sigma());
            rep.spectra.extend(spectrum.folded().filter(|&(_, _, e)| e > opts.spectrum_floor * total).map(
                |(k1, k2, e)| SpectrumEntry { t, kappa1: m1 * k1 as f64, kappa2: ms * k2 as f64, e, k1, k2 },
            ));
        }
        rep.per_mode_gap = gaps;
        folded.push(spectrum);

        if let Some(cap) = opts.budget_s {
            let elapsed = clock.elapsed().as_secs_f64();
            let projected = if t > 0.0 { elapsed * t_end / t } else { elapsed };
            if projected > cap && t < t_end {
                rep.status = ReportStatus::BudgetAbort;
                break;
            }
        }
    }

    let last = folded.last().expect("at least one sample");
    if let Some(fit) = fit_localization(last.folded(), mu, p, spec.gamma) {
        rep.rho_fit = Some(fit.rho);
        rep.c1 = Some(fit.c1);
        rep.c2 = Some(fit.c2);
        rep.fit_residual = Some(fit.residual);
        rep.high_mode_fraction = folded.iter().map(|s| high_mode_fraction(s.folded(), mu, fit.rho)).collect();
    }
    Ok(rep)
}

/// Runs one comparison per lattice on a pool of `workers` threads and fills
/// in `gamma_fit` from the whole scan. Reports come back in input order.
pub fn run_scan(
    spec: &RegimeSpec,
    lattices: &[LatticeParams],
    opts: &ComparisonOptions,
    workers: usize,
) -> Result<Vec<ErrorReport>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<ErrorReport>> =
        pool.install(|| lattices.par_iter().map(|p| run_comparison_with(spec, p, opts)).collect());
    let mut reports = results.into_iter().collect::<Result<Vec<_>>>()?;
    apply_gamma_fit(&mut reports);
    Ok(reports)
}

/// Sets `gamma_fit` on every report from the maxima of their sup errors.
pub fn apply_gamma_fit(reports: &mut [ErrorReport]) {
    let mus: Vec<f64> = reports.iter().map(|r| r.mu).collect();
    let errs: Vec<f64> = reports.iter().map(|r| r.max_sup_error()).collect();
    let g = fit_gamma(&mus, &errs).ok().map(|f| f.gamma);
    reports.iter_mut().for_each(|r| r.gamma_fit = g);
}
