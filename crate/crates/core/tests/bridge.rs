use std::f64::consts::{PI, SQRT_2};

use metastab::bridge::{
    build_approx, build_approx_etl, build_approx_kg, fit_gamma, fit_localization, high_mode_fraction, lattice_to_pde,
    psi_to_qp, qp_to_psi, qp_to_xieta, run_comparison, run_comparison_with, run_scan, spec_energies_from_pde,
    spec_energy_from_pde, xieta_to_qp, ComparisonOptions, Regime, RegimeSpec, ReportStatus,
};
use metastab::lattice::{single_mode_data, LatticeParams, LatticeRegime};
use metastab::normal_form::FieldPair;
use metastab::spectral::{Domain, GridField2D, Space};
use metastab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{brute_force_energies, c, eval, random_pair, random_real, spectral};

fn random_xieta(n1: usize, n2: usize, rng: &mut ChaCha8Rng) -> FieldPair {
    random_pair(n1, n2, n1 as i64 / 2, n2 as i64 / 2, 1.0, false, rng)
}

fn random_psi(n1: usize, n2: usize, rng: &mut ChaCha8Rng) -> FieldPair {
    common::random_psi(n1, n2, n1 as i64 / 2, n2 as i64 / 2, 1.0, rng)
}

fn torus(n1: usize, n2: usize, f: impl Fn(f64, f64) -> f64) -> GridField2D {
    GridField2D::torus_from_fn(n1, n2, |y1, y2| c(f(y1, y2), 0.0)).unwrap()
}

fn close(a: &GridField2D, b: &GridField2D, tol: f64) {
    let (a, b) = (spectral(a), spectral(b));
    for ((k1, k2, x), (_, _, y)) in a.modes().zip(b.modes()) {
        assert!((x - y).norm() < tol, "({k1},{k2}): {x} vs {y}");
    }
}

#[test]
fn coordinate_examples() {
    // p = 0: xi = eta = q / sqrt 2
    let q = torus(9, 5, |y1, y2| (PI * y1).cos() + (PI * y2).sin());
    let p = torus(9, 5, |_, _| 0.0);
    let fp = qp_to_xieta(&q, &p).unwrap();
    let half = GridField2D::new(9, 5, Domain::Torus, Space::Physical, q.values().iter().map(|v| v / SQRT_2).collect())
        .unwrap();
    close(&fp.a, &half, 1e-14);
    close(&fp.b, &half, 1e-14);

    // q = 0, p = sin(pi y1) / pi: d1 p = cos(pi y1)
    let q0 = torus(9, 5, |_, _| 0.0);
    let p = torus(9, 5, |y1, _| (PI * y1).sin() / PI);
    let fp = qp_to_xieta(&q0, &p).unwrap();
    close(&fp.a, &torus(9, 5, |y1, _| (PI * y1).cos() / SQRT_2), 1e-14);
    close(&fp.b, &torus(9, 5, |y1, _| -(PI * y1).cos() / SQRT_2), 1e-14);

    // q = 1 gives psi = 1 / sqrt 2; p = 1 gives psi = -i / sqrt 2
    let one = torus(5, 5, |_, _| 1.0);
    let psi = qp_to_psi(&one, &q0_like(5)).unwrap();
    assert!((psi.a.mode(0, 0).unwrap() - c(2.0 / SQRT_2, 0.0)).norm() < 1e-14);
    let psi = qp_to_psi(&q0_like(5), &one).unwrap();
    assert!((psi.a.mode(0, 0).unwrap() - c(0.0, -2.0 / SQRT_2)).norm() < 1e-14);
}

fn q0_like(n: usize) -> GridField2D {
    torus(n, n, |_, _| 0.0)
}

#[test]
fn coordinate_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let q = random_real(9, 7, 4, 3, 1.0, false, &mut rng);
        // p without line means so that d1^{-1} d1 p = p
        let mut p = random_real(9, 7, 4, 3, 1.0, false, &mut rng);
        for h2 in -3..=3 {
            p.set_mode(0, h2, c(0.0, 0.0)).unwrap();
        }
        let (q2, p2) = xieta_to_qp(&qp_to_xieta(&q, &p).unwrap()).unwrap();
        close(&q2, &q, 1e-13);
        close(&p2, &p, 1e-13);
        let (q3, p3) = psi_to_qp(&qp_to_psi(&q, &p).unwrap()).unwrap();
        close(&q3, &q, 1e-13);
        close(&p3, &p, 1e-13);
    }
}

fn check_energy_formula(fp: &FieldPair, params: &LatticeParams) {
    let want = brute_force_energies(fp, params);
    let total: f64 = want.iter().flatten().sum();
    for (k1, row) in want.iter().enumerate() {
        for (k2, &w) in row.iter().enumerate() {
            let got = spec_energy_from_pde(fp, params, (k1 as i64, k2 as i64)).unwrap();
            let tol = 1e-10 * w.abs().max(1e-6 * total);
            assert!((got - w).abs() <= tol, "{:?} N=({},{}) K=({k1},{k2}): {got:e} vs {w:e}", params.regime, params.big_n1, params.big_n2);
        }
    }
}

#[test]
fn specific_energy_formula_matches_brute_force_etl() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let big_n1 = rng.random_range(1..=16);
        let big_n2 = big_n1 + rng.random_range(0..=3);
        let params = LatticeParams::etl(big_n1, big_n2, 1.0, 0.5).unwrap();
        // torus grid wider than the lattice so that coefficients alias
        let (n1, n2) = params.extents();
        let fp = random_xieta(n1 + 2 * rng.random_range(1..=4), n2 + 2 * rng.random_range(1..=3), &mut rng);
        check_energy_formula(&fp, &params);
    }
}

#[test]
fn specific_energy_formula_matches_brute_force_kg() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..20 {
        let big_n1 = rng.random_range(1..=16);
        let big_n2 = big_n1 + rng.random_range(0..=3);
        let params = LatticeParams::kg(big_n1, big_n2, 1.0).unwrap();
        let (n1, n2) = params.extents();
        let fp = random_psi(n1 + 2 * rng.random_range(1..=4), n2 + 2 * rng.random_range(1..=3), &mut rng);
        check_energy_formula(&fp, &params);
    }
}

#[test]
fn specific_energies_agree_with_folded_lookup() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let params = LatticeParams::etl(3, 4, 1.0, 0.0).unwrap();
    let fp = random_xieta(9, 13, &mut rng);
    let all = spec_energies_from_pde(Regime::Kdv, &fp, &params).unwrap();
    let (n1, n2) = params.extents();
    let total: f64 = all.iter().sum();
    let folded: f64 =
        (0..=3).flat_map(|k1| (0..=4).map(move |k2| (k1, k2))).map(|k| spec_energy_from_pde(&fp, &params, k).unwrap()).sum();
    assert_eq!(all.len(), n1 * n2);
    assert!((total - folded).abs() < 1e-12 * total);
    // outside the lattice
    assert_eq!(spec_energy_from_pde(&fp, &params, (4, 0)).unwrap(), 0.0);
}

#[test]
fn build_approx_examples() {
    // t = 0, xi = eta: P = 0 and Q = sqrt 2 mu^2 xi at the sites
    let params = LatticeParams::etl(2, 4, 1.0, 0.0).unwrap();
    let xi = torus(5, 9, |y1, y2| (PI * y1).cos() + 0.3 * (PI * (y1 + y2)).sin());
    let fp = FieldPair::xi_eta(xi.clone(), xi, 0.0).unwrap();
    let s = build_approx_etl(&fp, &params, 0.0).unwrap();
    let mu = params.mu();
    let (_, n2) = params.extents();
    for (o, (&q, &p)) in s.q.iter().zip(&s.p).enumerate() {
        let y = (2.0 * (o / n2) as f64 / 5.0, 2.0 * (o % n2) as f64 / 9.0);
        let want = SQRT_2 * mu * mu * ((PI * y.0).cos() + 0.3 * (PI * (y.0 + y.1)).sin());
        assert!((q - want).abs() < 1e-14, "{q} vs {want}");
        assert!(p.abs() < 1e-15);
    }

    // KG constant A: Q = sqrt 2 mu A, P = 0
    let kg = LatticeParams::kg(3, 3, 1.0).unwrap();
    let a = 0.7;
    let fp = FieldPair::psi(torus(7, 7, |_, _| a), 0.0).unwrap();
    let s = build_approx_kg(&fp, &kg, 0.0).unwrap();
    for (&q, &p) in s.q.iter().zip(&s.p) {
        assert!((q - SQRT_2 * kg.mu() * a).abs() < 1e-14 && p.abs() < 1e-14);
    }
}

#[test]
fn kg_envelope_is_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let kg = LatticeParams::kg(3, 4, 1.0).unwrap();
    let fp = random_psi(7, 9, &mut rng);
    let mu = kg.mu();
    let (_, n2) = kg.extents();
    for t in [0.0, 0.4, 2.0] {
        let s = build_approx(Regime::Nls1d, &fp, &kg, t).unwrap();
        for o in 0..s.q.len() {
            let y = (2.0 * (o / n2) as f64 / 7.0, 2.0 * (o % n2) as f64 / 9.0);
            let env = 2.0 * mu * mu * eval(&fp.a, y).norm_sqr();
            assert!((s.q[o].powi(2) + s.p[o].powi(2) - env).abs() < 1e-13);
        }
    }
}

#[test]
fn etl_approx_translates_one_site_per_unit_time() {
    // tau = mu t moves xi by mu = one lattice spacing at t = 1
    let params = LatticeParams::etl(2, 4, 1.0, 0.0).unwrap();
    let xi = torus(5, 9, |y1, y2| (PI * y1).cos() + 0.5 * (2.0 * PI * y1).sin() * (PI * y2).cos());
    let zero = torus(5, 9, |_, _| 0.0);
    let fp = FieldPair::xi_eta(xi, zero, 0.0).unwrap();
    let s0 = build_approx_etl(&fp, &params, 0.0).unwrap();
    let s1 = build_approx_etl(&fp, &params, 1.0).unwrap();
    assert_eq!(s1.t, 1.0);
    for j1 in 0..5 {
        for j2 in 0..9 {
            assert!((s1.q_at(j1, j2) - s0.q_at(j1 - 1, j2)).abs() < 1e-14);
            assert!((s1.p_at(j1, j2) - s0.p_at(j1 - 1, j2)).abs() < 1e-14);
        }
    }
}

#[test]
fn lattice_to_pde_inverts_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let params = LatticeParams::etl(3, 6, 1.0, 0.0).unwrap();
    let fp = random_xieta(5, 9, &mut rng);
    let s = build_approx_etl(&fp, &params, 0.0).unwrap();
    let back = lattice_to_pde(Regime::Kdv, &s, &params, (5, 9)).unwrap();
    close(&back.a, &fp.a, 1e-12);
    close(&back.b, &fp.b, 1e-12);

    let kg = LatticeParams::kg(3, 6, 1.0).unwrap();
    let fp = random_psi(5, 9, &mut rng);
    let s = build_approx_kg(&fp, &kg, 0.0).unwrap();
    let back = lattice_to_pde(Regime::Nls1d, &s, &kg, (9, 15)).unwrap();
    for (h1, h2, v) in back.a.modes() {
        let want = if h1.abs() <= 2 && h2.abs() <= 4 { fp.a.mode(h1, h2).unwrap() } else { c(0.0, 0.0) };
        assert!((v - want).norm() < 1e-12);
    }

    // a grid too small for the data is refused rather than truncated
    let s = single_mode_data(&params, (2, 5), 1.0, 0.0).unwrap();
    assert!(matches!(lattice_to_pde(Regime::Kdv, &s, &params, (5, 3)), Err(Error::Config(_))));
}

#[test]
fn regime_mismatches_are_rejected() {
    let etl = LatticeParams::etl(3, 3, 1.0, 0.0).unwrap();
    let kg = LatticeParams::kg(3, 3, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xe = random_xieta(7, 7, &mut rng);
    let psi = random_psi(7, 7, &mut rng);
    assert!(matches!(build_approx(Regime::Nls1d, &psi, &etl, 0.0), Err(Error::RegimeMismatch(_))));
    assert!(matches!(build_approx(Regime::Kdv, &psi, &etl, 0.0), Err(Error::RegimeMismatch(_))));
    assert!(matches!(spec_energy_from_pde(&xe, &kg, (0, 0)), Err(Error::RegimeMismatch(_))));
    let s = metastab::lattice::LatticeState::zeros(&kg);
    assert!(lattice_to_pde(Regime::Kp, &s, &kg, (7, 7)).is_err());
}

#[test]
fn regime_names_and_windows() {
    for r in Regime::ALL {
        assert_eq!(r.name().parse::<Regime>().unwrap(), r);
    }
    assert_eq!("kdv".parse::<Regime>().unwrap(), Regime::Kdv);
    assert!("Toda".parse::<Regime>().is_err());

    let kdv = RegimeSpec::new(Regime::Kdv, 1.0, 1.0, 0.1).unwrap();
    assert!(kdv.check_sigma(3.0).is_ok());
    let e = kdv.check_sigma(8.0).unwrap_err().to_string();
    assert!(e.contains("σ < 7"), "{e}");
    assert!(kdv.check_sigma(2.0).unwrap_err().to_string().contains("σ > 2"));
    // sigma + 2 gamma < min(4 sigma - 5, 7)
    assert!(kdv.check_sigma(2.2).unwrap_err().to_string().contains("min(4σ−5,7)"));
    let e = RegimeSpec::new(Regime::Kp, 0.6, 1.0, 0.1).unwrap_err().to_string();
    assert!(e.contains("γ < 1/2"), "{e}");
    let kp = RegimeSpec::new(Regime::Kp, 0.4, 1.0, 0.1).unwrap();
    assert!(kp.check_sigma(2.0).is_ok() && kp.check_sigma(2.5).is_err());
    assert!(RegimeSpec::new(Regime::Nls1d, 0.0, 1.0, 0.1).is_err());
    assert!(RegimeSpec::new(Regime::Nls1d, 1.0, -1.0, 0.1).is_err());
}

#[test]
fn gamma_fit_recovers_power_law() {
    let mus = [0.2, 0.1, 0.05, 0.025];
    let errs: Vec<f64> = mus.iter().map(|m: &f64| 3.0 * m.powf(1.25)).collect();
    let f = fit_gamma(&mus, &errs).unwrap();
    assert!((f.gamma - 1.25).abs() < 1e-12);
    assert!((f.log_c - 3f64.ln()).abs() < 1e-12);
    assert!(f.residual < 1e-12);
    assert!(fit_gamma(&[0.1], &[1.0]).is_err());
    assert!(fit_gamma(&[0.1, 0.1], &[1.0, 2.0]).is_err());
    assert!(fit_gamma(&[0.1, 0.2], &[1.0]).is_err());
}

#[test]
fn localization_fit_recovers_rate() {
    let mu: f64 = 0.1;
    let spectrum: Vec<(i64, i64, f64)> = (0..12)
        .flat_map(|k1| (0..12).map(move |k2| (k1, k2)))
        .map(|(k1, k2)| (k1, k2, 2.0 * mu.powi(4) * (-1.5 * ((k1 * k1 + k2 * k2) as f64).sqrt()).exp()))
        .collect();
    let f = fit_localization(spectrum.iter().cloned(), mu, 4, 1.0).unwrap();
    // the envelope samples |K| at bin centers, so the slope is close but not exact
    assert!((f.rho - 1.5).abs() < 0.05, "{}", f.rho);
    assert!(f.residual < 0.05);
    assert!(f.c1 >= 2.0 * (1.0 - 1e-12));
    assert!(fit_localization(vec![(0, 0, 1.0), (1, 0, 0.5)], mu, 4, 1.0).is_none());
    assert!(fit_localization(vec![(0, 0, 0.0)], mu, 4, 1.0).is_none());
}

#[test]
fn high_mode_fraction_example() {
    // mu = e^-1, rho = 1: the cut is 2, so |k|_1 = 3 is high
    let mu = (-1.0f64).exp();
    let s = vec![(1, 1, 3.0), (2, 0, 1.0), (2, 1, 1.0)];
    assert!((high_mode_fraction(s, mu, 1.0) - 0.2).abs() < 1e-15);
    assert_eq!(high_mode_fraction(Vec::new(), mu, 1.0), 0.0);
}

#[test]
fn short_comparison_nls1d() {
    let spec = RegimeSpec::new(Regime::Nls1d, 0.5, 1.0, 0.1).unwrap();
    let params = LatticeParams::with_sigma(LatticeRegime::Kg, 4, 2.0, 0.0, 1.0).unwrap();
    let rep = run_comparison(&spec, &params, 1.0, 0.05, 3).unwrap();
    assert_eq!(rep.status, ReportStatus::Complete);
    assert_eq!(rep.times.len(), 3);
    // the PDE data is the lattice data, so the error starts at round-off
    assert!(rep.sup_error[0] < 1e-14, "{}", rep.sup_error[0]);
    assert!(rep.max_energy_drift() < 1e-8);
    assert!(rep.snapshot_times.len() == 2 && !rep.spectra.is_empty());
    let t_end = 0.05 / rep.mu.powi(2);
    assert!((rep.times[2] - t_end).abs() < 1e-12 * t_end);
}

#[test]
fn comparison_validates_inputs() {
    let spec = RegimeSpec::new(Regime::Kdv, 1.0, 1.0, 0.1).unwrap();
    let etl = LatticeParams::with_sigma(LatticeRegime::Etl, 3, 3.0, 1.0, 0.0).unwrap();
    let kg = LatticeParams::with_sigma(LatticeRegime::Kg, 3, 3.0, 0.0, 1.0).unwrap();
    assert!(matches!(run_comparison(&spec, &kg, 1.0, 0.1, 3), Err(Error::RegimeMismatch(_))));
    assert!(run_comparison(&spec, &etl, 1.0, 0.1, 1).is_err());
    assert!(run_comparison(&spec, &etl, -1.0, 0.1, 3).is_err());
    let flat = LatticeParams::with_sigma(LatticeRegime::Etl, 3, 1.5, 1.0, 0.0).unwrap();
    assert!(matches!(run_comparison(&spec, &flat, 1.0, 0.1, 3), Err(Error::Validation(_))));
    let opts = ComparisonOptions { snapshot_fractions: vec![1.5], ..Default::default() };
    assert!(run_comparison_with(&spec, &etl, &opts).is_err());
}

#[test]
fn budget_abort_returns_partial_report() {
    let spec = RegimeSpec::new(Regime::Nls1d, 0.5, 1.0, 0.1).unwrap();
    let params = LatticeParams::with_sigma(LatticeRegime::Kg, 6, 2.0, 0.0, 1.0).unwrap();
    let opts = ComparisonOptions { t0: 0.5, samples: 50, budget_s: Some(1e-9), ..Default::default() };
    let rep = run_comparison_with(&spec, &params, &opts).unwrap();
    assert_eq!(rep.status, ReportStatus::BudgetAbort);
    assert!(rep.times.len() < 50);
}

#[test]
fn scan_is_independent_of_worker_count() {
    let spec = RegimeSpec::new(Regime::Nls1d, 0.5, 1.0, 0.1).unwrap();
    let lattices: Vec<LatticeParams> =
        [3, 4].iter().map(|&n| LatticeParams::with_sigma(LatticeRegime::Kg, n, 2.0, 0.0, 1.0).unwrap()).collect();
    let opts = ComparisonOptions { t0: 0.05, samples: 3, ..Default::default() };
    let a = run_scan(&spec, &lattices, &opts, 1).unwrap();
    let b = run_scan(&spec, &lattices, &opts, 2).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert!(a[0].gamma_fit.is_some());
    assert_eq!(a[0].gamma_fit, a[1].gamma_fit);
    assert_eq!((a[0].big_n1, a[1].big_n1), (3, 4));
}
