use std::f64::consts::{E, PI};

use metastab::spectral::{
    apply_delta1, delta1_symbol, forward_transform, galerkin_project, inverse_transform, signed_index, weighted_norm,
    Domain, GridField2D, Space, WeightedNormParams, C64,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_real(n1: usize, n2: usize, domain: Domain, seed: u64) -> GridField2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..n1 * n2).map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0)).collect();
    GridField2D::new(n1, n2, domain, Space::Physical, v).unwrap()
}

/// Naive DFT with the lattice normalization `N^{-1/2}`.
fn naive_dft(f: &GridField2D) -> Vec<C64> {
    let (n1, n2) = f.extents();
    let norm = 1.0 / ((n1 * n2) as f64).sqrt();
    let mut out = vec![C64::new(0.0, 0.0); n1 * n2];
    for (o, c) in out.iter_mut().enumerate() {
        let (k1, k2) = (o / n2, o % n2);
        for (s, v) in f.values().iter().enumerate() {
            let (j1, j2) = (s / n2, s % n2);
            let ph = -2.0 * PI * ((j1 * k1) as f64 / n1 as f64 + (j2 * k2) as f64 / n2 as f64);
            *c += v * C64::from_polar(1.0, ph);
        }
        *c *= norm;
    }
    out
}

#[test]
fn constant_lattice_field_has_only_zero_mode() {
    let f = GridField2D::new(3, 3, Domain::Lattice, Space::Physical, vec![C64::new(2.5, 0.0); 9]).unwrap();
    let s = forward_transform(&f).unwrap();
    assert!((s.mode(0, 0).unwrap() - C64::new(7.5, 0.0)).norm() < 1e-14);
    for (k1, k2, c) in s.modes() {
        if (k1, k2) != (0, 0) {
            assert!(c.norm() < 1e-14, "mode ({k1},{k2}) = {c}");
        }
    }
}

#[test]
fn lattice_transform_matches_naive_dft() {
    let f = random_real(5, 7, Domain::Lattice, 3);
    let s = forward_transform(&f).unwrap();
    for (a, b) in s.values().iter().zip(naive_dft(&f)) {
        assert!((a - b).norm() < 1e-13);
    }
}

#[test]
fn cosine_on_torus() {
    let f = GridField2D::torus_from_fn(9, 5, |y1, _| C64::new((PI * y1).cos(), 0.0)).unwrap();
    let s = forward_transform(&f).unwrap();
    for (k1, k2, c) in s.modes() {
        let want = if k2 == 0 && k1.abs() == 1 { 1.0 } else { 0.0 };
        assert!((c - C64::new(want, 0.0)).norm() < 1e-13, "({k1},{k2}): {c}");
    }
}

#[test]
fn torus_parseval_uses_integral_norm() {
    // int_I |cos(pi y1) + 2 sin(pi y2)|^2 dy = 4 (1/2 + 2) = 10
    let f = GridField2D::torus_from_fn(7, 7, |y1, y2| C64::new((PI * y1).cos() + 2.0 * (PI * y2).sin(), 0.0)).unwrap();
    let s = forward_transform(&f).unwrap();
    assert!((s.norm_sqr() - 10.0).abs() < 1e-12);
}

#[test]
fn transforms_reject_wrong_space() {
    let f = GridField2D::zeros(3, 3, Domain::Lattice, Space::Spectral).unwrap();
    assert!(forward_transform(&f).is_err());
    let g = GridField2D::zeros(3, 3, Domain::Lattice, Space::Physical).unwrap();
    assert!(inverse_transform(&g).is_err());
}

#[test]
fn weighted_norm_examples() {
    let one = |modes: &[(i64, i64)]| {
        GridField2D::from_modes(5, 5, Domain::Torus, |k1, k2| {
            if modes.contains(&(k1, k2)) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .unwrap()
    };
    let w = |rho, s| WeightedNormParams::new(rho, s).unwrap();
    assert!((weighted_norm(&one(&[(1, 0)]), w(0.0, 0.0)) - 1.0).abs() < 1e-15);
    assert!((weighted_norm(&one(&[(1, 0)]), w(1.0, 1.0)) - E).abs() < 1e-14);
    assert!((weighted_norm(&one(&[(1, 0), (0, 1)]), w(0.0, 2.0)) - 2f64.sqrt()).abs() < 1e-14);
    // zero mode is excluded
    assert_eq!(weighted_norm(&one(&[(0, 0)]), w(1.0, 1.0)), 0.0);
    assert!(WeightedNormParams::new(-1.0, 0.0).is_err());
}

#[test]
fn galerkin_examples() {
    let f = GridField2D::from_modes(9, 9, Domain::Torus, |k1, k2| match (k1, k2) {
        (0, 0) => C64::new(5.0, 0.0),
        (1, 0) | (0, -1) => C64::new(1.0, 0.0),
        (3, 0) | (-2, 2) => C64::new(2.0, 0.0),
        _ => C64::new(0.0, 0.0),
    })
    .unwrap();
    let p0 = galerkin_project(&f, 0);
    assert_eq!(p0.norm_sqr(), 25.0);
    let p2 = galerkin_project(&f, 2);
    assert_eq!(p2.norm_sqr(), 27.0);
    assert_eq!(galerkin_project(&f, 100), f);
}

#[test]
fn delta1_examples() {
    assert_eq!(delta1_symbol((0, 0), (3, 3)).unwrap(), 0.0);
    assert!((delta1_symbol((1, 0), (1, 1)).unwrap() + 3.0).abs() < 1e-14);
    assert!(delta1_symbol((4, 0), (3, 3)).is_err());
}

/// Stencil applied to the real and imaginary parts of `exp(2 pi i j.k / n)`.
fn stencil_eigenvalue(k: (i64, i64), n1: usize, n2: usize) -> f64 {
    let mode = |j1: usize, j2: usize| {
        C64::from_polar(1.0, 2.0 * PI * (j1 as f64 * k.0 as f64 / n1 as f64 + j2 as f64 * k.1 as f64 / n2 as f64))
    };
    let re: Vec<f64> = (0..n1 * n2).map(|o| mode(o / n2, o % n2).re).collect();
    let im: Vec<f64> = (0..n1 * n2).map(|o| mode(o / n2, o % n2).im).collect();
    let (mut lre, mut lim) = (vec![0.0; n1 * n2], vec![0.0; n1 * n2]);
    apply_delta1(n1, n2, &re, &mut lre);
    apply_delta1(n1, n2, &im, &mut lim);
    // every site gives the same ratio; take the worst deviation from site 0
    let lam = C64::new(lre[0], lim[0]) / mode(0, 0);
    for o in 0..n1 * n2 {
        let r = C64::new(lre[o], lim[o]) - lam * mode(o / n2, o % n2);
        assert!(r.norm() < 1e-12);
    }
    lam.re
}

#[test]
fn symbol_matches_stencil_on_large_lattice() {
    let lam = stencil_eigenvalue((1, 1), 21, 201);
    let sym = delta1_symbol((1, 1), (10, 100)).unwrap();
    assert!((lam - sym).abs() < 1e-14, "{lam} vs {sym}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn roundtrip_and_parseval(b1 in 0usize..8, b2 in 0usize..8, seed in any::<u64>(), torus in any::<bool>()) {
        let (n1, n2) = (2 * b1 + 1, 2 * b2 + 1);
        let dom = if torus { Domain::Torus } else { Domain::Lattice };
        let f = random_real(n1, n2, dom, seed);
        let s = forward_transform(&f).unwrap();
        let back = inverse_transform(&s).unwrap();
        let scale = f.norm_sqr().sqrt().max(1e-300);
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).norm() <= 1e-12 * scale);
        }
        if !torus {
            prop_assert!((s.norm_sqr() - f.norm_sqr()).abs() <= 1e-12 * f.norm_sqr());
        }
        // real data: conjugate symmetric spectrum
        for (k1, k2, c) in s.modes() {
            prop_assert!((c - s.mode(-k1, -k2).unwrap().conj()).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn symbol_is_stencil_eigenvalue(b1 in 0usize..6, extra in 0usize..6, k1 in -6i64..=6, k2 in -12i64..=12) {
        let b2 = b1 + extra;
        prop_assume!(k1.unsigned_abs() as usize <= b1 && k2.unsigned_abs() as usize <= b2);
        let lam = stencil_eigenvalue((k1, k2), 2 * b1 + 1, 2 * b2 + 1);
        let sym = delta1_symbol((k1, k2), (b1, b2)).unwrap();
        prop_assert!((lam - sym).abs() <= 1e-12 * sym.abs().max(1.0));
        prop_assert!(sym <= 0.0);
    }

    #[test]
    fn weighted_norm_monotone(rho in 0.0f64..2.0, s in 0.0f64..3.0, seed in any::<u64>()) {
        let f = forward_transform(&random_real(7, 5, Domain::Torus, seed)).unwrap();
        let w = |r, s| WeightedNormParams::new(r, s).unwrap();
        prop_assert!(weighted_norm(&f, w(rho + 0.1, s)) >= weighted_norm(&f, w(rho, s)));
        prop_assert!(weighted_norm(&f, w(rho, s + 0.1)) >= weighted_norm(&f, w(rho, s)));
    }
}

#[test]
fn wrap_order_is_signed() {
    let f = GridField2D::from_modes(5, 3, Domain::Torus, |k1, k2| C64::new(k1 as f64, k2 as f64)).unwrap();
    for (o, v) in f.values().iter().enumerate() {
        assert_eq!(v.re as i64, signed_index(o / 3, 5));
        assert_eq!(v.im as i64, signed_index(o % 3, 3));
    }
}
