//! Oracles shared by the integration tests: random band-limited fields, the
//! orbit average by direct mode sums, and lattice energies of sampled PDE
//! states by direct summation.
#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};

use metastab::lattice::{LatticeParams, LatticeRegime};
use metastab::normal_form::{field_from_modes, AverageRegime, FieldPair};
use metastab::spectral::{forward_transform, Domain, GridField2D, Space, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn spectral(f: &GridField2D) -> GridField2D {
    match f.space() {
        Space::Spectral => f.clone(),
        Space::Physical => forward_transform(f).unwrap(),
    }
}

/// Real band-limited torus field with random coefficients on `|h1| <= b1`,
/// `|h2| <= b2`; `skip_axis` leaves the modes `(0, h2 != 0)` empty.
pub fn random_real(n1: usize, n2: usize, b1: i64, b2: i64, amp: f64, skip_axis: bool, rng: &mut ChaCha8Rng) -> GridField2D {
    let mut modes = Vec::new();
    for h1 in 0..=b1 {
        for h2 in -b2..=b2 {
            if h1 == 0 && h2 < 0 || skip_axis && h1 == 0 && h2 != 0 {
                continue;
            }
            let v = if h1 == 0 && h2 == 0 {
                c(amp * rng.random_range(-1.0..1.0), 0.0)
            } else {
                c(amp * rng.random_range(-1.0..1.0), amp * rng.random_range(-1.0..1.0))
            };
            modes.push(((h1, h2), v));
            if (h1, h2) != (0, 0) {
                modes.push(((-h1, -h2), v.conj()));
            }
        }
    }
    field_from_modes(n1, n2, &modes).unwrap()
}

/// Random `(xi, eta)` pair in the zero-mean gauge.
pub fn random_pair(n1: usize, n2: usize, b1: i64, b2: i64, amp: f64, kp: bool, rng: &mut ChaCha8Rng) -> FieldPair {
    let xi = random_real(n1, n2, b1, b2, amp, kp, rng);
    let mut eta = random_real(n1, n2, b1, b2, amp, kp, rng);
    for h2 in -(n2 as i64 / 2)..=(n2 as i64 / 2) {
        eta.set_mode(0, h2, xi.mode(0, h2).unwrap()).unwrap();
    }
    FieldPair::xi_eta(xi, eta, 0.0).unwrap()
}

pub fn random_psi(n1: usize, n2: usize, b1: i64, b2: i64, amp: f64, rng: &mut ChaCha8Rng) -> FieldPair {
    let mut modes = Vec::new();
    for h1 in -b1..=b1 {
        for h2 in -b2..=b2 {
            modes.push(((h1, h2), c(amp * rng.random_range(-1.0..1.0), amp * rng.random_range(-1.0..1.0))));
        }
    }
    FieldPair::psi(field_from_modes(n1, n2, &modes).unwrap(), 0.0).unwrap()
}

/// A signed Fourier entry of one factor. The orbit average keeps products
/// whose total `w` vanishes.
#[derive(Clone, Copy)]
pub struct Entry {
    pub h: (i64, i64),
    pub c: C64,
    pub w: i64,
}

/// Orbit average of `int_I (sum of entries as a field)^k dy` with
/// `f = 1/2 sum c exp(i pi h.y)`: `4 / 2^k` times the sum over ordered
/// k-tuples with zero total `h` and zero total `w`.
pub fn avg_power(entries: &[Entry], k: usize) -> f64 {
    let mut last: HashMap<(i64, i64, i64), C64> = HashMap::new();
    for e in entries {
        *last.entry((e.h.0, e.h.1, e.w)).or_default() += e.c;
    }
    fn rec(entries: &[Entry], last: &HashMap<(i64, i64, i64), C64>, left: usize, h: (i64, i64), w: i64, acc: C64) -> C64 {
        if left == 1 {
            return last.get(&(-h.0, -h.1, -w)).map(|v| acc * v).unwrap_or_default();
        }
        entries.iter().map(|e| rec(entries, last, left - 1, (h.0 + e.h.0, h.1 + e.h.1, ), w + e.w, acc * e.c)).sum()
    }
    let s = rec(entries, &last, k, (0, 0), 0, c(1.0, 0.0));
    assert!(s.im.abs() < 1e-9 * s.norm().max(1.0));
    4.0 / 2f64.powi(k as i32) * s.re
}

pub fn nonzero(f: &GridField2D) -> Vec<(i64, i64, C64)> {
    f.modes().filter(|m| m.2.norm() > 0.0).collect()
}

/// Entries of `mult(h) xi(y1 - s) + sign mult(h) eta(y1 + s)`.
pub fn xieta_entries(fp: &FieldPair, sign: f64, mult: impl Fn(i64, i64) -> C64) -> Vec<Entry> {
    let mut out = Vec::new();
    for (h1, h2, v) in nonzero(&fp.a) {
        out.push(Entry { h: (h1, h2), c: v * mult(h1, h2), w: h1 });
    }
    for (h1, h2, v) in nonzero(&fp.b) {
        out.push(Entry { h: (h1, h2), c: v * mult(h1, h2) * sign, w: -h1 });
    }
    out
}

pub fn oracle(fp: &FieldPair, regime: AverageRegime) -> f64 {
    let d1 = |h1: i64, _| c(0.0, PI * h1 as f64);
    let one = |_, _| c(1.0, 0.0);
    match regime {
        AverageRegime::Nls { beta } => {
            let mut u = Vec::new();
            let mut du = Vec::new();
            for (h1, h2, v) in nonzero(&fp.a) {
                u.push(Entry { h: (h1, h2), c: v, w: 1 });
                // conj(psi) has coefficient conj(psi^_{-h}) at h
                u.push(Entry { h: (-h1, -h2), c: v.conj(), w: -1 });
            }
            for e in &u {
                du.push(Entry { c: e.c * d1(e.h.0, e.h.1), ..*e });
            }
            avg_power(&du, 2) / 4.0 + beta * avg_power(&u, 4) / 16.0
        }
        _ => {
            let disp = -avg_power(&xieta_entries(fp, -1.0, d1), 2) / 48.0;
            let sum = xieta_entries(fp, 1.0, one);
            match regime {
                AverageRegime::Kdv { alpha } => disp + alpha * avg_power(&sum, 3) / (6.0 * SQRT_2),
                AverageRegime::Kp { alpha } => {
                    let tr = xieta_entries(fp, -1.0, |h1, h2| {
                        if h1 == 0 {
                            c(0.0, 0.0)
                        } else {
                            c(h2 as f64 / h1 as f64, 0.0)
                        }
                    });
                    disp + alpha * avg_power(&sum, 3) / (6.0 * SQRT_2) + avg_power(&tr, 2) / 4.0
                }
                AverageRegime::Mkdv { beta } => disp + beta * avg_power(&sum, 4) / 16.0,
                AverageRegime::Nls { .. } => unreachable!(),
            }
        }
    }
}

/// `1/2 sum_h f^_h exp(i pi h.y)` by direct summation.
pub fn eval(f: &GridField2D, y: (f64, f64)) -> C64 {
    spectral(f).modes().map(|(h1, h2, v)| v * C64::from_polar(0.5, PI * (h1 as f64 * y.0 + h2 as f64 * y.1))).sum()
}

/// Lattice `(Q, P)` at `t = 0` by direct evaluation at `y = (2 j1 / n1, 2 j2 / n2)`.
pub fn sample_sites(fp: &FieldPair, params: &LatticeParams) -> (Vec<f64>, Vec<f64>) {
    let (n1, n2) = params.extents();
    let mu = params.mu();
    let (qa, pa) = match params.regime {
        LatticeRegime::Etl => (mu * mu, mu),
        LatticeRegime::Kg => (mu, mu),
    };
    // d1^{-1}(xi - eta) spectrum with zero line means
    let diff = spectral(&fp.a);
    let eta = spectral(&fp.b);
    let (m1, m2) = diff.extents();
    let inv = GridField2D::from_modes(m1, m2, Domain::Torus, |h1, h2| {
        if h1 == 0 {
            c(0.0, 0.0)
        } else {
            (diff.mode(h1, h2).unwrap() - eta.mode(h1, h2).unwrap()) / c(0.0, PI * h1 as f64)
        }
    })
    .unwrap();
    let (mut q, mut p) = (Vec::new(), Vec::new());
    for o in 0..n1 * n2 {
        let y = (2.0 * (o / n2) as f64 / n1 as f64, 2.0 * (o % n2) as f64 / n2 as f64);
        match params.regime {
            LatticeRegime::Etl => {
                q.push(qa * (eval(&fp.a, y) + eval(&fp.b, y)).re / SQRT_2);
                p.push(pa * eval(&inv, y).re / SQRT_2);
            }
            LatticeRegime::Kg => {
                let psi = eval(&fp.a, y);
                q.push(qa * SQRT_2 * psi.re);
                p.push(-pa * SQRT_2 * psi.im);
            }
        }
    }
    (q, p)
}

/// Folded specific energies over `0 <= k1 <= N1`, `0 <= k2 <= N2` from a
/// direct DFT of the sampled state.
pub fn brute_force_energies(fp: &FieldPair, params: &LatticeParams) -> Vec<Vec<f64>> {
    let (q, p) = sample_sites(fp, params);
    let (n1, n2) = params.extents();
    let (b1, b2) = (params.big_n1, params.big_n2);
    let mut out = vec![vec![0.0; b2 + 1]; b1 + 1];
    let s = |k: i64, n: usize| (PI * k as f64 / n as f64).sin().powi(2);
    for k1 in -(b1 as i64)..=b1 as i64 {
        for k2 in -(b2 as i64)..=b2 as i64 {
            let (mut qh, mut ph) = (c(0.0, 0.0), c(0.0, 0.0));
            for o in 0..n1 * n2 {
                let (j1, j2) = ((o / n2) as f64, (o % n2) as f64);
                let e = C64::from_polar(1.0, -2.0 * PI * (j1 * k1 as f64 / n1 as f64 + j2 * k2 as f64 / n2 as f64));
                qh += e * q[o];
                ph += e * p[o];
            }
            let (a, b) = (qh.norm_sqr() / (n1 * n2) as f64, ph.norm_sqr() / (n1 * n2) as f64);
            let lap = 4.0 * s(k1, n1) + 4.0 * s(k2, n2);
            let e = match params.regime {
                LatticeRegime::Etl => 0.5 * (a + lap * b),
                LatticeRegime::Kg => 0.5 * (b + (1.0 + lap) * a),
            };
            out[k1.unsigned_abs() as usize][k2.unsigned_abs() as usize] +=
                e / ((b1 as f64 + 0.5) * (b2 as f64 + 0.5));
        }
    }
    out
}

