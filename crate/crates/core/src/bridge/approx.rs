use std::f64::consts::PI;

use super::coords::{psi_to_qp, qp_to_psi, qp_to_xieta, xieta_to_qp};
use super::Regime;
use crate::error::{Error, Result};
use crate::lattice::{LatticeParams, LatticeRegime, LatticeState};
use crate::normal_form::{FieldPair, PairKind};
use crate::spectral::{signed_index, wrap_index, Domain, Fft2, GridField2D, Space, C64};

/// Relative tolerance on the zero-mean gauge of `(xi, eta)` inputs.
const GAUGE_TOL: f64 = 1e-10;

/// Regime whose scalings apply when only the lattice model is known.
fn default_regime(params: &LatticeParams) -> Regime {
    match params.regime {
        LatticeRegime::Etl => Regime::Kdv,
        LatticeRegime::Kg => Regime::Nls1d,
    }
}

fn check_pair(regime: Regime, fp: &FieldPair, params: &LatticeParams) -> Result<()> {
    if regime.lattice() != params.regime {
        return Err(Error::RegimeMismatch(format!("{regime} needs a {} lattice", regime.lattice())));
    }
    let want = match regime.lattice() {
        LatticeRegime::Etl => PairKind::XiEta,
        LatticeRegime::Kg => PairKind::Psi,
    };
    if fp.kind != want {
        return Err(Error::RegimeMismatch(format!("{regime} needs a {want:?} pair, got {:?}", fp.kind)));
    }
    if fp.kind == PairKind::XiEta {
        let g = fp.gauge_residual();
        if g > GAUGE_TOL * fp.norm().max(1.0) {
            return Err(Error::Constraint(format!("zero-mean gauge violated (residual {g:.3e})")));
        }
    }
    Ok(())
}

/// `sum_{h = K mod n} f^_h` for every lattice mode `K`, in wrap-around order.
fn fold(f: &GridField2D, n1: usize, n2: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n1 * n2];
    for (h1, h2, c) in f.modes() {
        out[wrap_index(h1, n1) * n2 + wrap_index(h2, n2)] += c;
    }
    out
}

/// Exact evaluation of `mu^a f` at the lattice points `y = (mu j1, mu^sigma j2)`.
fn sample(f: &GridField2D, params: &LatticeParams, amp: f64) -> Vec<f64> {
    let (n1, n2) = params.extents();
    let mut v = fold(f, n1, n2);
    Fft2::new(n1, n2).inverse(&mut v);
    v.iter().map(|c| c.re * 0.5 * amp).collect()
}

/// Lattice sampling of the approximate solution at lattice time `t` for the
/// given regime: `(xi, eta)` pairs are translated by `-+ mu t` along `y1`,
/// `psi` is rotated by `exp(i t)`, then rescaled by `mu^a`, `mu^b`.
pub fn build_approx(regime: Regime, fp: &FieldPair, params: &LatticeParams, t: f64) -> Result<LatticeState> {
    check_pair(regime, fp, params)?;
    let mu = params.mu();
    let (qh, ph) = match fp.kind {
        PairKind::XiEta => {
            let tau = regime.tau_per_t(mu) * t;
            let mut moved = fp.clone();
            for (f, sign) in [(&mut moved.a, -1.0), (&mut moved.b, 1.0)] {
                let (n1, n2) = f.extents();
                for (o, c) in f.values_mut().iter_mut().enumerate() {
                    let h1 = signed_index(o / n2, n1);
                    *c *= C64::from_polar(1.0, sign * PI * h1 as f64 * tau);
                }
            }
            xieta_to_qp(&moved)?
        }
        PairKind::Psi => {
            let mut moved = fp.clone();
            let rot = C64::from_polar(1.0, t);
            moved.a.values_mut().iter_mut().for_each(|c| *c *= rot);
            moved.b.values_mut().iter_mut().for_each(|c| *c *= rot.conj());
            psi_to_qp(&moved)?
        }
    };
    let (a, b) = regime.amplitude_powers();
    let q = sample(&qh, params, mu.powi(a));
    let p = sample(&ph, params, mu.powi(b));
    LatticeState::from_fields(params, q, p, t)
}

/// `Q_a = mu^2 (xi(y1 - tau) + eta(y1 + tau)) / sqrt 2`, `P_a = mu d1^{-1}(xi - eta) / sqrt 2`
/// with `tau = mu t`, sampled exactly at the lattice points.
pub fn build_approx_etl(fp: &FieldPair, params: &LatticeParams, t: f64) -> Result<LatticeState> {
    build_approx(Regime::Kdv, fp, params, t)
}

/// `Q_a = mu (e^{it} psi + cc) / sqrt 2`, `P_a = i mu (e^{it} psi - cc) / sqrt 2`,
/// sampled exactly at the lattice points.
pub fn build_approx_kg(fp: &FieldPair, params: &LatticeParams, t: f64) -> Result<LatticeState> {
    build_approx(Regime::Nls1d, fp, params, t)
}

/// Initial PDE data from a lattice state: the rescaled lattice spectrum is
/// copied mode by mode onto a torus grid of extents `pde_grid`, then mapped
/// to `(xi, eta)` or `psi`. Lattice modes outside the grid must be empty.
pub fn lattice_to_pde(
    regime: Regime,
    state: &LatticeState,
    params: &LatticeParams,
    pde_grid: (usize, usize),
) -> Result<FieldPair> {
    if regime.lattice() != params.regime {
        return Err(Error::RegimeMismatch(format!("{regime} needs a {} lattice", regime.lattice())));
    }
    let (m1, m2) = pde_grid;
    let (n1, n2) = params.extents();
    let mu = params.mu();
    let (a, b) = regime.amplitude_powers();
    let fft = Fft2::new(n1, n2);
    let to_torus = |v: &[f64], amp: f64| -> Result<GridField2D> {
        let mut c: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
        fft.forward(&mut c);
        let mut out = GridField2D::zeros(m1, m2, Domain::Torus, Space::Spectral)?;
        let (r1, r2) = out.half_extents();
        let mut dropped = 0.0;
        let mut total = 0.0;
        for (o, x) in c.iter().enumerate() {
            let (k1, k2) = (signed_index(o / n2, n1), signed_index(o % n2, n2));
            total += x.norm_sqr();
            if k1.abs() <= r1 && k2.abs() <= r2 {
                out.set_mode(k1, k2, x * (2.0 / amp))?;
            } else {
                dropped += x.norm_sqr();
            }
        }
        if dropped > 1e-20 * total.max(f64::MIN_POSITIVE) {
            return Err(Error::Config(format!(
                "PDE grid {m1}x{m2} cannot hold the lattice data (dropped fraction {:.3e})",
                dropped / total
            )));
        }
        Ok(out)
    };
    // Q^_K = mu^a sqrt(N)/2 q^_K with unnormalized forward FFT = sqrt(N) Q^_K.
    let q = to_torus(&state.q, mu.powi(a) * (n1 * n2) as f64)?;
    let p = to_torus(&state.p, mu.powi(b) * (n1 * n2) as f64)?;
    let mut fp = match params.regime {
        LatticeRegime::Etl => qp_to_xieta(&q, &p)?,
        LatticeRegime::Kg => qp_to_psi(&q, &p)?,
    };
    fp.tau = regime.tau_per_t(mu) * state.t;
    Ok(fp)
}

/// Signed specific energies `E_K / ((N1 + 1/2)(N2 + 1/2))` of the lattice
/// state sampled from `fp` at `t = 0`, on the full lattice index set in
/// wrap-around order, computed from the aliased coefficient sums.
pub fn spec_energies_from_pde(regime: Regime, fp: &FieldPair, params: &LatticeParams) -> Result<Vec<f64>> {
    check_pair(regime, fp, params)?;
    let (n1, n2) = params.extents();
    let (qh, ph) = match fp.kind {
        PairKind::XiEta => xieta_to_qp(fp)?,
        PairKind::Psi => psi_to_qp(fp)?,
    };
    let (sq, sp) = (fold(&qh, n1, n2), fold(&ph, n1, n2));
    let mu = params.mu();
    let (a, b) = regime.amplitude_powers();
    let (wa, wb) = (mu.powi(2 * a), mu.powi(2 * b));
    Ok((0..n1 * n2)
        .map(|o| {
            let w2 = params.omega_sq(signed_index(o / n2, n1), signed_index(o % n2, n2));
            let (x, y) = (wa * sq[o].norm_sqr(), wb * sp[o].norm_sqr());
            match params.regime {
                LatticeRegime::Etl => 0.5 * (x + w2 * y),
                LatticeRegime::Kg => 0.5 * (y + w2 * x),
            }
        })
        .collect())
}

/// Folded specific energy at `kappa(K)`, summed over the sign variants of
/// `K` like [`crate::lattice::ModeSpectrum::specific_at`]; zero when `K`
/// lies outside the lattice. Scalings are those of KdV/KP (ETL) or NLS (KG).
pub fn spec_energy_from_pde(fp: &FieldPair, params: &LatticeParams, k: (i64, i64)) -> Result<f64> {
    let regime = default_regime(params);
    check_pair(regime, fp, params)?;
    let (b1, b2) = (params.big_n1 as i64, params.big_n2 as i64);
    if k.0.abs() > b1 || k.1.abs() > b2 {
        return Ok(0.0);
    }
    let (n1, n2) = params.extents();
    let (qh, ph) = match fp.kind {
        PairKind::XiEta => xieta_to_qp(fp)?,
        PairKind::Psi => psi_to_qp(fp)?,
    };
    let mu = params.mu();
    let (a, b) = regime.amplitude_powers();
    let mut total = 0.0;
    for (k1, k2) in crate::lattice::sign_variants(k.0.abs(), k.1.abs()) {
        let (w1, w2) = (wrap_index(k1, n1), wrap_index(k2, n2));
        let mut sq = C64::new(0.0, 0.0);
        let mut sp = C64::new(0.0, 0.0);
        for ((h1, h2, x), (_, _, y)) in qh.modes().zip(ph.modes()) {
            if wrap_index(h1, n1) == w1 && wrap_index(h2, n2) == w2 {
                sq += x;
                sp += y;
            }
        }
        let om = params.omega_sq(k1, k2);
        let (x, y) = (mu.powi(2 * a) * sq.norm_sqr(), mu.powi(2 * b) * sp.norm_sqr());
        total += match params.regime {
            LatticeRegime::Etl => 0.5 * (x + om * y),
            LatticeRegime::Kg => 0.5 * (y + om * x),
        };
    }
    Ok(total)
}

/// Leading-order specific energy of the signed PDE mode `K`:
/// `mu^p (|xi^_K|^2 + |eta^_K|^2) / 2` or `mu^2 (|psi^_K|^2 + |psi^_{-K}|^2) / 2`.
pub(crate) fn leading_energy(regime: Regime, fp: &FieldPair, mu: f64, k1: i64, k2: i64) -> Result<f64> {
    let p = regime.energy_power();
    Ok(match fp.kind {
        PairKind::XiEta => mu.powi(p) * (fp.a.mode(k1, k2)?.norm_sqr() + fp.b.mode(k1, k2)?.norm_sqr()) / 2.0,
        PairKind::Psi => mu.powi(p) * (fp.a.mode(k1, k2)?.norm_sqr() + fp.a.mode(-k1, -k2)?.norm_sqr()) / 2.0,
    })
}
