use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::normal_form::{FieldPair, PairKind};
use crate::spectral::{forward_transform, signed_index, Domain, GridField2D, Space, C64};

fn spectral(f: &GridField2D) -> Result<GridField2D> {
    if f.domain() != Domain::Torus {
        return Err(Error::Config("expected a torus field".into()));
    }
    match f.space() {
        Space::Spectral => Ok(f.clone()),
        Space::Physical => forward_transform(f),
    }
}

fn same_shape(a: &GridField2D, b: &GridField2D) -> Result<()> {
    if a.extents() != b.extents() {
        return Err(Error::Config(format!("extents differ: {:?} vs {:?}", a.extents(), b.extents())));
    }
    Ok(())
}

fn map2(a: &GridField2D, b: &GridField2D, f: impl Fn(i64, i64, C64, C64) -> (C64, C64)) -> (GridField2D, GridField2D) {
    let (n1, n2) = a.extents();
    let mut x = a.clone();
    let mut y = b.clone();
    for o in 0..n1 * n2 {
        let (u, v) = f(signed_index(o / n2, n1), signed_index(o % n2, n2), a.values()[o], b.values()[o]);
        x.values_mut()[o] = u;
        y.values_mut()[o] = v;
    }
    (x, y)
}

/// `xi = (q + d1 p) / sqrt 2`, `eta = (q - d1 p) / sqrt 2`.
pub fn qp_to_xieta(q: &GridField2D, p: &GridField2D) -> Result<FieldPair> {
    same_shape(q, p)?;
    let (q, p) = (spectral(q)?, spectral(p)?);
    let (xi, eta) = map2(&q, &p, |h1, _, qh, ph| {
        let dp = ph * C64::new(0.0, PI * h1 as f64);
        ((qh + dp) / SQRT_2, (qh - dp) / SQRT_2)
    });
    FieldPair::xi_eta(xi, eta, 0.0)
}

/// Inverse of [`qp_to_xieta`] on the zero-mean gauge: `q = (xi + eta)/sqrt 2`,
/// `p = d1^{-1} (xi - eta) / sqrt 2` with zero line means. Spectral output.
pub fn xieta_to_qp(fp: &FieldPair) -> Result<(GridField2D, GridField2D)> {
    if fp.kind != PairKind::XiEta {
        return Err(Error::Config("xieta_to_qp needs an (xi, eta) pair".into()));
    }
    Ok(map2(&fp.a, &fp.b, |h1, _, x, e| {
        let q = (x + e) / SQRT_2;
        let p = if h1 == 0 { C64::new(0.0, 0.0) } else { (x - e) / (SQRT_2 * C64::new(0.0, PI * h1 as f64)) };
        (q, p)
    }))
}

/// `psi = (q - i p) / sqrt 2`.
pub fn qp_to_psi(q: &GridField2D, p: &GridField2D) -> Result<FieldPair> {
    same_shape(q, p)?;
    let (q, p) = (spectral(q)?, spectral(p)?);
    let (psi, _) = map2(&q, &p, |_, _, qh, ph| ((qh - C64::new(0.0, 1.0) * ph) / SQRT_2, qh));
    FieldPair::psi(psi, 0.0)
}

/// `q = (psi + conj psi) / sqrt 2`, `p = i (psi - conj psi) / sqrt 2`.
/// Spectral output.
pub fn psi_to_qp(fp: &FieldPair) -> Result<(GridField2D, GridField2D)> {
    if fp.kind != PairKind::Psi {
        return Err(Error::Config("psi_to_qp needs a (psi, conj psi) pair".into()));
    }
    let i = C64::new(0.0, 1.0);
    Ok(map2(&fp.a, &fp.b, |_, _, a, b| ((a + b) / SQRT_2, i * (a - b) / SQRT_2)))
}
