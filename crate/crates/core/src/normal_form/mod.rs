//! Resonant normal forms on the torus `I = [-1, 1]^2`: pairs of KdV / KP-II /
//! mKdV equations for the long-wave ETL regimes and cubic NLS for the
//! Klein-Gordon regimes, the expansion of the rescaled lattice Laplacian, and
//! a quadrature oracle for the averaged first-order Hamiltonians.

mod averaging;
mod expansion;
mod export;
mod solver;

pub use averaging::{closed_form_average, time_average_f1, AverageRegime};
pub use expansion::{dispersion_expansion, expansion_coefficient, DispersionExpansion, DispersionTerm};
pub use export::{write_field_csv, write_spectrum_csv};
pub use solver::{
    kdv_system_step, kp2_system_step, mkdv_system_step, nls1d_step, nls2d_step, Flow, NlsFlow, NormalFormSolver,
    XiEtaFlow,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{forward_transform, inverse_transform, Domain, GridField2D, Space, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairKind {
    XiEta,
    Psi,
}

/// Two torus fields in spectral form: `(xi, eta)` or `(psi, conj psi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub a: GridField2D,
    pub b: GridField2D,
    pub tau: f64,
    pub kind: PairKind,
}

/// Relative size allowed for imaginary parts and gauge residues.
const STRUCT_TOL: f64 = 1e-10;

impl FieldPair {
    /// Real pair `(xi, eta)`; `a` and `b` may be physical or spectral. The
    /// modes `(0, h2)` of `xi - eta` must vanish.
    pub fn xi_eta(a: GridField2D, b: GridField2D, tau: f64) -> Result<Self> {
        let a = to_spectral(a)?;
        let b = to_spectral(b)?;
        if a.extents() != b.extents() {
            return Err(Error::Config(format!("pair extents differ: {:?} vs {:?}", a.extents(), b.extents())));
        }
        for f in [&a, &b] {
            let asym = conj_asymmetry(f);
            if asym > STRUCT_TOL * f.norm_sqr().sqrt().max(1.0) {
                return Err(Error::Constraint(format!("field is not real (asymmetry {asym:.3e})")));
            }
        }
        let fp = Self { a, b, tau, kind: PairKind::XiEta };
        let g = fp.gauge_residual();
        if g > STRUCT_TOL * fp.norm().max(1.0) {
            return Err(Error::Constraint(format!(
                "xi - eta has a y1-average of size {g:.3e} on some y2 line (zero-mean gauge)"
            )));
        }
        Ok(fp)
    }

    /// `(psi, conj psi)` from `psi`, physical or spectral.
    pub fn psi(a: GridField2D, tau: f64) -> Result<Self> {
        let a = to_spectral(a)?;
        let b = conj_field(&a);
        Ok(Self { a, b, tau, kind: PairKind::Psi })
    }

    pub fn extents(&self) -> (usize, usize) {
        self.a.extents()
    }

    /// `sqrt(|a|^2 + |b|^2)` in the torus l2 norm.
    pub fn norm(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr()).sqrt()
    }

    /// Largest `|a^ - b^|` over the modes `(0, h2)`.
    pub fn gauge_residual(&self) -> f64 {
        let (_, n2) = self.extents();
        (0..n2).map(|i2| (self.a.values()[i2] - self.b.values()[i2]).norm()).fold(0.0, f64::max)
    }

    pub fn physical(&self) -> Result<(GridField2D, GridField2D)> {
        Ok((inverse_transform(&self.a)?, inverse_transform(&self.b)?))
    }
}

fn to_spectral(f: GridField2D) -> Result<GridField2D> {
    if f.domain() != Domain::Torus {
        return Err(Error::Config("normal-form fields live on the torus".into()));
    }
    match f.space() {
        Space::Spectral => Ok(f),
        Space::Physical => forward_transform(&f),
    }
}

/// Spectrum of the complex conjugate field: `c^_h = conj(f^_{-h})`.
pub(crate) fn conj_field(f: &GridField2D) -> GridField2D {
    let (n1, n2) = f.extents();
    let v = f.values();
    let mut out = f.clone();
    for (o, x) in out.values_mut().iter_mut().enumerate() {
        let (i1, i2) = (o / n2, o % n2);
        *x = v[((n1 - i1) % n1) * n2 + (n2 - i2) % n2].conj();
    }
    out
}

fn conj_asymmetry(f: &GridField2D) -> f64 {
    let c = conj_field(f);
    f.values().iter().zip(c.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

/// Torus field from a list of spectral coefficients `((h1, h2), c)`.
pub fn field_from_modes(n1: usize, n2: usize, modes: &[((i64, i64), C64)]) -> Result<GridField2D> {
    let mut f = GridField2D::zeros(n1, n2, Domain::Torus, Space::Spectral)?;
    for &((h1, h2), c) in modes {
        let old = f.mode(h1, h2)?;
        f.set_mode(h1, h2, old + c)?;
    }
    Ok(f)
}
