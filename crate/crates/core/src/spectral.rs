//! Discrete Fourier conventions on the periodic lattice and on the torus
//! `I = [-1, 1]^2`, weighted sequence norms, Galerkin projectors and the
//! symbol of the nearest-neighbour Laplacian.
//!
//! Lattice fields use the unitary pairing
//! `Q_j = N^{-1/2} sum_k Q^_k exp(2 pi i (j1 k1 / n1 + j2 k2 / n2))`.
//! Torus fields use `f(y) = 1/2 sum_h f^_h exp(i pi h.y)`, so that
//! `int_I |f|^2 dy = sum_h |f^_h|^2` (the factor 2 per direction of the
//! period cancels against the 1/2).
//!
//! Both grids store indices in wrap-around order: position `i` holds the
//! signed index `i` for `i <= n/2` and `i - n` otherwise. Torus point `i`
//! sits at `y = 2 i / n` (mod 2).

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Domain {
    Lattice,
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Space {
    Physical,
    Spectral,
}

#[inline]
pub fn wrap_index(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

#[inline]
pub fn signed_index(i: usize, n: usize) -> i64 {
    if 2 * i <= n {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Coordinate in `[-1, 1)` of torus grid point `i` out of `n`.
#[inline]
pub fn torus_coordinate(i: usize, n: usize) -> f64 {
    let y = 2.0 * i as f64 / n as f64;
    if y >= 1.0 {
        y - 2.0
    } else {
        y
    }
}

/// A complex scalar field on an `n1 x n2` grid, row-major with the first
/// (y1 / x1) index varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField2D {
    n1: usize,
    n2: usize,
    domain: Domain,
    space: Space,
    values: Vec<C64>,
}

impl GridField2D {
    pub fn new(n1: usize, n2: usize, domain: Domain, space: Space, values: Vec<C64>) -> Result<Self> {
        check_extents(n1, n2)?;
        if values.len() != n1 * n2 {
            return Err(Error::Config(format!(
                "extents {n1}x{n2} need {} values, got {}",
                n1 * n2,
                values.len()
            )));
        }
        Ok(Self { n1, n2, domain, space, values })
    }

    pub fn zeros(n1: usize, n2: usize, domain: Domain, space: Space) -> Result<Self> {
        Self::new(n1, n2, domain, space, vec![C64::new(0.0, 0.0); n1 * n2])
    }

    /// Physical field from grid indices.
    pub fn from_indices(
        n1: usize,
        n2: usize,
        domain: Domain,
        f: impl Fn(usize, usize) -> C64,
    ) -> Result<Self> {
        check_extents(n1, n2)?;
        let mut values = Vec::with_capacity(n1 * n2);
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                values.push(f(i1, i2));
            }
        }
        Self::new(n1, n2, domain, Space::Physical, values)
    }

    /// Physical torus field sampled from a function of `(y1, y2)`.
    pub fn torus_from_fn(n1: usize, n2: usize, f: impl Fn(f64, f64) -> C64) -> Result<Self> {
        Self::from_indices(n1, n2, Domain::Torus, |i1, i2| {
            f(torus_coordinate(i1, n1), torus_coordinate(i2, n2))
        })
    }

    /// Spectral field from signed mode indices.
    pub fn from_modes(
        n1: usize,
        n2: usize,
        domain: Domain,
        f: impl Fn(i64, i64) -> C64,
    ) -> Result<Self> {
        check_extents(n1, n2)?;
        let mut values = Vec::with_capacity(n1 * n2);
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                values.push(f(signed_index(i1, n1), signed_index(i2, n2)));
            }
        }
        Self::new(n1, n2, domain, Space::Spectral, values)
    }

    pub fn extents(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// Largest representable signed index in each direction.
    pub fn half_extents(&self) -> (i64, i64) {
        ((self.n1 / 2) as i64, (self.n2 / 2) as i64)
    }

    fn mode_offset(&self, k1: i64, k2: i64) -> Result<usize> {
        let (h1, h2) = self.half_extents();
        if k1.abs() > h1 || k2.abs() > h2 {
            return Err(Error::IndexOutOfRange(format!(
                "mode ({k1}, {k2}) outside [-{h1}, {h1}] x [-{h2}, {h2}]"
            )));
        }
        Ok(wrap_index(k1, self.n1) * self.n2 + wrap_index(k2, self.n2))
    }

    pub fn mode(&self, k1: i64, k2: i64) -> Result<C64> {
        Ok(self.values[self.mode_offset(k1, k2)?])
    }

    pub fn set_mode(&mut self, k1: i64, k2: i64, v: C64) -> Result<()> {
        let o = self.mode_offset(k1, k2)?;
        self.values[o] = v;
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Iterate `(k1, k2, value)` over signed indices.
    pub fn modes(&self) -> impl Iterator<Item = (i64, i64, C64)> + '_ {
        let (n1, n2) = (self.n1, self.n2);
        self.values
            .iter()
            .enumerate()
            .map(move |(o, v)| (signed_index(o / n2, n1), signed_index(o % n2, n2), *v))
    }
}

fn check_extents(n1: usize, n2: usize) -> Result<()> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::Config(format!("empty extents {n1}x{n2}")));
    }
    if n1 % 2 == 0 || n2 % 2 == 0 {
        return Err(Error::Config(format!("extents {n1}x{n2} must be odd in both directions")));
    }
    Ok(())
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized 2D FFT on a row-major `n1 x n2` buffer.
#[derive(Clone)]
pub struct Fft2 {
    n1: usize,
    n2: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2({}x{})", self.n1, self.n2)
    }
}

impl Fft2 {
    pub fn new(n1: usize, n2: usize) -> Self {
        PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            Self {
                n1,
                n2,
                row_fwd: p.plan_fft_forward(n2),
                row_inv: p.plan_fft_inverse(n2),
                col_fwd: p.plan_fft_forward(n1),
                col_inv: p.plan_fft_inverse(n1),
            }
        })
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `X_k = sum_j x_j exp(-2 pi i k.j/n)`
    pub fn forward(&self, data: &mut [C64]) {
        self.run(data, true);
    }

    /// `x_j = sum_k X_k exp(+2 pi i k.j/n)` (no 1/N)
    pub fn inverse(&self, data: &mut [C64]) {
        self.run(data, false);
    }

    fn run(&self, data: &mut [C64], fwd: bool) {
        assert_eq!(data.len(), self.n1 * self.n2);
        let (rows, cols) = if fwd { (&self.row_fwd, &self.col_fwd) } else { (&self.row_inv, &self.col_inv) };
        if self.n2 > 1 {
            rows.process(data);
        }
        if self.n1 > 1 {
            let mut t = vec![C64::new(0.0, 0.0); data.len()];
            transpose(data, &mut t, self.n1, self.n2);
            cols.process(&mut t);
            transpose(&t, data, self.n2, self.n1);
        }
    }
}

fn transpose(src: &[C64], dst: &mut [C64], rows: usize, cols: usize) {
    const B: usize = 16;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Physical to spectral, in the convention of the field's domain.
pub fn forward_transform(field: &GridField2D) -> Result<GridField2D> {
    if field.space != Space::Physical {
        return Err(Error::Config("forward_transform expects a physical field".into()));
    }
    let (n1, n2) = field.extents();
    let mut v = field.values.clone();
    Fft2::new(n1, n2).forward(&mut v);
    let scale = match field.domain {
        Domain::Lattice => 1.0 / ((n1 * n2) as f64).sqrt(),
        Domain::Torus => 2.0 / (n1 * n2) as f64,
    };
    v.iter_mut().for_each(|x| *x *= scale);
    GridField2D::new(n1, n2, field.domain, Space::Spectral, v)
}

/// Spectral to physical, inverse of [`forward_transform`].
pub fn inverse_transform(field: &GridField2D) -> Result<GridField2D> {
    if field.space != Space::Spectral {
        return Err(Error::Config("inverse_transform expects a spectral field".into()));
    }
    let (n1, n2) = field.extents();
    let mut v = field.values.clone();
    Fft2::new(n1, n2).inverse(&mut v);
    let scale = match field.domain {
        Domain::Lattice => 1.0 / ((n1 * n2) as f64).sqrt(),
        Domain::Torus => 0.5,
    };
    v.iter_mut().for_each(|x| *x *= scale);
    GridField2D::new(n1, n2, field.domain, Space::Physical, v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNormParams {
    rho: f64,
    s: f64,
}

impl WeightedNormParams {
    pub fn new(rho: f64, s: f64) -> Result<Self> {
        if !(rho >= 0.0 && s >= 0.0) {
            return Err(Error::InvalidParameter(format!("weights need rho >= 0 and s >= 0, got ({rho}, {s})")));
        }
        Ok(Self { rho, s })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// `(sum_{n != 0} |v_n|^2 e^{2 rho |n|} |n|^{2 s})^{1/2}` over the spectral
/// coefficients; the zero mode is skipped.
pub fn weighted_norm(spectral: &GridField2D, w: WeightedNormParams) -> f64 {
    spectral
        .modes()
        .filter(|&(k1, k2, _)| k1 != 0 || k2 != 0)
        .map(|(k1, k2, v)| {
            let n = ((k1 * k1 + k2 * k2) as f64).sqrt();
            v.norm_sqr() * (2.0 * w.rho * n).exp() * n.powf(2.0 * w.s)
        })
        .sum::<f64>()
        .sqrt()
}

/// Keep the modes with Euclidean `|n| <= m`.
pub fn galerkin_project(spectral: &GridField2D, m: u64) -> GridField2D {
    let mut out = spectral.clone();
    let m2 = (m as u128).saturating_mul(m as u128);
    let (n1, n2) = out.extents();
    for (o, v) in out.values.iter_mut().enumerate() {
        let k1 = signed_index(o / n2, n1);
        let k2 = signed_index(o % n2, n2);
        if ((k1 * k1 + k2 * k2) as u128) > m2 {
            *v = C64::new(0.0, 0.0);
        }
    }
    out
}

/// `-omega_k^2` of the massless lattice: the eigenvalue of the 5-point
/// Laplacian on the mode `k` of a `(2 N1 + 1) x (2 N2 + 1)` lattice.
pub fn delta1_symbol(k: (i64, i64), sizes: (usize, usize)) -> Result<f64> {
    let (big1, big2) = sizes;
    if k.0.unsigned_abs() as usize > big1 || k.1.unsigned_abs() as usize > big2 {
        return Err(Error::IndexOutOfRange(format!(
            "mode ({}, {}) outside the lattice with half sizes ({big1}, {big2})",
            k.0, k.1
        )));
    }
    Ok(delta1_symbol_unchecked(k, (2 * big1 + 1, 2 * big2 + 1)))
}

#[inline]
pub(crate) fn delta1_symbol_unchecked(k: (i64, i64), n: (usize, usize)) -> f64 {
    let s1 = (std::f64::consts::PI * k.0 as f64 / n.0 as f64).sin();
    let s2 = (std::f64::consts::PI * k.1 as f64 / n.1 as f64).sin();
    -4.0 * (s1 * s1 + s2 * s2)
}

/// 5-point periodic Laplacian of a real `n1 x n2` grid into `out`.
pub fn apply_delta1(n1: usize, n2: usize, f: &[f64], out: &mut [f64]) {
    assert_eq!(f.len(), n1 * n2);
    assert_eq!(out.len(), n1 * n2);
    for i1 in 0..n1 {
        let up = &f[((i1 + n1 - 1) % n1) * n2..][..n2];
        let dn = &f[((i1 + 1) % n1) * n2..][..n2];
        let row = &f[i1 * n2..][..n2];
        let o = &mut out[i1 * n2..][..n2];
        stencil_row(row, up, dn, o);
    }
}

#[inline]
pub(crate) fn stencil_row(row: &[f64], up: &[f64], dn: &[f64], out: &mut [f64]) {
    let n2 = row.len();
    if n2 == 1 {
        out[0] = up[0] + dn[0] - 2.0 * row[0];
        return;
    }
    out[0] = up[0] + dn[0] + row[n2 - 1] + row[1] - 4.0 * row[0];
    for i in 1..n2 - 1 {
        out[i] = up[i] + dn[i] + row[i - 1] + row[i + 1] - 4.0 * row[i];
    }
    out[n2 - 1] = up[n2 - 1] + dn[n2 - 1] + row[n2 - 2] + row[0] - 4.0 * row[n2 - 1];
}
