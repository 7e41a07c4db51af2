use std::f64::consts::{PI, SQRT_2};

use super::{FieldPair, PairKind};
use crate::error::{Error, Result};
use crate::spectral::{signed_index, wrap_index, Fft2, C64};

/// First-order Hamiltonians whose averages along the unperturbed flow give
/// the normal forms.
///
/// * `Kdv`: `int -[d1(xi - eta)]^2/48 + alpha (xi + eta)^3 / (3 2^{3/2})`
/// * `Kp`: the KdV functional plus `int [d2 d1^{-1}(xi - eta)]^2 / 4`
/// * `Mkdv`: `int -[d1(xi - eta)]^2/48 + beta (xi + eta)^4 / 16`
/// * `Nls`: `int (psi + cc)(-d1^2)(psi + cc)/4 + beta (psi + cc)^4 / 16`
///
/// The `(xi, eta)` functionals are averaged over the translations
/// `xi(y1 - s), eta(y1 + s)`, `s in [0, 2)`, the NLS one over the rotations
/// `exp(i theta) psi`, `theta in [0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AverageRegime {
    Kp { alpha: f64 },
    Kdv { alpha: f64 },
    Mkdv { beta: f64 },
    Nls { beta: f64 },
}

impl AverageRegime {
    fn kind(&self) -> PairKind {
        match self {
            AverageRegime::Nls { .. } => PairKind::Psi,
            _ => PairKind::XiEta,
        }
    }
}

/// Evaluation of band-limited torus fields on a grid fine enough that
/// trapezoid sums of products up to fourth degree are exact.
struct Fine {
    n1: usize,
    n2: usize,
    m1: usize,
    m2: usize,
    fft: Fft2,
}

impl Fine {
    fn new(n1: usize, n2: usize) -> Self {
        let (m1, m2) = (2 * n1 + 1, 2 * n2 + 1);
        Self { n1, n2, m1, m2, fft: Fft2::new(m1, m2) }
    }

    /// Physical values of `sum_h mult(h) f^_h` on the fine grid.
    fn eval(&self, f: &[C64], mult: impl Fn(i64, i64) -> C64) -> Vec<C64> {
        let mut big = vec![C64::new(0.0, 0.0); self.m1 * self.m2];
        for (o, &c) in f.iter().enumerate() {
            let h1 = signed_index(o / self.n2, self.n1);
            let h2 = signed_index(o % self.n2, self.n2);
            big[wrap_index(h1, self.m1) * self.m2 + wrap_index(h2, self.m2)] = c * mult(h1, h2);
        }
        self.fft.inverse(&mut big);
        big.iter_mut().for_each(|x| *x *= 0.5);
        big
    }

    fn real(&self, f: &[C64], mult: impl Fn(i64, i64) -> C64) -> Vec<f64> {
        self.eval(f, mult).into_iter().map(|v| v.re).collect()
    }

    /// `int_I g dy`
    fn integral(&self, g: impl Iterator<Item = f64>) -> f64 {
        g.sum::<f64>() * 4.0 / (self.m1 * self.m2) as f64
    }

    /// `y2 -> int g dy1` on the fine `y2` grid.
    fn line_integrals(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m2];
        for (o, v) in g.iter().enumerate() {
            out[o % self.m2] += v;
        }
        let w = 2.0 / self.m1 as f64;
        out.iter_mut().for_each(|v| *v *= w);
        out
    }

    /// `int dy2 a(y2) b(y2)`
    fn line_product(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * 2.0 / self.m2 as f64
    }
}

fn ident(_: i64, _: i64) -> C64 {
    C64::new(1.0, 0.0)
}

fn d1(h1: i64, _: i64) -> C64 {
    C64::new(0.0, PI * h1 as f64)
}

/// `d2 d1^{-1}`, zero on `h1 = 0`
fn d2_over_d1(h1: i64, h2: i64) -> C64 {
    if h1 == 0 {
        C64::new(0.0, 0.0)
    } else {
        C64::new(h2 as f64 / h1 as f64, 0.0)
    }
}

fn check(fp: &FieldPair, regime: &AverageRegime) -> Result<()> {
    if fp.kind != regime.kind() {
        return Err(Error::Config(format!("{regime:?} needs a {:?} pair", regime.kind())));
    }
    Ok(())
}

/// The regime's functional evaluated on one point of the unperturbed orbit.
fn f1_on_orbit(fine: &Fine, fp: &FieldPair, regime: &AverageRegime, s: f64) -> f64 {
    match *regime {
        AverageRegime::Nls { beta } => {
            let rot = C64::from_polar(1.0, s);
            let u: Vec<C64> = fp.a.values().iter().zip(fp.b.values()).map(|(a, b)| a * rot + b * rot.conj()).collect();
            let ux = fine.real(&u, d1);
            let uu = fine.real(&u, ident);
            // int u (-d1^2 u) / 4 = int (d1 u)^2 / 4
            fine.integral(ux.iter().zip(&uu).map(|(d, v)| d * d / 4.0 + beta * v.powi(4) / 16.0))
        }
        _ => {
            let shift = |sign: f64| move |h1: i64, _h2: i64| C64::from_polar(1.0, sign * PI * h1 as f64 * s);
            let xi: Vec<C64> = fp.a.values().iter().zip(fine_modes(fp)).map(|(c, (h1, h2))| c * shift(-1.0)(h1, h2)).collect();
            let eta: Vec<C64> = fp.b.values().iter().zip(fine_modes(fp)).map(|(c, (h1, h2))| c * shift(1.0)(h1, h2)).collect();
            let diff: Vec<C64> = xi.iter().zip(&eta).map(|(a, b)| a - b).collect();
            let sum: Vec<C64> = xi.iter().zip(&eta).map(|(a, b)| a + b).collect();
            let dd = fine.real(&diff, d1);
            let ss = fine.real(&sum, ident);
            let disp = fine.integral(dd.iter().map(|v| -v * v / 48.0));
            match *regime {
                AverageRegime::Kdv { alpha } => disp + fine.integral(ss.iter().map(|v| alpha * v.powi(3) / (6.0 * SQRT_2))),
                AverageRegime::Kp { alpha } => {
                    let tr = fine.real(&diff, d2_over_d1);
                    disp + fine.integral(
                        ss.iter().zip(&tr).map(|(v, w)| alpha * v.powi(3) / (6.0 * SQRT_2) + w * w / 4.0),
                    )
                }
                AverageRegime::Mkdv { beta } => disp + fine.integral(ss.iter().map(|v| beta * v.powi(4) / 16.0)),
                AverageRegime::Nls { .. } => unreachable!(),
            }
        }
    }
}

fn fine_modes(fp: &FieldPair) -> impl Iterator<Item = (i64, i64)> {
    let (n1, n2) = fp.extents();
    (0..n1 * n2).map(move |o| (signed_index(o / n2, n1), signed_index(o % n2, n2)))
}

/// Trapezoid average of the regime's first-order Hamiltonian over one
/// period of the unperturbed flow.
pub fn time_average_f1(fp: &FieldPair, regime: AverageRegime, quad_points: usize) -> Result<f64> {
    check(fp, &regime)?;
    if quad_points == 0 {
        return Err(Error::InvalidParameter("need at least one quadrature point".into()));
    }
    let (n1, n2) = fp.extents();
    let fine = Fine::new(n1, n2);
    let period = match regime {
        AverageRegime::Nls { .. } => 2.0 * PI,
        _ => 2.0,
    };
    let total: f64 = (0..quad_points)
        .map(|q| f1_on_orbit(&fine, fp, &regime, period * q as f64 / quad_points as f64))
        .sum();
    Ok(total / quad_points as f64)
}

/// Closed form of the same average. For `(xi, eta)` the translation average
/// of a product is `int f(y1 - s) g(y1 + s) dy -> 1/2 int dy2 (int f dy1)(int g dy1)`,
/// so cross terms only survive through the line means.
pub fn closed_form_average(fp: &FieldPair, regime: AverageRegime) -> Result<f64> {
    check(fp, &regime)?;
    let (n1, n2) = fp.extents();
    let fine = Fine::new(n1, n2);
    if let AverageRegime::Nls { beta } = regime {
        let psi = fine.eval(fp.a.values(), ident);
        let dpsi = fine.eval(fp.a.values(), d1);
        return Ok(fine.integral(dpsi.iter().zip(&psi).map(|(d, p)| d.norm_sqr() / 2.0 + 3.0 * beta * p.norm_sqr().powi(2) / 8.0)));
    }
    let xi = fine.real(fp.a.values(), ident);
    let eta = fine.real(fp.b.values(), ident);
    let dxi = fine.real(fp.a.values(), d1);
    let deta = fine.real(fp.b.values(), d1);
    let disp = -fine.integral(dxi.iter().zip(&deta).map(|(a, b)| a * a + b * b)) / 48.0;
    let pow = |f: &[f64], p: i32| -> Vec<f64> { f.iter().map(|v| v.powi(p)).collect() };
    let line = |f: &[f64], p: i32| fine.line_integrals(&pow(f, p));
    let full = |f: &[f64], p: i32| fine.integral(f.iter().map(|v| v.powi(p)));
    match regime {
        AverageRegime::Kdv { alpha } | AverageRegime::Kp { alpha } => {
            let cross = fine.line_product(&line(&xi, 2), &line(&eta, 1)) + fine.line_product(&line(&xi, 1), &line(&eta, 2));
            let cubic = full(&xi, 3) + full(&eta, 3) + 1.5 * cross;
            let mut v = disp + alpha * cubic / (6.0 * SQRT_2);
            if matches!(regime, AverageRegime::Kp { .. }) {
                let txi = fine.real(fp.a.values(), d2_over_d1);
                let teta = fine.real(fp.b.values(), d2_over_d1);
                v += fine.integral(txi.iter().zip(&teta).map(|(a, b)| a * a + b * b)) / 4.0;
            }
            Ok(v)
        }
        AverageRegime::Mkdv { beta } => {
            let cross = 4.0 * fine.line_product(&line(&xi, 3), &line(&eta, 1))
                + 6.0 * fine.line_product(&line(&xi, 2), &line(&eta, 2))
                + 4.0 * fine.line_product(&line(&xi, 1), &line(&eta, 3));
            Ok(disp + beta * (full(&xi, 4) + full(&eta, 4) + 0.5 * cross) / 16.0)
        }
        AverageRegime::Nls { .. } => unreachable!(),
    }
}
