use std::f64::consts::{PI, SQRT_2};

use super::{conj_field, FieldPair, PairKind};
use crate::error::{Error, Result};
use crate::spectral::{signed_index, Fft2, C64};

/// `xi_tau = -c_t d1 xi - c_d d1^3 xi - c_p d1^{-1} d2^2 xi - c_q d1(xi^2)
///          - c_c d1(xi^3) - (c_m [eta^2] + c_l <eta^2>) d1 xi`
/// and the mirror equation for `eta` with every sign flipped and the roles
/// of `xi`, `eta` exchanged in the mean terms. `[f] = int_I f dy / 4` is the
/// mean over the torus, `<f>(y2) = int f dy1 / 2` the mean over a line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiEtaFlow {
    pub transport: f64,
    pub dispersion: f64,
    pub transverse: f64,
    pub quadratic: f64,
    pub cubic: f64,
    pub mean_coupling: f64,
    pub line_coupling: f64,
    /// Dealias in `y2` as well; off for the line-by-line systems.
    pub two_dimensional: bool,
}

impl XiEtaFlow {
    pub fn kdv(mu: f64, alpha: f64) -> Self {
        Self {
            transport: 1.0,
            dispersion: mu * mu / 24.0,
            transverse: 0.0,
            quadratic: alpha * mu * mu / (2.0 * SQRT_2),
            cubic: 0.0,
            mean_coupling: 0.0,
            line_coupling: 0.0,
            two_dimensional: false,
        }
    }

    pub fn kp(mu: f64, alpha: f64) -> Self {
        Self { transverse: mu * mu / 2.0, two_dimensional: true, ..Self::kdv(mu, alpha) }
    }

    pub fn mkdv(mu: f64, beta: f64) -> Self {
        Self {
            transport: 1.0,
            dispersion: mu * mu / 24.0,
            transverse: 0.0,
            quadratic: 0.0,
            cubic: mu * mu * beta / 4.0,
            mean_coupling: 0.75,
            line_coupling: 0.0,
            two_dimensional: false,
        }
    }

    /// Same flow seen from the frame moving with the transport.
    pub fn comoving(self) -> Self {
        Self { transport: 0.0, ..self }
    }
}

/// `-i psi_tau = r psi - D lap psi + G |psi|^2 psi`, with `lap = d1^2` on
/// each line or the full 2D Laplacian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlsFlow {
    pub rotation: f64,
    pub dispersion: f64,
    pub nonlinear: f64,
    pub two_dimensional: bool,
}

impl NlsFlow {
    pub fn nls1d(mu: f64, beta: f64) -> Self {
        Self { rotation: 1.0, dispersion: mu * mu, nonlinear: 0.75 * beta * mu * mu, two_dimensional: false }
    }

    pub fn nls2d(mu: f64, beta: f64) -> Self {
        Self { two_dimensional: true, ..Self::nls1d(mu, beta) }
    }

    /// Envelope equation with the unit rotation removed.
    pub fn envelope(self) -> Self {
        Self { rotation: 0.0, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Flow {
    XiEta(XiEtaFlow),
    Nls(NlsFlow),
}

impl Flow {
    fn kind(&self) -> PairKind {
        match self {
            Flow::XiEta(_) => PairKind::XiEta,
            Flow::Nls(_) => PairKind::Psi,
        }
    }
}

/// Integrating-factor RK4 (Lawson) solver: the diagonal linear part is
/// propagated exactly, the nonlinearity by classical RK4, pseudospectrally
/// with 2/3 (quadratic) or 1/2 (cubic) dealiasing.
pub struct NormalFormSolver {
    flow: Flow,
    n1: usize,
    n2: usize,
    fft: Fft2,
    lin: Vec<C64>,
    /// `i pi h1` per mode
    d1: Vec<C64>,
    mask: Vec<bool>,
    /// retained `|h1|` bound, for the stability estimate
    band1: f64,
    half_step: Option<(f64, Vec<C64>, Vec<C64>)>,
}

impl std::fmt::Debug for NormalFormSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NormalFormSolver").field("flow", &self.flow).field("n1", &self.n1).field("n2", &self.n2).finish()
    }
}

impl NormalFormSolver {
    pub fn new(flow: Flow, n1: usize, n2: usize) -> Self {
        let n = n1 * n2;
        let fields = if flow.kind() == PairKind::XiEta { 2 } else { 1 };
        let mut lin = vec![C64::new(0.0, 0.0); fields * n];
        let mut d1 = vec![C64::new(0.0, 0.0); n];
        let cubic = match flow {
            Flow::XiEta(f) => f.cubic != 0.0,
            Flow::Nls(_) => true,
        };
        let two_d = match flow {
            Flow::XiEta(f) => f.two_dimensional,
            Flow::Nls(f) => f.two_dimensional,
        };
        let band = |n: usize| if cubic { (n - 1) / 4 } else { (n - 1) / 3 } as i64;
        let (b1, b2) = (band(n1), band(n2));
        let mut mask = vec![true; n];
        for o in 0..n {
            let h1 = signed_index(o / n2, n1);
            let h2 = signed_index(o % n2, n2);
            let (x1, x2) = (h1 as f64, h2 as f64);
            d1[o] = C64::new(0.0, PI * x1);
            mask[o] = h1.abs() <= b1 && (!two_d || h2.abs() <= b2);
            match flow {
                Flow::XiEta(f) => {
                    let mut w = -f.transport * PI * x1 + f.dispersion * PI.powi(3) * x1.powi(3);
                    if h1 != 0 {
                        w -= f.transverse * PI * x2 * x2 / x1;
                    }
                    lin[o] = C64::new(0.0, w);
                    lin[n + o] = C64::new(0.0, -w);
                }
                Flow::Nls(f) => {
                    let k2 = if f.two_dimensional { x1 * x1 + x2 * x2 } else { x1 * x1 };
                    lin[o] = C64::new(0.0, f.rotation + f.dispersion * PI * PI * k2);
                }
            }
        }
        Self { flow, n1, n2, fft: Fft2::new(n1, n2), lin, d1, mask, band1: b1 as f64, half_step: None }
    }

    pub fn flow(&self) -> Flow {
        self.flow
    }

    fn exponentials(&mut self, dt: f64) -> (Vec<C64>, Vec<C64>) {
        match &self.half_step {
            Some((h, e, e2)) if *h == dt => (e.clone(), e2.clone()),
            _ => {
                let e: Vec<C64> = self.lin.iter().map(|l| (l * (0.5 * dt)).exp()).collect();
                let e2: Vec<C64> = e.iter().map(|x| x * x).collect();
                self.half_step = Some((dt, e.clone(), e2.clone()));
                (e, e2)
            }
        }
    }

    fn check_pair(&self, fp: &FieldPair) -> Result<()> {
        if fp.kind != self.flow.kind() {
            return Err(Error::Config(format!("flow expects a {:?} pair, got {:?}", self.flow.kind(), fp.kind)));
        }
        if fp.extents() != (self.n1, self.n2) {
            return Err(Error::Config(format!("solver grid {}x{} vs pair {:?}", self.n1, self.n2, fp.extents())));
        }
        Ok(())
    }

    /// One Lawson RK4 step of size `dt`.
    pub fn step(&mut self, fp: &FieldPair, dt: f64) -> Result<FieldPair> {
        self.check_pair(fp)?;
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::InvalidParameter(format!("step size must be finite and nonzero, got {dt}")));
        }
        let mut u: Vec<C64> = fp.a.values().to_vec();
        if fp.kind == PairKind::XiEta {
            u.extend_from_slice(fp.b.values());
        }
        let (e, e2) = self.exponentials(dt);
        let (k1, rate) = self.nonlinear(&u);
        if dt.abs() * rate > 2.5 {
            return Err(Error::Stability { dt, limit: 2.5 / rate });
        }
        let h = 0.5 * dt;
        let u2: Vec<C64> = (0..u.len()).map(|i| e[i] * (u[i] + k1[i] * h)).collect();
        let (k2, _) = self.nonlinear(&u2);
        let u3: Vec<C64> = (0..u.len()).map(|i| e[i] * u[i] + k2[i] * h).collect();
        let (k3, _) = self.nonlinear(&u3);
        let u4: Vec<C64> = (0..u.len()).map(|i| e2[i] * u[i] + e[i] * k3[i] * dt).collect();
        let (k4, _) = self.nonlinear(&u4);
        let s = dt / 6.0;
        let next: Vec<C64> = (0..u.len())
            .map(|i| e2[i] * u[i] + (e2[i] * k1[i] + e[i] * (k2[i] + k3[i]) * 2.0 + k4[i]) * s)
            .collect();
        if next.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Blowup { t: fp.tau + dt });
        }
        let n = self.n1 * self.n2;
        let mut out = fp.clone();
        out.a.values_mut().copy_from_slice(&next[..n]);
        match fp.kind {
            PairKind::XiEta => out.b.values_mut().copy_from_slice(&next[n..]),
            PairKind::Psi => out.b = conj_field(&out.a),
        }
        out.tau = fp.tau + dt;
        Ok(out)
    }

    /// Advance to `tau_end` with equal steps no longer than `dt_max`.
    pub fn advance_to(&mut self, fp: &FieldPair, tau_end: f64, dt_max: f64) -> Result<FieldPair> {
        let span = tau_end - fp.tau;
        let mut cur = fp.clone();
        if span <= 0.0 {
            return Ok(cur);
        }
        let steps = (span / dt_max - 1e-9).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        let t0 = fp.tau;
        for i in 0..steps {
            cur = self.step(&cur, dt)?;
            cur.tau = t0 + (i + 1) as f64 * dt;
        }
        cur.tau = tau_end;
        Ok(cur)
    }

    fn to_physical(&self, spec: &[C64]) -> Vec<C64> {
        let mut v = spec.to_vec();
        self.fft.inverse(&mut v);
        v.iter_mut().for_each(|x| *x *= 0.5);
        v
    }

    fn to_spectral(&self, mut phys: Vec<C64>) -> Vec<C64> {
        self.fft.forward(&mut phys);
        let s = 2.0 / (self.n1 * self.n2) as f64;
        phys.iter_mut().for_each(|x| *x *= s);
        phys
    }

    /// Nonlinear vector field and an estimate of its stiffness.
    fn nonlinear(&self, u: &[C64]) -> (Vec<C64>, f64) {
        let n = self.n1 * self.n2;
        match self.flow {
            Flow::XiEta(f) => {
                let (a, b) = u.split_at(n);
                let mut out = vec![C64::new(0.0, 0.0); 2 * n];
                let mean = |s: &[C64]| s.iter().map(|v| v.norm_sqr()).sum::<f64>() / 4.0;
                let (ma, mb) = (mean(a), mean(b));
                let mut rate: f64 = 0.0;
                for (field, sign, other_mean, dst) in [(a, -1.0, mb, 0), (b, 1.0, ma, n)] {
                    let mut amp: f64 = 0.0;
                    if f.quadratic != 0.0 || f.cubic != 0.0 {
                        let phys = self.to_physical(field);
                        let nl: Vec<C64> = phys
                            .iter()
                            .map(|&x| {
                                amp = amp.max(x.norm());
                                x * x * (f.quadratic + f.cubic * x)
                            })
                            .collect();
                        let spec = self.to_spectral(nl);
                        for o in 0..n {
                            if self.mask[o] {
                                out[dst + o] = self.d1[o] * spec[o] * sign;
                            }
                        }
                    }
                    let mut line_max: f64 = 0.0;
                    if f.line_coupling != 0.0 {
                        let other = if dst == 0 { b } else { a };
                        let op = self.to_physical(other);
                        let mut line = vec![0.0; self.n2];
                        for (o, v) in op.iter().enumerate() {
                            line[o % self.n2] += v.re * v.re / self.n1 as f64;
                        }
                        line_max = line.iter().fold(0.0, |m: f64, v| m.max(*v));
                        let dfield: Vec<C64> = field.iter().zip(&self.d1).map(|(c, d)| c * d).collect();
                        let df = self.to_physical(&dfield);
                        let c = sign * f.line_coupling;
                        let prod: Vec<C64> = df.iter().enumerate().map(|(o, v)| v * (c * line[o % self.n2])).collect();
                        for (o, v) in self.to_spectral(prod).into_iter().enumerate() {
                            out[dst + o] += v;
                        }
                    }
                    if f.mean_coupling != 0.0 {
                        let c = sign * f.mean_coupling * other_mean;
                        for o in 0..n {
                            out[dst + o] += self.d1[o] * field[o] * c;
                        }
                    }
                    rate = rate.max(
                        PI * self.band1
                            * (2.0 * f.quadratic.abs() * amp
                                + 3.0 * f.cubic.abs() * amp * amp
                                + f.mean_coupling.abs() * other_mean
                                + f.line_coupling.abs() * line_max),
                    );
                }
                (out, rate)
            }
            Flow::Nls(f) => {
                let phys = self.to_physical(u);
                let mut amp2: f64 = 0.0;
                let nl: Vec<C64> = phys
                    .iter()
                    .map(|&x| {
                        let m = x.norm_sqr();
                        amp2 = amp2.max(m);
                        x * m
                    })
                    .collect();
                let spec = self.to_spectral(nl);
                let g = C64::new(0.0, f.nonlinear);
                let out = (0..n).map(|o| if self.mask[o] { g * spec[o] } else { C64::new(0.0, 0.0) }).collect();
                (out, 2.0 * f.nonlinear.abs() * amp2)
            }
        }
    }
}

fn step_with(flow: Flow, fp: &FieldPair, dt: f64) -> Result<FieldPair> {
    let (n1, n2) = fp.extents();
    NormalFormSolver::new(flow, n1, n2).step(fp, dt)
}

/// One step of the pair of KdV equations in translating frames.
pub fn kdv_system_step(fp: &FieldPair, mu: f64, alpha: f64, dt: f64) -> Result<FieldPair> {
    step_with(Flow::XiEta(XiEtaFlow::kdv(mu, alpha)), fp, dt)
}

/// One step of the pair of KP-II equations. Modes with `h1 = 0, h2 != 0`
/// must be empty.
pub fn kp2_system_step(fp: &FieldPair, mu: f64, alpha: f64, dt: f64) -> Result<FieldPair> {
    check_kp_constraint(fp)?;
    step_with(Flow::XiEta(XiEtaFlow::kp(mu, alpha)), fp, dt)
}

pub(crate) fn check_kp_constraint(fp: &FieldPair) -> Result<()> {
    let (_, n2) = fp.extents();
    let scale = fp.norm().max(f64::MIN_POSITIVE);
    for f in [&fp.a, &fp.b] {
        for i2 in 1..n2 {
            let v = f.values()[i2].norm();
            if v > 1e-13 * scale {
                return Err(Error::Constraint(format!(
                    "mode (0, {}) is {v:.3e}; d1^-1 needs it to vanish",
                    signed_index(i2, n2)
                )));
            }
        }
    }
    Ok(())
}

/// One step of the pair of mKdV equations coupled through their means.
pub fn mkdv_system_step(fp: &FieldPair, mu: f64, beta: f64, dt: f64) -> Result<FieldPair> {
    step_with(Flow::XiEta(XiEtaFlow::mkdv(mu, beta)), fp, dt)
}

/// One step of `-i psi_tau = psi - mu^2 d1^2 psi + mu^2 (3 beta / 4) |psi|^2 psi`.
pub fn nls1d_step(fp: &FieldPair, mu: f64, beta: f64, dt: f64) -> Result<FieldPair> {
    step_with(Flow::Nls(NlsFlow::nls1d(mu, beta)), fp, dt)
}

/// As [`nls1d_step`] with the full 2D Laplacian.
pub fn nls2d_step(fp: &FieldPair, mu: f64, beta: f64, dt: f64) -> Result<FieldPair> {
    step_with(Flow::Nls(NlsFlow::nls2d(mu, beta)), fp, dt)
}
