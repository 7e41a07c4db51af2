use serde::{Deserialize, Serialize};

use super::{LatticeParams, LatticeRegime, LatticeState};
use crate::error::{Error, Result};

/// Symmetric compositions of the Stormer-Verlet step. All are symplectic
/// and time reversible; they differ in order and cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Plain Stormer-Verlet, order 2.
    Leapfrog,
    /// Triple jump, order 4.
    Yoshida4,
    /// Five-stage Suzuki fractal, order 4 with a small error constant.
    Suzuki4,
    /// Nine-stage Kahan-Li composition, order 6.
    KahanLi6,
}

impl Integrator {
    pub fn weights(self) -> Vec<f64> {
        match self {
            Integrator::Leapfrog => vec![1.0],
            Integrator::Yoshida4 => {
                let c = 2f64.powf(1.0 / 3.0);
                let w1 = 1.0 / (2.0 - c);
                vec![w1, 1.0 - 2.0 * w1, w1]
            }
            Integrator::Suzuki4 => {
                let p = 1.0 / (4.0 - 4f64.powf(1.0 / 3.0));
                vec![p, p, 1.0 - 4.0 * p, p, p]
            }
            Integrator::KahanLi6 => {
                let g = [
                    0.392_161_444_007_314_139_28,
                    0.332_599_136_789_359_438_60,
                    -0.706_246_172_557_639_359_81,
                    0.082_213_596_293_550_800_230,
                ];
                let mid = 1.0 - 2.0 * g.iter().sum::<f64>();
                vec![g[0], g[1], g[2], g[3], mid, g[3], g[2], g[1], g[0]]
            }
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Integrator::Leapfrog => 2,
            Integrator::Yoshida4 | Integrator::Suzuki4 => 4,
            Integrator::KahanLi6 => 6,
        }
    }
}

/// Reusable stepper for one lattice.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: LatticeParams,
    integrator: Integrator,
    weights: Vec<f64>,
}

impl Stepper {
    pub fn new(params: LatticeParams, integrator: Integrator) -> Self {
        Self { params, integrator, weights: integrator.weights() }
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
    }

    /// One composed step of size `dt` (negative `dt` runs backwards).
    pub fn step(&self, s: &mut LatticeState, dt: f64) -> Result<()> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::InvalidParameter(format!("step size must be finite and nonzero, got {dt}")));
        }
        s.check(&self.params)?;
        // The pointwise update is the outer (split) one, the stencil update the
        // inner one, so each stage costs a single stencil sweep.
        let w = &self.weights;
        let mut carry = 0.5 * w[0] * dt;
        for (i, &wi) in w.iter().enumerate() {
            self.outer(s, carry);
            self.inner(s, wi * dt);
            carry = 0.5 * (wi + w.get(i + 1).copied().unwrap_or(0.0)) * dt;
        }
        self.outer(s, carry);
        s.t += dt;
        // Non-finite values reach the first row within N1 steps through the
        // stencil, so probing it is enough to catch a blow-up.
        let n2 = s.extents().1;
        if !s.q[..n2].iter().chain(&s.p[..n2]).all(|v| v.is_finite()) {
            return Err(Error::Blowup { t: s.t });
        }
        Ok(())
    }

    /// `steps` steps of size `dt`.
    pub fn advance(&self, s: &mut LatticeState, dt: f64, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step(s, dt)?;
        }
        Ok(())
    }

    /// Advance to `t_end` with equal steps no longer than `dt_max`.
    pub fn advance_to(&self, s: &mut LatticeState, t_end: f64, dt_max: f64) -> Result<()> {
        let span = t_end - s.t;
        if span <= 0.0 {
            return Ok(());
        }
        let n = (span / dt_max - 1e-9).ceil().max(1.0) as usize;
        let t0 = s.t;
        let h = span / n as f64;
        for i in 0..n {
            self.step(s, h)?;
            s.t = t0 + (i + 1) as f64 * h;
        }
        s.t = t_end;
        Ok(())
    }

    /// Pointwise half of the splitting.
    fn outer(&self, s: &mut LatticeState, h: f64) {
        let p = &self.params;
        match p.regime {
            LatticeRegime::Etl => {
                let (a, b) = (p.alpha, p.beta);
                for (pv, &q) in s.p.iter_mut().zip(&s.q) {
                    *pv -= h * (q + q * q * (a + b * q));
                }
            }
            LatticeRegime::Kg => {
                for (qv, &pv) in s.q.iter_mut().zip(&s.p) {
                    *qv += h * pv;
                }
            }
        }
    }

    /// Stencil half of the splitting.
    fn inner(&self, s: &mut LatticeState, h: f64) {
        let (n1, n2) = s.extents();
        let p = &self.params;
        match p.regime {
            // Q -= h Delta_1 P
            LatticeRegime::Etl => stencil_update(n1, n2, &s.p, &mut s.q, |lap, _| -h * lap),
            // P += h (Delta_1 Q - m^2 Q - beta Q^3)
            LatticeRegime::Kg => {
                let (m2, b) = (p.m * p.m, p.beta);
                stencil_update(n1, n2, &s.q, &mut s.p, |lap, q| h * (lap - q * (m2 + b * q * q)))
            }
        }
    }
}

/// `dst[j] += f((Delta_1 src)_j, src_j)`, row by row.
#[inline]
fn stencil_update(n1: usize, n2: usize, src: &[f64], dst: &mut [f64], f: impl Fn(f64, f64) -> f64) {
    for i1 in 0..n1 {
        let up = &src[((i1 + n1 - 1) % n1) * n2..][..n2];
        let dn = &src[((i1 + 1) % n1) * n2..][..n2];
        let row = &src[i1 * n2..][..n2];
        let out = &mut dst[i1 * n2..][..n2];
        if n2 == 1 {
            out[0] += f(up[0] + dn[0] - 2.0 * row[0], row[0]);
            continue;
        }
        out[0] += f(up[0] + dn[0] + row[n2 - 1] + row[1] - 4.0 * row[0], row[0]);
        let inner = up[1..n2 - 1].iter().zip(&dn[1..n2 - 1]).zip(row.windows(3));
        for (o, ((&u, &d), w)) in out[1..n2 - 1].iter_mut().zip(inner) {
            *o += f(u + d + w[0] + w[2] - 4.0 * w[1], w[1]);
        }
        let l = n2 - 1;
        out[l] += f(up[l] + dn[l] + row[l - 1] + row[0] - 4.0 * row[l], row[l]);
    }
}

/// One Stormer-Verlet step; `dt < 0` undoes a step of `-dt`.
pub fn step_leapfrog(state: &LatticeState, params: &LatticeParams, dt: f64) -> Result<LatticeState> {
    let mut s = state.clone();
    Stepper::new(*params, Integrator::Leapfrog).step(&mut s, dt)?;
    Ok(s)
}
