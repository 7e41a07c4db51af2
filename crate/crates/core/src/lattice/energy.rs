use serde::{Deserialize, Serialize};

use super::{LatticeParams, LatticeRegime, LatticeState};
use crate::spectral::{apply_delta1, signed_index, wrap_index, Fft2, C64};

/// Normal-mode energies of a lattice state.
///
/// `energies` holds `E_k` on the signed index set in wrap-around order;
/// `specific` holds the folded specific energies on `Z^2_+`, i.e. for
/// `0 <= k1 <= N1`, `0 <= k2 <= N2` the sum of `E / ((N1 + 1/2)(N2 + 1/2))`
/// over the distinct sign variants of `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub big_n1: usize,
    pub big_n2: usize,
    pub t: f64,
    pub energies: Vec<f64>,
    pub specific: Vec<f64>,
}

impl ModeSpectrum {
    pub fn energy(&self, k1: i64, k2: i64) -> f64 {
        let (n1, n2) = (2 * self.big_n1 + 1, 2 * self.big_n2 + 1);
        self.energies[wrap_index(k1, n1) * n2 + wrap_index(k2, n2)]
    }

    /// Folded specific energy at `(|k1|, |k2|)`.
    pub fn specific_at(&self, k1: i64, k2: i64) -> f64 {
        let (a, b) = (k1.unsigned_abs() as usize, k2.unsigned_abs() as usize);
        self.specific[a * (self.big_n2 + 1) + b]
    }

    /// Iterate `(k1, k2, folded specific energy)` over `Z^2_+`.
    pub fn folded(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        let w = self.big_n2 + 1;
        self.specific.iter().enumerate().map(move |(o, &e)| ((o / w) as i64, (o % w) as i64, e))
    }

    pub fn total_specific(&self) -> f64 {
        self.specific.iter().sum()
    }
}

/// `E_k = (omega_k^2 |P^_k|^2 + |Q^_k|^2) / 2` (ETL) or
/// `(|P^_k|^2 + omega_k^2 |Q^_k|^2) / 2` (KG).
pub fn mode_energies(state: &LatticeState, params: &LatticeParams) -> ModeSpectrum {
    let (n1, n2) = state.extents();
    let fft = Fft2::new(n1, n2);
    let mut qh: Vec<C64> = state.q.iter().map(|&v| C64::new(v, 0.0)).collect();
    let mut ph: Vec<C64> = state.p.iter().map(|&v| C64::new(v, 0.0)).collect();
    fft.forward(&mut qh);
    fft.forward(&mut ph);
    let inv_n = 1.0 / (n1 * n2) as f64;
    let mut energies = vec![0.0; n1 * n2];
    for (o, e) in energies.iter_mut().enumerate() {
        let w2 = params.omega_sq(signed_index(o / n2, n1), signed_index(o % n2, n2));
        let (a, b) = (qh[o].norm_sqr() * inv_n, ph[o].norm_sqr() * inv_n);
        *e = match params.regime {
            LatticeRegime::Etl => 0.5 * (w2 * b + a),
            LatticeRegime::Kg => 0.5 * (b + w2 * a),
        };
    }
    let (b1, b2) = (params.big_n1, params.big_n2);
    let scale = 1.0 / params.specific_scale();
    let mut specific = vec![0.0; (b1 + 1) * (b2 + 1)];
    for (o, &e) in energies.iter().enumerate() {
        let k1 = signed_index(o / n2, n1).unsigned_abs() as usize;
        let k2 = signed_index(o % n2, n2).unsigned_abs() as usize;
        specific[k1 * (b2 + 1) + k2] += e * scale;
    }
    ModeSpectrum { big_n1: b1, big_n2: b2, t: state.t, energies, specific }
}

/// Quadratic part of the Hamiltonian, evaluated in physical space.
pub fn quadratic_energy(state: &LatticeState, params: &LatticeParams) -> f64 {
    energy_parts(state, params).0
}

/// The lattice Hamiltonian, evaluated in physical space.
pub fn total_energy(state: &LatticeState, params: &LatticeParams) -> f64 {
    let (h2, h3) = energy_parts(state, params);
    h2 + h3
}

fn energy_parts(state: &LatticeState, params: &LatticeParams) -> (f64, f64) {
    let (n1, n2) = state.extents();
    let mut lap = vec![0.0; n1 * n2];
    let (a, b) = (params.alpha, params.beta);
    let mut quad = 0.0;
    let mut rest = 0.0;
    match params.regime {
        LatticeRegime::Etl => {
            apply_delta1(n1, n2, &state.p, &mut lap);
            for ((&q, &p), &l) in state.q.iter().zip(&state.p).zip(&lap) {
                quad += 0.5 * (q * q - p * l);
                let q3 = q * q * q;
                rest += a * q3 / 3.0 + b * q3 * q / 4.0;
            }
        }
        LatticeRegime::Kg => {
            apply_delta1(n1, n2, &state.q, &mut lap);
            let m2 = params.m * params.m;
            for ((&q, &p), &l) in state.q.iter().zip(&state.p).zip(&lap) {
                quad += 0.5 * (p * p - q * l + m2 * q * q);
                rest += b * q * q * q * q / 4.0;
            }
        }
    }
    (quad, rest)
}
