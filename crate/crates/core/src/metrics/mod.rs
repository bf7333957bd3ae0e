//! Radar CRB and communication DMMSE metrics.

mod comm;
mod crb;

pub use comm::{dmmse_scalar, spectral_efficiency, waterfill, CommMetrics, WaterFill};
pub use crb::{
    check_identifiable, crb_from_model, crb_oracle_from_model, crb_oracle_slepian_bangs, crb_velocity, radar_scalar,
    CrbResult, RadarMetrics, SINGULARITY_THRESHOLD,
};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::linalg::CMatrix;
use crate::scene::doppler_frequency;

/// Doppler steering matrix `D` and its velocity derivative.
#[derive(Debug, Clone)]
pub struct DopplerModel {
    /// `D[m, k] = exp(-j 2 pi u_k q_m)`.
    pub d: CMatrix,
    /// `dD/dv_k`, i.e. `D[m, k] * (-j 4 pi T_D q_m / lambda)`.
    pub d_dot: CMatrix,
    pub u: Vec<f64>,
}

impl DopplerModel {
    pub fn new(positions: &[usize], velocities: &[f64], wavelength: f64, slot_interval: f64) -> Self {
        let u: Vec<f64> = velocities.iter().map(|&v| doppler_frequency(v, wavelength, slot_interval)).collect();
        let (m, k) = (positions.len(), velocities.len());
        let d = CMatrix::from_fn(m, k, |r, c| Complex64::from_polar(1.0, -2.0 * PI * u[c] * positions[r] as f64));
        let d_dot = CMatrix::from_fn(m, k, |r, c| {
            d[(r, c)] * Complex64::new(0.0, -4.0 * PI * slot_interval * positions[r] as f64 / wavelength)
        });
        Self { d, d_dot, u }
    }

    pub fn elements(&self) -> usize {
        self.d.nrows()
    }

    pub fn targets(&self) -> usize {
        self.d.ncols()
    }
}

/// `R = D diag(p) D^H + sigma² I`.
pub fn model_covariance(model: &DopplerModel, powers: &[f64], noise_power: f64) -> CMatrix {
    let m = model.elements();
    let mut r = CMatrix::from_diagonal_element(m, m, Complex64::new(noise_power, 0.0));
    for (k, &p) in powers.iter().enumerate() {
        let d = model.d.column(k);
        r += (&d * d.adjoint()) * Complex64::new(p, 0.0);
    }
    r
}
