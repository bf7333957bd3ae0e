//! Targets, link budgets, and channel-domain snapshot synthesis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{JcrError, Result};
use crate::linalg::{CMatrix, CVector};
use crate::rng;
use crate::waveform::PreambleSchedule;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Thermal noise power `k T0 W F` in watts.
pub fn thermal_noise_power(bandwidth_hz: f64, noise_figure_db: f64, temperature_k: f64) -> f64 {
    BOLTZMANN * temperature_k * bandwidth_hz * db_to_linear(noise_figure_db)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    /// Range in meters.
    pub distance: f64,
    /// Radial velocity in m/s.
    pub velocity: f64,
    /// Radar cross-section in m².
    pub rcs: f64,
}

impl Target {
    pub fn new(distance: f64, velocity: f64, rcs_dbsm: f64) -> Self {
        Self { distance, velocity, rcs: db_to_linear(rcs_dbsm) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadarScene {
    pub wavelength: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
    pub symbol_energy: f64,
    /// Post-correlation amplitude gain `gamma`.
    pub correlation_gain: f64,
    pub noise_power: f64,
    pub targets: Vec<Target>,
}

impl RadarScene {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(JcrError::InvalidScene(msg));
        if !(self.wavelength > 0.0) {
            return bad(format!("wavelength must be positive, got {}", self.wavelength));
        }
        if !(self.noise_power > 0.0) {
            return bad(format!("noise power must be positive, got {}", self.noise_power));
        }
        if !(self.correlation_gain >= 1.0) {
            return bad(format!("correlation gain must be >= 1, got {}", self.correlation_gain));
        }
        if !(self.tx_gain > 0.0 && self.rx_gain > 0.0 && self.symbol_energy > 0.0) {
            return bad("antenna gains and symbol energy must be positive".into());
        }
        for (i, t) in self.targets.iter().enumerate() {
            if !(t.distance > 0.0) || !(t.rcs > 0.0) || !t.velocity.is_finite() {
                return bad(format!("target {i} needs positive distance and RCS and a finite velocity"));
            }
            if self.targets[..i].iter().any(|o| o.velocity == t.velocity) {
                return bad(format!("target {i} repeats velocity {}", t.velocity));
            }
        }
        Ok(())
    }

    pub fn velocities(&self) -> Vec<f64> {
        self.targets.iter().map(|t| t.velocity).collect()
    }

    /// Largest unambiguous speed `lambda / (4 T_D)`.
    pub fn max_velocity(&self, slot_interval: f64) -> f64 {
        self.wavelength / (4.0 * slot_interval)
    }

    /// Fails with `VelocityAliased` if a target lies outside `+/- lambda / (4 T_D)`.
    pub fn check_unambiguous(&self, slot_interval: f64) -> Result<()> {
        let limit = self.max_velocity(slot_interval);
        for t in &self.targets {
            if t.velocity.abs() > limit * (1.0 + 1e-12) {
                return Err(JcrError::VelocityAliased { velocity_mps: t.velocity, limit_mps: limit });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommLink {
    pub distance: f64,
    pub pathloss_exponent: f64,
    /// Normalized power-delay profile.
    pub tap_powers: Vec<f64>,
}

impl CommLink {
    /// Exponential power-delay profile with `taps` taps decaying by `decay_db` per tap.
    pub fn exponential(distance: f64, pathloss_exponent: f64, taps: usize, decay_db: f64) -> Result<Self> {
        if taps == 0 {
            return Err(JcrError::InvalidScene("comm link needs at least one tap".into()));
        }
        let raw: Vec<f64> = (0..taps).map(|l| db_to_linear(-decay_db * l as f64)).collect();
        let total: f64 = raw.iter().sum();
        let link = Self { distance, pathloss_exponent, tap_powers: raw.into_iter().map(|p| p / total).collect() };
        link.validate()?;
        Ok(link)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance > 0.0) {
            return Err(JcrError::InvalidScene(format!("comm distance must be positive, got {}", self.distance)));
        }
        if self.tap_powers.is_empty() || self.tap_powers.iter().any(|&p| !(p >= 0.0)) {
            return Err(JcrError::InvalidScene("tap powers must be non-negative".into()));
        }
        let sum: f64 = self.tap_powers.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(JcrError::InvalidScene(format!("tap powers sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

/// `G_c = G_TX G_RX lambda² / ((4 pi)² rho_c^PL)`.
pub fn comm_pathloss(link: &CommLink, wavelength: f64, tx_gain: f64, rx_gain: f64) -> f64 {
    tx_gain * rx_gain * wavelength.powi(2) / ((4.0 * PI).powi(2) * link.distance.powf(link.pathloss_exponent))
}

/// Mean two-way gain `G_TX G_RX lambda² sigma / (64 pi³ rho⁴)`.
pub fn radar_two_way_gain(target: &Target, wavelength: f64, tx_gain: f64, rx_gain: f64) -> f64 {
    tx_gain * rx_gain * wavelength.powi(2) * target.rcs / (64.0 * PI.powi(3) * target.distance.powi(4))
}

/// Per-target powers `p_k = gamma² Es G_k` and SNRs `p_k / sigma²`.
pub fn target_powers_and_snr(scene: &RadarScene) -> (Vec<f64>, Vec<f64>) {
    let powers: Vec<f64> = scene
        .targets
        .iter()
        .map(|t| {
            scene.correlation_gain.powi(2)
                * scene.symbol_energy
                * radar_two_way_gain(t, scene.wavelength, scene.tx_gain, scene.rx_gain)
        })
        .collect();
    let snr = powers.iter().map(|p| p / scene.noise_power).collect();
    (powers, snr)
}

/// Discrete Doppler frequency `u = 2 v T_D / lambda`.
pub fn doppler_frequency(velocity: f64, wavelength: f64, slot_interval: f64) -> f64 {
    2.0 * velocity * slot_interval / wavelength
}

/// Independent channel snapshots on one schedule.
#[derive(Debug, Clone)]
pub struct SnapshotSet {
    pub snapshots: Vec<CVector>,
    pub seed: u64,
}

impl SnapshotSet {
    pub fn count(&self) -> usize {
        self.snapshots.len()
    }
}

/// Draws `eta` snapshots `h_m = sum_k b_k exp(-j 2 pi u_k q_m) + w_m`.
///
/// Snapshot `i` uses the random stream `(seed, i)`, drawing all `b_k` first
/// and then the noise.
pub fn synth_snapshots(schedule: &PreambleSchedule, scene: &RadarScene, eta: usize, seed: u64) -> Result<SnapshotSet> {
    if eta == 0 {
        return Err(JcrError::InvalidArgument("snapshot count must be at least 1".into()));
    }
    scene.validate()?;
    scene.check_unambiguous(schedule.slot_interval())?;
    let (powers, _) = target_powers_and_snr(scene);
    let steering = steering_matrix(schedule, scene);
    let m = schedule.len();
    let snapshots = (0..eta)
        .map(|i| {
            let mut rng = rng::stream(seed, &[i as u64]);
            let b: Vec<Complex64> = powers.iter().map(|&p| rng::complex_normal(&mut rng, p)).collect();
            CVector::from_fn(m, |r, _| {
                let signal: Complex64 = b.iter().enumerate().map(|(k, bk)| bk * steering[(r, k)]).sum();
                signal + rng::complex_normal(&mut rng, scene.noise_power)
            })
        })
        .collect();
    Ok(SnapshotSet { snapshots, seed })
}

fn steering_matrix(schedule: &PreambleSchedule, scene: &RadarScene) -> CMatrix {
    let u: Vec<f64> = scene
        .targets
        .iter()
        .map(|t| doppler_frequency(t.velocity, scene.wavelength, schedule.slot_interval()))
        .collect();
    let q = schedule.positions();
    CMatrix::from_fn(q.len(), u.len(), |r, k| Complex64::from_polar(1.0, -2.0 * PI * u[k] * q[r] as f64))
}

/// `(1/eta) sum h h^H`, Hermitian with a real diagonal by construction.
pub fn sample_covariance(ss: &SnapshotSet) -> CMatrix {
    let m = ss.snapshots.first().map_or(0, |h| h.len());
    let mut r = CMatrix::zeros(m, m);
    for h in &ss.snapshots {
        for j in 0..m {
            for i in 0..=j {
                r[(i, j)] += h[i] * h[j].conj();
            }
        }
    }
    let scale = 1.0 / ss.count().max(1) as f64;
    for j in 0..m {
        r[(j, j)] = Complex64::new(r[(j, j)].re * scale, 0.0);
        for i in 0..j {
            let v = r[(i, j)] * scale;
            r[(i, j)] = v;
            r[(j, i)] = v.conj();
        }
    }
    r
}

/// How comm channel eigenvalues are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenvalueMode {
    /// Flat profile `lambda_c[n] = 1` (the channel average).
    Expected,
    /// `|DFT_N(alpha)|²` for one Rayleigh tap draw.
    Realization,
}

/// Circulant-approximation eigenvalues of the `N`-block comm channel.
pub fn comm_channel_eigenvalues(link: &CommLink, n: usize, mode: EigenvalueMode, seed: u64) -> Result<Vec<f64>> {
    link.validate()?;
    if n < link.tap_powers.len() {
        return Err(JcrError::InvalidArgument(format!(
            "block size {n} is shorter than the {} channel taps",
            link.tap_powers.len()
        )));
    }
    match mode {
        EigenvalueMode::Expected => Ok(vec![1.0; n]),
        EigenvalueMode::Realization => {
            let mut rng = rng::stream(seed, &[]);
            let taps: Vec<Complex64> = link.tap_powers.iter().map(|&p| rng::complex_normal(&mut rng, p)).collect();
            Ok(tap_spectrum(&taps, n))
        }
    }
}

/// `|N-point DFT of taps|²`.
pub fn tap_spectrum(taps: &[Complex64], n: usize) -> Vec<f64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[..taps.len()].copy_from_slice(taps);
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().map(|z| z.norm_sqr()).collect()
}
