//! Trade-off curves between communication DMMSE and radar CRB, their convex
//! hulls, and the weighted and constrained design problems.

mod curve;
mod hull;
mod solve;

pub use curve::{compare_vp_count_vs_crb, evaluate_point, tradeoff_curve, ParamRule, TradeoffPoint, VpComparison};
pub use hull::{convex_hull, Hull, Normalization, HULL_TOLERANCE};
pub use solve::{
    solve_crb_constrained, solve_dmmse_constrained, solve_weighted, CrbConstraint, DesignSolution, DmmseConstraint, Mixture,
    ProblemKind,
};

use crate::error::{JcrError, Result};
use crate::scene::{
    comm_channel_eigenvalues, comm_pathloss, db_to_linear, thermal_noise_power, CommLink, EigenvalueMode, RadarScene, Target,
    SPEED_OF_LIGHT,
};
use crate::waveform::{FrameTiming, SlotGrid};

/// Physical description of a joint radar/communication scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub carrier_hz: f64,
    pub sample_rate_hz: f64,
    pub cpi_s: f64,
    pub preamble_symbols: usize,
    pub ifs_s: f64,
    /// Largest unambiguous speed; sets `T_D = lambda / (4 v_max)`.
    pub max_velocity: f64,
    /// Explicit `T_D`, overriding the one implied by `max_velocity`.
    pub slot_interval: Option<f64>,
    /// Longest allowed schedule span in seconds.
    pub aperture_limit_s: f64,
    pub targets: usize,
    /// Explicit target velocities; when empty, `targets` values are spaced
    /// evenly over `[velocity_min, velocity_max]`.
    pub velocities: Vec<f64>,
    pub velocity_min: f64,
    pub velocity_max: f64,
    pub target_distance: f64,
    pub rcs_dbsm: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub symbol_energy: f64,
    /// Post-correlation amplitude gain; `sqrt(P)` when absent.
    pub correlation_gain: Option<f64>,
    /// Noise power in watts; thermal noise over the sample rate when absent.
    pub noise_power: Option<f64>,
    pub noise_figure_db: f64,
    pub temperature_k: f64,
    pub comm_distance: f64,
    pub pathloss_exponent: f64,
    pub comm_taps: usize,
    pub comm_tap_decay_db: f64,
    /// Extra receive gain of the communication link.
    pub comm_array_gain_db: f64,
    pub block_size: usize,
    pub eigenvalue_mode: EigenvalueMode,
    pub channel_seed: u64,
    /// Snapshots behind the CRB.
    pub crb_snapshots: usize,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            carrier_hz: 60e9,
            sample_rate_hz: 1.76e9,
            cpi_s: 1e-3,
            preamble_symbols: 3328,
            ifs_s: 1.5e-6,
            max_velocity: 50.0,
            slot_interval: None,
            aperture_limit_s: f64::INFINITY,
            targets: 1,
            velocities: Vec::new(),
            velocity_min: -45.0,
            velocity_max: 50.0,
            target_distance: 100.0,
            rcs_dbsm: 10.0,
            tx_gain_db: 0.0,
            rx_gain_db: 0.0,
            symbol_energy: 6.7,
            correlation_gain: None,
            noise_power: None,
            noise_figure_db: 6.0,
            temperature_k: 290.0,
            comm_distance: 50.0,
            pathloss_exponent: 2.0,
            comm_taps: 4,
            comm_tap_decay_db: 3.0,
            comm_array_gain_db: 20.2,
            block_size: 512,
            eigenvalue_mode: EigenvalueMode::Expected,
            channel_seed: 0,
            crb_snapshots: 1,
        }
    }
}

/// `n` evenly spaced values from `a` to `b`; a single value is `a`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl ScenarioParams {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn slot_interval(&self) -> f64 {
        self.slot_interval.unwrap_or_else(|| self.wavelength() / (4.0 * self.max_velocity))
    }

    pub fn target_velocities(&self) -> Vec<f64> {
        if self.velocities.is_empty() {
            linspace(self.velocity_min, self.velocity_max, self.targets)
        } else {
            self.velocities.clone()
        }
    }

    pub fn build(&self) -> Result<Scenario> {
        let positive = [
            ("carrier_hz", self.carrier_hz),
            ("sample_rate_hz", self.sample_rate_hz),
            ("cpi_s", self.cpi_s),
            ("max_velocity", self.max_velocity),
            ("aperture_limit_s", self.aperture_limit_s),
            ("target_distance", self.target_distance),
            ("comm_distance", self.comm_distance),
            ("symbol_energy", self.symbol_energy),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(JcrError::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(td) = self.slot_interval {
            if !(td > 0.0) {
                return Err(JcrError::InvalidArgument(format!("slot_interval must be positive, got {td}")));
            }
        }
        if self.preamble_symbols == 0 || !(self.ifs_s >= 0.0) {
            return Err(JcrError::InvalidArgument("preamble_symbols must be >= 1 and ifs_s >= 0".into()));
        }
        if self.crb_snapshots == 0 {
            return Err(JcrError::InvalidArgument("crb_snapshots must be >= 1".into()));
        }
        let wavelength = self.wavelength();
        let (tx_gain, rx_gain) = (db_to_linear(self.tx_gain_db), db_to_linear(self.rx_gain_db));
        let noise_power = self
            .noise_power
            .unwrap_or_else(|| thermal_noise_power(self.sample_rate_hz, self.noise_figure_db, self.temperature_k));
        let scene = RadarScene {
            wavelength,
            tx_gain,
            rx_gain,
            symbol_energy: self.symbol_energy,
            correlation_gain: self.correlation_gain.unwrap_or((self.preamble_symbols as f64).sqrt()),
            noise_power,
            targets: self
                .target_velocities()
                .into_iter()
                .map(|v| Target::new(self.target_distance, v, self.rcs_dbsm))
                .collect(),
        };
        scene.validate()?;
        let comm = CommLink::exponential(self.comm_distance, self.pathloss_exponent, self.comm_taps, self.comm_tap_decay_db)?;
        let comm_snr = self.symbol_energy * comm_pathloss(&comm, wavelength, tx_gain, rx_gain)
            * db_to_linear(self.comm_array_gain_db)
            / noise_power;
        let comm_eigenvalues = comm_channel_eigenvalues(&comm, self.block_size, self.eigenvalue_mode, self.channel_seed)?;
        let slot_interval = self.slot_interval();
        Ok(Scenario {
            scene,
            comm,
            comm_snr,
            comm_eigenvalues,
            timing: FrameTiming {
                preamble_symbols: self.preamble_symbols,
                symbol_period: 1.0 / self.sample_rate_hz,
                ifs: self.ifs_s,
                cpi: self.cpi_s,
            },
            grid: SlotGrid::new(slot_interval, self.aperture_limit_s),
            crb_snapshots: self.crb_snapshots,
        })
    }
}

/// Everything needed to evaluate one design point.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub scene: RadarScene,
    pub comm: CommLink,
    /// Communication SNR `zeta_c` (linear).
    pub comm_snr: f64,
    pub comm_eigenvalues: Vec<f64>,
    pub timing: FrameTiming,
    pub grid: SlotGrid,
    pub crb_snapshots: usize,
}
