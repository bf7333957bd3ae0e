//! MUSIC-type velocity estimators and the Monte Carlo RMSE harness.

mod rmse;

pub use rmse::{circular_error, match_estimates, rmse_study, RmseReport, RmseStudy};

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{JcrError, Result};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::waveform::{difference_cowaveform, PreambleSchedule};

/// Default number of search points over the unambiguous interval.
pub const DEFAULT_GRID_POINTS: usize = 1 << 14;

/// Uniform search grid over discrete Doppler `u` in `[-1/2, 1/2)`, i.e.
/// velocities in `[-v_max, v_max)`.
#[derive(Clone)]
pub struct VelocityGrid {
    points: usize,
    wavelength: f64,
    slot_interval: f64,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for VelocityGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VelocityGrid")
            .field("points", &self.points)
            .field("wavelength", &self.wavelength)
            .field("slot_interval", &self.slot_interval)
            .finish()
    }
}

impl VelocityGrid {
    pub fn new(points: usize, wavelength: f64, slot_interval: f64) -> Result<Self> {
        if points < 8 {
            return Err(JcrError::InvalidArgument(format!("velocity grid needs at least 8 points, got {points}")));
        }
        let fft = FftPlanner::new().plan_fft_forward(points);
        Ok(Self { points, wavelength, slot_interval, fft })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Grid step in discrete Doppler.
    pub fn u_step(&self) -> f64 {
        1.0 / self.points as f64
    }

    /// Grid step in m/s.
    pub fn velocity_step(&self) -> f64 {
        self.velocity_of(self.u_step())
    }

    pub fn max_velocity(&self) -> f64 {
        self.wavelength / (4.0 * self.slot_interval)
    }

    pub fn velocity_of(&self, u: f64) -> f64 {
        u * self.wavelength / (2.0 * self.slot_interval)
    }

    pub fn u_at(&self, index: usize) -> f64 {
        -0.5 + index as f64 / self.points as f64
    }

    /// Velocity at each grid point.
    pub fn velocities(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.velocity_of(self.u_at(i))).collect()
    }

    /// `sum_c |v_c^H d(u_i)|²` for every grid point, where column `v_c` lives
    /// on `positions` and `d(u)_m = exp(-j 2 pi u q_m)`.
    fn projection_power(&self, vectors: &CMatrix, columns: &[usize], positions: &[usize]) -> Vec<f64> {
        let n = self.points;
        let mut out = vec![0.0; n];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for &c in columns {
            buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for (row, &q) in positions.iter().enumerate() {
                // exp(-j 2 pi (-1/2) q) = (-1)^q shifts the DFT origin to u = -1/2.
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                buf[q % n] += vectors[(row, c)].conj() * sign;
            }
            self.fft.process(&mut buf);
            for (o, z) in out.iter_mut().zip(&buf) {
                *o += z.norm_sqr();
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    DirectMusic,
    DaMusic,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::DirectMusic => "direct-music",
            Method::DaMusic => "da-music",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityEstimate {
    /// Estimated velocities in m/s, ascending.
    pub velocities: Vec<f64>,
    pub method: Method,
    /// Pseudo-spectrum `1 / ||E_n^H d||²` on the grid, when retained.
    pub spectrum: Option<Vec<f64>>,
}

/// MUSIC on the physical schedule.
pub fn direct_music(cov: &CMatrix, schedule: &PreambleSchedule, targets: usize, grid: &VelocityGrid) -> Result<VelocityEstimate> {
    let m = schedule.len();
    if cov.nrows() != m || cov.ncols() != m {
        return Err(JcrError::InvalidArgument(format!("covariance is {}x{}, schedule has {m} preambles", cov.nrows(), cov.ncols())));
    }
    if targets >= m {
        return Err(JcrError::TooManyTargets { targets, elements: m });
    }
    music(cov, schedule.positions(), targets, grid, Method::DirectMusic)
}

/// MUSIC on the lag-averaged Toeplitz covariance of the contiguous co-array.
pub fn da_music(cov: &CMatrix, schedule: &PreambleSchedule, targets: usize, grid: &VelocityGrid) -> Result<VelocityEstimate> {
    let extent = difference_cowaveform(schedule.positions()).contiguous_extent;
    if targets > extent {
        return Err(JcrError::CoArrayTooSmall { targets, extent });
    }
    let aug = augmented_covariance(cov, schedule.positions())?;
    let virtual_positions: Vec<usize> = (0..=extent).collect();
    music(&aug, &virtual_positions, targets, grid, Method::DaMusic)
}

/// Hermitian Toeplitz matrix with first column `r[0..=L_c]`, where `r[l]`
/// averages every `cov[p, q]` with `q_p - q_q = l`.
pub fn augmented_covariance(cov: &CMatrix, positions: &[usize]) -> Result<CMatrix> {
    let m = positions.len();
    if cov.nrows() != m || cov.ncols() != m {
        return Err(JcrError::InvalidArgument(format!("covariance is {}x{}, schedule has {m} preambles", cov.nrows(), cov.ncols())));
    }
    let extent = difference_cowaveform(positions).contiguous_extent;
    let (r, _) = lag_averages(cov, positions, extent);
    Ok(CMatrix::from_fn(extent + 1, extent + 1, |i, j| if i >= j { r[i - j] } else { r[j - i].conj() }))
}

/// Per-lag means for lags `0..=extent` and the number of entries behind each.
pub fn lag_averages(cov: &CMatrix, positions: &[usize], extent: usize) -> (Vec<Complex64>, Vec<usize>) {
    let mut sum = vec![Complex64::new(0.0, 0.0); extent + 1];
    let mut count = vec![0usize; extent + 1];
    for (p, &qp) in positions.iter().enumerate() {
        for (q, &qq) in positions.iter().enumerate() {
            if qp >= qq && qp - qq <= extent {
                sum[qp - qq] += cov[(p, q)];
                count[qp - qq] += 1;
            }
        }
    }
    let mean = sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect();
    (mean, count)
}

fn music(cov: &CMatrix, positions: &[usize], targets: usize, grid: &VelocityGrid, method: Method) -> Result<VelocityEstimate> {
    let m = positions.len();
    let (_, vectors) = hermitian_eigen(cov);
    let noise_dim = m - targets;
    let denom: Vec<f64> = if noise_dim <= targets {
        grid.projection_power(&vectors, &(0..noise_dim).collect::<Vec<_>>(), positions)
    } else {
        let signal = grid.projection_power(&vectors, &(noise_dim..m).collect::<Vec<_>>(), positions);
        signal.into_iter().map(|s| m as f64 - s).collect()
    };
    let velocities = pick_minima(&denom, targets, grid)?;
    Ok(VelocityEstimate { velocities, method, spectrum: Some(denom.iter().map(|d| 1.0 / d.max(f64::MIN_POSITIVE)).collect()) })
}

/// The `count` deepest circular local minima, refined by a three-point parabola.
fn pick_minima(denom: &[f64], count: usize, grid: &VelocityGrid) -> Result<Vec<f64>> {
    let n = denom.len();
    let mut minima: Vec<usize> = (0..n)
        .filter(|&i| {
            let (prev, next) = (denom[(i + n - 1) % n], denom[(i + 1) % n]);
            denom[i] < prev && denom[i] <= next
        })
        .collect();
    if minima.len() < count {
        return Err(JcrError::DegenerateSpectrum { found: minima.len(), needed: count });
    }
    minima.sort_by(|&a, &b| denom[a].total_cmp(&denom[b]).then(a.cmp(&b)));
    let mut out: Vec<f64> = minima[..count]
        .iter()
        .map(|&i| {
            let (ym, y0, yp) = (denom[(i + n - 1) % n], denom[i], denom[(i + 1) % n]);
            let curv = ym - 2.0 * y0 + yp;
            let delta = if curv > 0.0 { (0.5 * (ym - yp) / curv).clamp(-0.5, 0.5) } else { 0.0 };
            let u = wrap_unit(grid.u_at(i) + delta * grid.u_step());
            grid.velocity_of(u)
        })
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn wrap_unit(u: f64) -> f64 {
    u - (u + 0.5).floor()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{model_covariance, DopplerModel};
    use crate::waveform::SlotGrid;

    const LAMBDA: f64 = 0.005;
    const TD: f64 = 25e-6;

    fn grid() -> VelocityGrid {
        VelocityGrid::new(DEFAULT_GRID_POINTS, LAMBDA, TD).unwrap()
    }

    fn exact(schedule: &PreambleSchedule, v: &[f64], noise: f64) -> CMatrix {
        let model = DopplerModel::new(schedule.positions(), v, LAMBDA, TD);
        model_covariance(&model, &vec![1.0; v.len()], noise)
    }

    #[test]
    fn grid_spans_the_unambiguous_interval() {
        let g = grid();
        assert!((g.max_velocity() - 50.0).abs() < 1e-12);
        let v = g.velocities();
        assert!((v[0] + 50.0).abs() < 1e-12);
        assert!(v[v.len() - 1] < 50.0);
    }

    #[test]
    fn projection_matches_direct_evaluation() {
        let g = VelocityGrid::new(64, LAMBDA, TD).unwrap();
        let positions = [0, 1, 4, 9, 11];
        let vecs = CMatrix::from_fn(5, 2, |r, c| Complex64::new(r as f64 - c as f64, 0.5 * (r * c) as f64));
        let fast = g.projection_power(&vecs, &[0, 1], &positions);
        for (i, f) in fast.iter().enumerate() {
            let u = g.u_at(i);
            let direct: f64 = (0..2)
                .map(|c| {
                    positions
                        .iter()
                        .enumerate()
                        .map(|(r, &q)| vecs[(r, c)].conj() * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * u * q as f64))
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .sum();
            assert!((f - direct).abs() < 1e-9 * direct.max(1.0));
        }
    }

    #[test]
    fn direct_music_single_target_exact() {
        let s = PreambleSchedule::wichmann(1, 1, SlotGrid::unbounded(TD)).unwrap();
        let g = grid();
        let est = direct_music(&exact(&s, &[17.3], 0.1), &s, 1, &g).unwrap();
        assert!((est.velocities[0] - 17.3).abs() < g.velocity_step() / 10.0);
    }

    #[test]
    fn both_estimators_recover_exact_targets() {
        let s = PreambleSchedule::nested(3, 3, SlotGrid::unbounded(TD)).unwrap();
        let g = grid();
        let truth = [-31.0, -4.5, 22.0];
        let cov = exact(&s, &truth, 0.01);
        for est in [direct_music(&cov, &s, 3, &g).unwrap(), da_music(&cov, &s, 3, &g).unwrap()] {
            for (a, b) in est.velocities.iter().zip(&truth) {
                assert!((a - b).abs() < g.velocity_step() / 10.0, "{:?} {a} vs {b}", est.method);
            }
        }
    }

    #[test]
    fn da_music_resolves_more_targets_than_preambles() {
        let s = PreambleSchedule::nested(3, 3, SlotGrid::unbounded(TD)).unwrap();
        let g = grid();
        let truth: Vec<f64> = (0..8).map(|i| -42.0 + 12.0 * i as f64).collect();
        let est = da_music(&exact(&s, &truth, 0.01), &s, 8, &g).unwrap();
        for (a, b) in est.velocities.iter().zip(&truth) {
            assert!((a - b).abs() < g.velocity_step() / 10.0);
        }
    }

    #[test]
    fn augmented_matrix_of_uniform_exact_covariance_is_itself() {
        let s = PreambleSchedule::uniform(6, SlotGrid::unbounded(TD)).unwrap();
        let cov = exact(&s, &[-12.0, 30.0], 0.3);
        let aug = augmented_covariance(&cov, s.positions()).unwrap();
        assert!((aug - &cov).norm() < 1e-12 * cov.norm());
    }

    #[test]
    fn lag_counts_cover_every_pair() {
        let s = PreambleSchedule::wichmann(1, 1, SlotGrid::unbounded(TD)).unwrap();
        let cov = exact(&s, &[3.0], 1.0);
        let (_, counts) = lag_averages(&cov, s.positions(), 22);
        let co = s.cowaveform();
        for (l, c) in counts.iter().enumerate() {
            assert_eq!(*c, co.multiplicity_of(l));
        }
        assert_eq!(counts[0] + 2 * counts[1..].iter().sum::<usize>(), 64);
    }

    #[test]
    fn precondition_errors() {
        let g = grid();
        let s = PreambleSchedule::uniform(4, SlotGrid::unbounded(TD)).unwrap();
        let cov = exact(&s, &[1.0], 1.0);
        assert!(matches!(direct_music(&cov, &s, 4, &g), Err(JcrError::TooManyTargets { .. })));
        assert!(matches!(da_music(&cov, &s, 4, &g), Err(JcrError::CoArrayTooSmall { .. })));
    }

    #[test]
    fn global_phase_does_not_matter() {
        use crate::scene::{sample_covariance, synth_snapshots, RadarScene, Target};
        let s = PreambleSchedule::nested(2, 3, SlotGrid::unbounded(TD)).unwrap();
        let g = grid();
        let scene = RadarScene {
            wavelength: LAMBDA,
            tx_gain: 1.0,
            rx_gain: 1.0,
            symbol_energy: 1.0,
            correlation_gain: 1.0,
            noise_power: 1e-12,
            targets: vec![Target::new(5.0, -20.0, 0.0), Target::new(5.0, 11.0, 0.0)],
        };
        let mut ss = synth_snapshots(&s, &scene, 50, 4).unwrap();
        let a = sample_covariance(&ss);
        for (i, h) in ss.snapshots.iter_mut().enumerate() {
            *h *= Complex64::from_polar(1.0, 0.37 * i as f64);
        }
        let b = sample_covariance(&ss);
        for f in [direct_music, da_music] {
            let va = f(&a, &s, 2, &g).unwrap().velocities;
            let vb = f(&b, &s, 2, &g).unwrap().velocities;
            for (x, y) in va.iter().zip(&vb) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn wrap_keeps_half_open_interval() {
        assert_eq!(wrap_unit(0.5), -0.5);
        assert!((wrap_unit(-0.6) - 0.4).abs() < 1e-15);
        assert_eq!(wrap_unit(0.25), 0.25);
    }
}
