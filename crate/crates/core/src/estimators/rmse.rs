use rayon::prelude::*;

use super::{da_music, direct_music, Method, VelocityGrid};
use crate::error::{JcrError, Result};
use crate::metrics::crb_velocity;
use crate::rng;
use crate::scene::{sample_covariance, synth_snapshots, RadarScene};
use crate::waveform::PreambleSchedule;

/// One Monte Carlo RMSE experiment at a fixed snapshot count.
#[derive(Debug, Clone, Copy)]
pub struct RmseStudy<'a> {
    pub schedule: &'a PreambleSchedule,
    pub scene: &'a RadarScene,
    pub method: Method,
    pub snapshots: usize,
    pub trials: usize,
    pub seed: u64,
    pub grid: &'a VelocityGrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseReport {
    pub method: Method,
    pub snapshots: usize,
    pub trials: usize,
    /// Trials where the estimator returned an error; excluded from the RMSE.
    pub failures: usize,
    /// Trials where every target was matched within half the smallest target separation.
    pub resolved: usize,
    /// Per-target RMSE in m/s, in scene order. NaN when every trial failed.
    pub per_target_rmse: Vec<f64>,
    /// Root of the mean per-target squared error.
    pub rmse: f64,
    /// Square root of the CRB diagonal when the bound exists.
    pub rcrb: Option<Vec<f64>>,
}

impl RmseReport {
    pub fn resolved_fraction(&self) -> f64 {
        self.resolved as f64 / self.trials as f64
    }
}

/// Signed difference `a - b` wrapped to `[-period/2, period/2)`.
pub fn circular_error(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b) / period;
    (d - (d + 0.5).floor()) * period
}

/// Errors per truth (in the order of `truth`) under the cyclic assignment of
/// sorted estimates to sorted truths with least total absolute error.
pub fn match_estimates(estimates: &[f64], truth: &[f64], period: f64) -> Vec<f64> {
    let k = truth.len();
    assert_eq!(estimates.len(), k, "one estimate per target");
    let mut est = estimates.to_vec();
    est.sort_by(f64::total_cmp);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| truth[a].total_cmp(&truth[b]));

    let cost = |shift: usize| -> f64 {
        (0..k).map(|i| circular_error(est[(i + shift) % k], truth[order[i]], period).abs()).sum()
    };
    let mut best = 0;
    let mut best_cost = cost(0);
    for shift in 1..k {
        let c = cost(shift);
        if c < best_cost {
            best = shift;
            best_cost = c;
        }
    }
    let mut errors = vec![0.0; k];
    for i in 0..k {
        errors[order[i]] = circular_error(est[(i + best) % k], truth[order[i]], period);
    }
    errors
}

fn min_separation(truth: &[f64], period: f64) -> f64 {
    let mut sep = period;
    for (i, a) in truth.iter().enumerate() {
        for b in &truth[i + 1..] {
            sep = sep.min(circular_error(*a, *b, period).abs());
        }
    }
    sep
}

/// Runs `trials` independent trials. Trial `t` draws its snapshots from the
/// stream `(seed, snapshots, t)`, so results do not depend on scheduling.
pub fn rmse_study(study: &RmseStudy<'_>) -> Result<RmseReport> {
    if study.trials == 0 {
        return Err(JcrError::InvalidArgument("at least one trial is required".into()));
    }
    let truth = study.scene.velocities();
    if truth.is_empty() {
        return Err(JcrError::InvalidScene("at least one target is required".into()));
    }
    study.scene.validate()?;
    study.scene.check_unambiguous(study.schedule.slot_interval())?;
    let k = truth.len();
    let period = 2.0 * study.grid.max_velocity();
    let tolerance = 0.5 * min_separation(&truth, period);

    let outcomes: Vec<Option<Vec<f64>>> = (0..study.trials)
        .into_par_iter()
        .map(|t| -> Result<Option<Vec<f64>>> {
            let seed = rng::derive_seed(study.seed, &[study.snapshots as u64, t as u64]);
            let ss = synth_snapshots(study.schedule, study.scene, study.snapshots, seed)?;
            let cov = sample_covariance(&ss);
            let est = match study.method {
                Method::DirectMusic => direct_music(&cov, study.schedule, k, study.grid),
                Method::DaMusic => da_music(&cov, study.schedule, k, study.grid),
            };
            match est {
                Ok(e) => Ok(Some(match_estimates(&e.velocities, &truth, period))),
                Err(JcrError::DegenerateSpectrum { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let mut sq = vec![0.0; k];
    let mut ok = 0usize;
    let mut resolved = 0usize;
    for errors in outcomes.iter().flatten() {
        ok += 1;
        if errors.iter().all(|e| e.abs() < tolerance) {
            resolved += 1;
        }
        for (s, e) in sq.iter_mut().zip(errors) {
            *s += e * e;
        }
    }
    let per_target_rmse: Vec<f64> = sq.iter().map(|s| if ok > 0 { (s / ok as f64).sqrt() } else { f64::NAN }).collect();
    let rmse = (per_target_rmse.iter().map(|r| r * r).sum::<f64>() / k as f64).sqrt();
    let rcrb = crb_velocity(study.schedule, study.scene, study.snapshots)
        .ok()
        .and_then(|c| c.diagonal())
        .map(|d| d.into_iter().map(f64::sqrt).collect());

    Ok(RmseReport {
        method: study.method,
        snapshots: study.snapshots,
        trials: study.trials,
        failures: study.trials - ok,
        resolved,
        per_target_rmse,
        rmse,
        rcrb,
    })
}
