//! Shared fixtures for the benchmarks.

use jcrwave_core::estimators::{VelocityGrid, DEFAULT_GRID_POINTS};
use jcrwave_core::linalg::CMatrix;
use jcrwave_core::optimizer::{Scenario, ScenarioParams};
use jcrwave_core::scene::{sample_covariance, synth_snapshots};
use jcrwave_core::{FamilyKind, PreambleSchedule};

/// Default scenario with `targets` targets at 20 m.
pub fn scenario(targets: usize) -> Scenario {
    ScenarioParams { targets, target_distance: 20.0, ..Default::default() }
        .build()
        .expect("default scenario is valid")
}

/// VP-count-optimal schedule of `family` with `m` preambles.
pub fn schedule(family: FamilyKind, m: usize, sc: &Scenario) -> PreambleSchedule {
    let opt = jcrwave_core::waveform::vp_count_optimal_params(family, m).expect("valid budget");
    PreambleSchedule::build(opt.params, sc.grid).expect("schedule fits")
}

/// Sample covariance from `eta` snapshots plus the default velocity grid.
pub fn music_input(s: &PreambleSchedule, sc: &Scenario, eta: usize) -> (CMatrix, VelocityGrid) {
    let ss = synth_snapshots(s, &sc.scene, eta, 1).expect("scene is unambiguous");
    let grid = VelocityGrid::new(DEFAULT_GRID_POINTS, sc.scene.wavelength, sc.grid.slot_interval).expect("grid");
    (sample_covariance(&ss), grid)
}
