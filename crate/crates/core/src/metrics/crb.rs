use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{model_covariance, DopplerModel};
use crate::error::{JcrError, Result};
use crate::linalg::{hermitian_inv_sqrt, khatri_rao, project_out, symmetric_eigenvalues, vec_identity, whiten_vec_columns, CMatrix};
use crate::scene::{target_powers_and_snr, RadarScene};
use crate::waveform::{FamilyKind, PreambleSchedule};

/// A Fisher block whose smallest eigenvalue is below this fraction of its
/// largest (after diagonal scaling) is treated as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-10;

/// Velocity CRB and the conditioning of the Fisher block it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CrbResult {
    /// `K x K` bound in (m/s)², absent when the bound does not exist.
    pub crb: Option<DMatrix<f64>>,
    pub exists: bool,
    /// Smallest and largest eigenvalue of the diagonally scaled Fisher block.
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl CrbResult {
    /// Diagonal of the bound, if it exists.
    pub fn diagonal(&self) -> Option<Vec<f64>> {
        self.crb.as_ref().map(|c| c.diagonal().iter().copied().collect())
    }

    fn from_fisher(fisher: DMatrix<f64>, scale: f64) -> Self {
        let fisher = 0.5 * (&fisher + fisher.transpose());
        let n = fisher.nrows();
        let d: Vec<f64> = (0..n).map(|i| fisher[(i, i)]).collect();
        if n == 0 || d.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Self { crb: None, exists: false, min_eigenvalue: 0.0, max_eigenvalue: 0.0 };
        }
        let s: Vec<f64> = d.iter().map(|x| 1.0 / x.sqrt()).collect();
        let scaled = DMatrix::from_fn(n, n, |i, j| fisher[(i, j)] * s[i] * s[j]);
        let eig = symmetric_eigenvalues(&scaled);
        let (lo, hi) = (eig[0], eig[n - 1]);
        if !(lo > SINGULARITY_THRESHOLD * hi) {
            return Self { crb: None, exists: false, min_eigenvalue: lo, max_eigenvalue: hi };
        }
        let inv = scaled.cholesky().expect("positive definite after the eigenvalue check").inverse();
        let crb = DMatrix::from_fn(n, n, |i, j| inv[(i, j)] * s[i] * s[j] / scale);
        let crb = 0.5 * (&crb + crb.transpose());
        Self { crb: Some(crb), exists: true, min_eigenvalue: lo, max_eigenvalue: hi }
    }
}

/// Rejects target counts above the identifiability limit of the schedule.
///
/// Uniform schedules need `K < M`; hole-free sparse schedules need
/// `2K <= |C_V|` with `|C_V|` the one-sided lag count. Schedules with holes
/// are left to the numerical check.
pub fn check_identifiable(schedule: &PreambleSchedule, targets: usize) -> Result<()> {
    let m = schedule.len();
    let is_uniform = schedule.family() == Some(FamilyKind::Uniform) || schedule.aperture() + 1 == m;
    if is_uniform {
        if targets >= m {
            return Err(JcrError::NotIdentifiable(format!("K = {targets} >= M = {m} on a uniform schedule")));
        }
        return Ok(());
    }
    let co = schedule.cowaveform();
    if co.hole_free && 2 * targets > co.vp_count_one_sided() {
        return Err(JcrError::NotIdentifiable(format!(
            "2K = {} exceeds the co-waveform size {}",
            2 * targets,
            co.vp_count_one_sided()
        )));
    }
    Ok(())
}

/// Velocity CRB of the stochastic model for `eta` snapshots.
///
/// Whitening by `(R^T (x) R)^(-1/2)` is applied as `vec(S X S)` with
/// `S = R^(-1/2)`, and the bound is `(1/eta) Re(E^H P_F^perp E)^(-1)`.
pub fn crb_from_model(model: &DopplerModel, powers: &[f64], noise_power: f64, eta: usize) -> CrbResult {
    let r = model_covariance(model, powers, noise_power);
    let s = hermitian_inv_sqrt(&r);
    let dq = khatri_rao(&model.d.map(|z| z.conj()), &model.d);
    let dq_dot = khatri_rao(&model.d_dot.map(|z| z.conj()), &model.d) + khatri_rao(&model.d.map(|z| z.conj()), &model.d_dot);
    let m = model.elements();
    let k = model.targets();

    let mut e = dq_dot;
    for (c, &p) in powers.iter().enumerate() {
        e.column_mut(c).scale_mut(p);
    }
    let e = whiten_vec_columns(&s, &e);
    let mut f = CMatrix::zeros(m * m, k + 1);
    f.columns_mut(0, k).copy_from(&dq);
    f.column_mut(k).copy_from(&vec_identity(m));
    let f = whiten_vec_columns(&s, &f);

    let pe = project_out(&f, &e);
    let inner: CMatrix = e.adjoint() * pe;
    let fisher = DMatrix::from_fn(k, k, |i, j| inner[(i, j)].re);
    CrbResult::from_fisher(fisher, eta as f64)
}

/// Velocity block of the inverse Fisher matrix over `(v, p, sigma²)` with
/// `FIM_ij = eta Re Tr(R^-1 dR_i R^-1 dR_j)`.
pub fn crb_oracle_from_model(model: &DopplerModel, powers: &[f64], noise_power: f64, eta: usize) -> CrbResult {
    let r = model_covariance(model, powers, noise_power);
    let r_inv = r.clone().try_inverse().expect("covariance is positive definite");
    let m = model.elements();
    let k = model.targets();

    let mut derivs: Vec<CMatrix> = Vec::with_capacity(2 * k + 1);
    for c in 0..k {
        let d = model.d.column(c);
        let dd = model.d_dot.column(c);
        derivs.push((&dd * d.adjoint() + &d * dd.adjoint()) * Complex64::new(powers[c], 0.0));
    }
    for c in 0..k {
        let d = model.d.column(c);
        derivs.push(&d * d.adjoint());
    }
    derivs.push(CMatrix::identity(m, m));

    let a: Vec<CMatrix> = derivs.iter().map(|dr| &r_inv * dr).collect();
    let n = a.len();
    let mut fim = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let t = trace_of_product(&a[i], &a[j]).re;
            fim[(i, j)] = t;
            fim[(j, i)] = t;
        }
    }
    let full = CrbResult::from_fisher(fim, eta as f64);
    match full.crb {
        Some(c) => CrbResult { crb: Some(c.view((0, 0), (k, k)).into_owned()), ..full },
        None => full,
    }
}

fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut t = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for l in 0..n {
            t += a[(i, l)] * b[(l, i)];
        }
    }
    t
}

fn schedule_crb(
    schedule: &PreambleSchedule,
    scene: &RadarScene,
    eta: usize,
    f: fn(&DopplerModel, &[f64], f64, usize) -> CrbResult,
) -> Result<CrbResult> {
    if eta == 0 {
        return Err(JcrError::InvalidArgument("snapshot count must be at least 1".into()));
    }
    scene.validate()?;
    if scene.targets.is_empty() {
        return Err(JcrError::InvalidScene("at least one target is required for a velocity CRB".into()));
    }
    check_identifiable(schedule, scene.targets.len())?;
    let (powers, _) = target_powers_and_snr(scene);
    let model = DopplerModel::new(schedule.positions(), &scene.velocities(), scene.wavelength, schedule.slot_interval());
    let out = f(&model, &powers, scene.noise_power, eta);
    if !out.exists {
        return Err(JcrError::NotIdentifiable(format!(
            "Fisher block is numerically singular (eigenvalue ratio {:.3e})",
            out.min_eigenvalue / out.max_eigenvalue
        )));
    }
    Ok(out)
}

/// Velocity CRB for a schedule and scene.
pub fn crb_velocity(schedule: &PreambleSchedule, scene: &RadarScene, eta: usize) -> Result<CrbResult> {
    schedule_crb(schedule, scene, eta, crb_from_model)
}

/// Independent Fisher-information computation of the same bound.
pub fn crb_oracle_slepian_bangs(schedule: &PreambleSchedule, scene: &RadarScene, eta: usize) -> Result<CrbResult> {
    schedule_crb(schedule, scene, eta, crb_oracle_from_model)
}

/// Scalar radar metrics from a velocity CRB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarMetrics {
    /// Mean natural log of the CRB diagonal.
    pub phi_r: f64,
    /// `(10/K) sum log10 CRB_kk`, i.e. 20 log10 of the geometric-mean RCRB in m/s.
    pub rcrb_db: f64,
}

pub fn radar_scalar(crb: &CrbResult) -> Result<RadarMetrics> {
    let diag = crb.diagonal().filter(|_| crb.exists).ok_or(JcrError::CrbDoesNotExist)?;
    let k = diag.len() as f64;
    let phi_r = diag.iter().map(|x| x.ln()).sum::<f64>() / k;
    let rcrb_db = 10.0 * diag.iter().map(|x| x.log10()).sum::<f64>() / k;
    Ok(RadarMetrics { phi_r, rcrb_db })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Target;
    use crate::waveform::SlotGrid;

    const LAMBDA: f64 = 0.005;
    const TD: f64 = 25e-6;

    fn scene(velocities: &[f64], snr_db: f64) -> RadarScene {
        RadarScene {
            wavelength: LAMBDA,
            tx_gain: 1.0,
            rx_gain: 1.0,
            symbol_energy: 1.0,
            correlation_gain: 1.0,
            noise_power: 1.0,
            targets: velocities.iter().map(|&v| Target::new(5.0, v, 0.0)).collect(),
        }
        .with_snr_db(snr_db)
    }

    trait WithSnr {
        fn with_snr_db(self, snr_db: f64) -> Self;
    }

    impl WithSnr for RadarScene {
        fn with_snr_db(mut self, snr_db: f64) -> Self {
            let (p, _) = target_powers_and_snr(&self);
            self.noise_power = p[0] / 10f64.powf(snr_db / 10.0);
            self
        }
    }

    fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn matches_oracle_uniform_single_target() {
        let s = PreambleSchedule::uniform(5, SlotGrid::unbounded(TD)).unwrap();
        let sc = scene(&[12.0], 10.0);
        let a = crb_velocity(&s, &sc, 100).unwrap().crb.unwrap();
        let b = crb_oracle_slepian_bangs(&s, &sc, 100).unwrap().crb.unwrap();
        assert!(rel(&a, &b) < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn matches_oracle_sparse_multi_target() {
        let s = PreambleSchedule::wichmann(1, 1, SlotGrid::unbounded(TD)).unwrap();
        let sc = scene(&[-30.0, 4.0, 41.0], 15.0);
        let a = crb_velocity(&s, &sc, 10).unwrap().crb.unwrap();
        let b = crb_oracle_slepian_bangs(&s, &sc, 10).unwrap().crb.unwrap();
        assert!(rel(&a, &b) < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn inverse_snapshot_scaling() {
        let s = PreambleSchedule::nested(2, 3, SlotGrid::unbounded(TD)).unwrap();
        let sc = scene(&[-20.0, 25.0], 5.0);
        let a = crb_velocity(&s, &sc, 7).unwrap().crb.unwrap();
        let b = crb_velocity(&s, &sc, 14).unwrap().crb.unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x / 2.0 - y).abs() <= 1e-12 * y.abs());
        }
    }

    #[test]
    fn identifiability_boundaries() {
        let g = SlotGrid::unbounded(TD);
        let s = PreambleSchedule::nested(2, 2, g).unwrap();
        assert!(matches!(
            crb_velocity(&s, &scene(&[-30.0, 0.0, 30.0], 10.0), 1),
            Err(JcrError::NotIdentifiable(_))
        ));
        assert!(crb_velocity(&s, &scene(&[-30.0, 30.0], 10.0), 1).is_ok());
        let u = PreambleSchedule::uniform(3, g).unwrap();
        assert!(matches!(crb_velocity(&u, &scene(&[-30.0, 0.0, 30.0], 10.0), 1), Err(JcrError::NotIdentifiable(_))));
        assert!(crb_velocity(&u, &scene(&[-30.0, 30.0], 10.0), 1).is_ok());
    }

    #[test]
    fn crb_decreases_with_snr() {
        let s = PreambleSchedule::uniform(10, SlotGrid::unbounded(TD)).unwrap();
        let mut last = f64::INFINITY;
        for snr in (0..=40).step_by(5) {
            let c = crb_velocity(&s, &scene(&[7.0], snr as f64), 1).unwrap().crb.unwrap()[(0, 0)];
            assert!(c < last);
            last = c;
        }
    }

    #[test]
    fn translation_invariance() {
        let sc = scene(&[-10.0, 33.0], 12.0);
        let model = DopplerModel::new(&[0, 1, 2, 5, 8], &sc.velocities(), LAMBDA, TD);
        let shifted = DopplerModel::new(&[3, 4, 5, 8, 11], &sc.velocities(), LAMBDA, TD);
        let (p, _) = target_powers_and_snr(&sc);
        let a = crb_from_model(&model, &p, sc.noise_power, 1).diagonal().unwrap();
        let b = crb_from_model(&shifted, &p, sc.noise_power, 1).diagonal().unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8 * x);
        }
    }

    #[test]
    fn coincident_targets_are_singular() {
        let model = DopplerModel::new(&[0, 1, 2, 3, 4, 5], &[10.0, 10.0], LAMBDA, TD);
        let out = crb_from_model(&model, &[1.0, 1.0], 0.1, 1);
        assert!(!out.exists);
        assert!(out.crb.is_none());
        assert_eq!(radar_scalar(&out), Err(JcrError::CrbDoesNotExist));
    }

    #[test]
    fn radar_scalar_conventions() {
        let one = CrbResult {
            crb: Some(DMatrix::from_element(1, 1, 1.5e-4)),
            exists: true,
            min_eigenvalue: 1.0,
            max_eigenvalue: 1.0,
        };
        let m = radar_scalar(&one).unwrap();
        assert!((m.rcrb_db + 38.239).abs() < 1e-3, "{}", m.rcrb_db);
        assert!((m.phi_r - 1.5e-4f64.ln()).abs() < 1e-12);
        let scaled = CrbResult { crb: Some(DMatrix::from_element(1, 1, 1.5e-2)), ..one.clone() };
        assert!((radar_scalar(&scaled).unwrap().rcrb_db - m.rcrb_db - 20.0).abs() < 1e-9);
        let two = CrbResult { crb: Some(DMatrix::from_diagonal_element(2, 2, 1.5e-4)), ..one };
        assert!((radar_scalar(&two).unwrap().phi_r - m.phi_r).abs() < 1e-12);
    }
}
