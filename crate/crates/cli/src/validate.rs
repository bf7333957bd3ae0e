//! Static checks on a configuration. Nothing is written.

use std::fmt;

use jcrwave_core::metrics::check_identifiable;
use jcrwave_core::waveform::{preamble_overhead, vp_count_optimal_params};
use jcrwave_core::{FamilyKind, PreambleSchedule, SlotGrid};

use crate::config::{Estimator, ExperimentConfig, Family};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub severity: Severity,
    pub key: String,
    pub message: String,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{s}: {}: {}", self.key, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub problems: Vec<Problem>,
}

impl Report {
    pub fn has_errors(&self) -> bool {
        self.problems.iter().any(|p| p.severity == Severity::Error)
    }

    fn warn(&mut self, key: impl Into<String>, message: impl Into<String>) {
        self.problems.push(Problem { severity: Severity::Warning, key: key.into(), message: message.into() });
    }

    fn error(&mut self, key: impl Into<String>, message: impl Into<String>) {
        self.problems.push(Problem { severity: Severity::Error, key: key.into(), message: message.into() });
    }
}

/// Schema errors never reach here; they are reported while loading.
pub fn validate(cfg: &ExperimentConfig) -> Report {
    let mut report = Report::default();
    units(cfg, &mut report);

    let mut counts: Vec<usize> = cfg.tradeoff.target_counts.clone();
    counts.extend(&cfg.optimize.target_counts);
    counts.extend([cfg.scenario.targets, cfg.music_rmse.targets]);
    counts.sort_unstable();
    counts.dedup();

    let d0 = cfg.scenario.distances_m[0];
    for &k in &counts {
        let params = cfg.scenario_params(k, d0, cfg.seed);
        match params.build() {
            Ok(sc) => {
                if let Err(e) = sc.scene.check_unambiguous(sc.grid.slot_interval) {
                    report.warn("scenario.velocities_mps", format!("K = {k}: {e}"));
                }
            }
            Err(e) => report.error("scenario", format!("K = {k}: {e}")),
        }
    }
    for &d in &cfg.scenario.distances_m {
        if !(d > 0.0) {
            report.error("scenario.distances_m", format!("distance {d} m must be positive"));
        }
    }
    if report.has_errors() {
        return report;
    }

    let params = cfg.scenario_params(cfg.scenario.targets, d0, cfg.seed);
    let sc = params.build().expect("checked above");
    let sweeps = [
        ("tradeoff", &cfg.tradeoff.families, cfg.tradeoff.m_min, cfg.tradeoff.m_max, &cfg.tradeoff.target_counts),
        ("optimize", &cfg.optimize.families, cfg.optimize.m_min, cfg.optimize.m_max, &cfg.optimize.target_counts),
    ];
    for (section, families, m_min, m_max, target_counts) in sweeps {
        // CPI capacity.
        if let Err(e) = preamble_overhead(m_max, &sc.timing) {
            let fit = (1.0 / (sc.timing.per_preamble() / sc.timing.cpi)).floor() as usize;
            report.warn(format!("{section}.m_max"), format!("{e}; at most {fit} preambles fit in the CPI"));
        }
        for &f in families {
            let kind = FamilyKind::from(f);
            // Span against the aperture limit, at the largest budget.
            if let Ok(opt) = vp_count_optimal_params(kind, m_max) {
                if let Ok(s) = PreambleSchedule::build(opt.params, SlotGrid::unbounded(sc.grid.slot_interval)) {
                    if s.span() > sc.grid.cpi {
                        report.warn(
                            format!("{section}.m_max"),
                            format!("{} spans {:.4e} s, beyond the aperture limit {:.4e} s", opt.params, s.span(), sc.grid.cpi),
                        );
                    }
                }
            }
            for &k in target_counts {
                let any = (m_min..=m_max).any(|m| identifiable(kind, m, k, sc.grid.slot_interval));
                if !any {
                    let why = if f == Family::Uniform { " (K >= M throughout)".to_string() } else { " (2K exceeds the co-waveform size throughout)".into() };
                    report.warn(
                        format!("{section}.families"),
                        format!("no feasible {} point for K = {k} over M in [{m_min}, {m_max}]{why}", kind.name()),
                    );
                }
            }
        }
    }

    let m = &cfg.music_rmse;
    for &f in &m.families {
        let Ok(opt) = vp_count_optimal_params(f.into(), m.elements) else {
            report.error("music_rmse.elements", format!("{} preambles is not a valid budget", m.elements));
            continue;
        };
        let Ok(s) = PreambleSchedule::build(opt.params, SlotGrid::unbounded(sc.grid.slot_interval)) else { continue };
        for &method in &m.methods {
            match method {
                Estimator::DirectMusic if m.targets >= s.len() => report.warn(
                    "music_rmse.targets",
                    format!("direct MUSIC on {} cannot resolve K = {} with M = {}", opt.params, m.targets, s.len()),
                ),
                Estimator::DaMusic if m.targets > s.cowaveform().contiguous_extent => report.warn(
                    "music_rmse.targets",
                    format!(
                        "DA-MUSIC on {} cannot resolve K = {} with contiguous extent {}",
                        opt.params,
                        m.targets,
                        s.cowaveform().contiguous_extent
                    ),
                ),
                _ => {}
            }
        }
    }
    report
}

fn identifiable(kind: FamilyKind, m: usize, k: usize, slot_interval: f64) -> bool {
    let Ok(opt) = vp_count_optimal_params(kind, m) else { return false };
    if opt.mismatch {
        return false;
    }
    PreambleSchedule::build(opt.params, SlotGrid::unbounded(slot_interval))
        .is_ok_and(|s| check_identifiable(&s, k).is_ok())
}

/// Flags values whose magnitude suggests the wrong unit.
fn units(cfg: &ExperimentConfig, report: &mut Report) {
    let s = &cfg.scenario;
    let checks = [
        ("scenario.carrier_hz", s.carrier_hz, 1e6, 1e13, "Hz"),
        ("scenario.sample_rate_hz", s.sample_rate_hz, 1e3, 1e12, "Hz"),
        ("scenario.cpi_s", s.cpi_s, 1e-7, 10.0, "s"),
        ("scenario.ifs_s", s.ifs_s.max(1e-12), 1e-12, 1e-2, "s"),
        ("scenario.max_velocity_mps", s.max_velocity_mps, 1e-3, 1e4, "m/s"),
        ("comm.distance_m", cfg.comm.distance_m, 1e-2, 1e6, "m"),
    ];
    for (key, v, lo, hi, unit) in checks {
        if !(v > 0.0) {
            report.error(key, format!("{v} must be positive"));
        } else if v < lo || v > hi {
            report.warn(key, format!("{v} {unit} is outside the expected range [{lo:e}, {hi:e}] {unit}"));
        }
    }
    if let Some(td) = s.slot_interval_s {
        if !(td > 0.0) {
            report.error("scenario.slot_interval_s", format!("{td} must be positive"));
        } else if td > s.cpi_s {
            report.warn("scenario.slot_interval_s", format!("{td} s exceeds the CPI of {} s", s.cpi_s));
        }
    }
    if !s.velocities_mps.is_empty() && s.velocities_mps.len() != s.targets {
        report.warn(
            "scenario.velocities_mps",
            format!("{} velocities for {} targets; only used where the count matches", s.velocities_mps.len(), s.targets),
        );
    }
}
