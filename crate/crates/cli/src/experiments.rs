//! The four experiment runners. Each returns tables in a fixed sweep order;
//! writing them to disk is separate so runs can be compared in memory.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use jcrwave_core::estimators::{rmse_study, Method, RmseStudy, VelocityGrid};
use jcrwave_core::optimizer::{
    compare_vp_count_vs_crb, convex_hull, solve_crb_constrained, solve_dmmse_constrained, solve_weighted, tradeoff_curve,
    CrbConstraint, DesignSolution, DmmseConstraint, Hull, Normalization, Scenario, TradeoffPoint,
};
use jcrwave_core::rng::derive_seed;
use jcrwave_core::scene::{linear_to_db, target_powers_and_snr};
use jcrwave_core::waveform::{
    difference_cowaveform, element_count_closed_form, vp_count_closed_form, vp_count_optimal_params,
};
use jcrwave_core::{FamilyKind, FamilyParams, JcrError, PreambleSchedule};

use crate::config::{Estimator, ExperimentConfig, Family, Rule};
use crate::output::{col, svg_plot, write_svg, Cell, Column, Series, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Coarray,
    Tradeoff,
    MusicRmse,
    Optimize,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Coarray => "coarray",
            Experiment::Tradeoff => "tradeoff",
            Experiment::MusicRmse => "music-rmse",
            Experiment::Optimize => "optimize",
        }
    }
}

/// Tables plus the plots derived from them.
#[derive(Debug, Clone)]
pub struct Outputs {
    pub tables: Vec<Table>,
    pub plots: Vec<(String, String)>,
}

pub fn run(kind: Experiment, cfg: &ExperimentConfig) -> Result<Outputs> {
    match kind {
        Experiment::Coarray => coarray(cfg),
        Experiment::Tradeoff => tradeoff(cfg),
        Experiment::MusicRmse => music_rmse(cfg),
        Experiment::Optimize => optimize(cfg),
    }
}

/// Writes every table (and plots when `svg`) into `dir`.
pub fn write(outputs: &Outputs, kind: Experiment, cfg: &ExperimentConfig, dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let toml = cfg.to_toml();
    let mut written = Vec::new();
    for t in &outputs.tables {
        written.push(t.write(dir, kind.name(), cfg.seed, &toml)?);
    }
    if svg {
        for (name, body) in &outputs.plots {
            written.push(write_svg(dir, name, body)?);
        }
    }
    Ok(written)
}

fn scenario(cfg: &ExperimentConfig, targets: usize, distance: f64) -> Result<Scenario> {
    cfg.scenario_params(targets, distance, cfg.seed)
        .build()
        .with_context(|| format!("scenario with {targets} targets at {distance} m"))
}

pub fn family_params(family: Family, params: &[usize]) -> Result<FamilyParams> {
    Ok(match (family, params) {
        (Family::Uniform, [m]) => FamilyParams::Uniform { elements: *m },
        (Family::Nested, [m1, m2]) => FamilyParams::Nested { m1: *m1, m2: *m2 },
        (Family::Wichmann, [p, q]) => FamilyParams::Wichmann { p: *p, q: *q },
        _ => bail!("`coarray.params`: {family:?} expects {} values", if family == Family::Uniform { 1 } else { 2 }),
    })
}

const COARRAY_COLUMNS: &[Column] = &[
    col("lag", "slots"),
    col("lag_s", "s"),
    col("multiplicity", "ordered position pairs"),
    col("in_contiguous", "-"),
];

const COARRAY_SUMMARY_COLUMNS: &[Column] = &[
    col("family", "-"),
    col("params", "-"),
    col("positions", "slots, space separated"),
    col("elements", "preambles"),
    col("elements_closed_form", "preambles"),
    col("aperture", "slots"),
    col("span_s", "s"),
    col("vp_count", "distinct positive lags"),
    col("vp_count_closed_form", "distinct positive lags"),
    col("contiguous_extent", "slots"),
    col("hole_free", "-"),
    col("holes", "slots, space separated"),
];

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn coarray(cfg: &ExperimentConfig) -> Result<Outputs> {
    let c = &cfg.coarray;
    let params = cfg.scenario_params(cfg.scenario.targets, cfg.scenario.distances_m[0], cfg.seed);
    let grid = jcrwave_core::SlotGrid::new(params.slot_interval(), params.aperture_limit_s);
    let schedule = if c.positions.is_empty() {
        PreambleSchedule::build(family_params(c.family, &c.params)?, grid)
    } else {
        PreambleSchedule::from_positions(c.positions.clone(), grid)
    }
    .context("building the coarray schedule")?;
    let co = difference_cowaveform(schedule.positions());

    let mut lags = Table::new("coarray", COARRAY_COLUMNS);
    for lag in 0..=co.max_lag() {
        lags.push(vec![
            lag.into(),
            (lag as f64 * schedule.slot_interval()).into(),
            co.multiplicity_of(lag).into(),
            (lag <= co.contiguous_extent).into(),
        ]);
    }
    let p = schedule.params();
    let mut summary = Table::new("coarray_summary", COARRAY_SUMMARY_COLUMNS);
    summary.push(vec![
        p.kind().map_or("custom", FamilyKind::name).into(),
        p.to_string().into(),
        join(schedule.positions()).into(),
        schedule.len().into(),
        element_count_closed_form(p).into(),
        schedule.aperture().into(),
        schedule.span().into(),
        co.vp_count_one_sided().into(),
        vp_count_closed_form(p).into(),
        co.contiguous_extent.into(),
        co.hole_free.into(),
        join(&co.holes()).into(),
    ]);
    let series = Series {
        label: p.to_string(),
        points: (0..=co.max_lag()).map(|l| (l as f64, co.multiplicity_of(l) as f64)).collect(),
    };
    let plot = svg_plot("Difference co-waveform", "lag (slots)", "multiplicity", &[series]);
    Ok(Outputs { tables: vec![lags, summary], plots: vec![("coarray".into(), plot)] })
}

/// Points for every family at one `(targets, distance)`, with per-family hulls
/// over a normalization shared by all families.
struct Sweep {
    families: Vec<(Family, Vec<TradeoffPoint>, Option<Hull>)>,
    normalization: Option<Normalization>,
}

fn sweep(
    cfg: &ExperimentConfig,
    families: &[Family],
    m_range: std::ops::RangeInclusive<usize>,
    rule: Rule,
    targets: usize,
    distance: f64,
) -> Result<Sweep> {
    let sc = scenario(cfg, targets, distance)?;
    let mut curves = Vec::new();
    for &f in families {
        let pts = tradeoff_curve(f.into(), &sc, m_range.clone(), rule.into())
            .with_context(|| format!("{f:?} sweep with {targets} targets at {distance} m"))?;
        curves.push((f, pts));
    }
    let normalization = match Normalization::from_points(curves.iter().flat_map(|(_, p)| p.iter())) {
        Ok(n) => Some(n),
        Err(JcrError::NoFeasiblePoints) => None,
        Err(e) => return Err(e.into()),
    };
    let families = curves
        .into_iter()
        .map(|(f, mut pts)| {
            let hull = match normalization {
                Some(n) if pts.iter().any(TradeoffPoint::feasible) => Some(convex_hull(&mut pts, Some(n))?),
                _ => None,
            };
            Ok((f, pts, hull))
        })
        .collect::<Result<_>>()?;
    Ok(Sweep { families, normalization })
}

const TRADEOFF_COLUMNS: &[Column] = &[
    col("targets", "-"),
    col("distance_m", "m"),
    col("family", "-"),
    col("params", "-"),
    col("elements", "preambles"),
    col("aperture", "slots"),
    col("span_s", "s"),
    col("mu", "fraction of CPI"),
    col("rate", "bit/s/Hz"),
    col("phi_c", "bit"),
    col("dmmse_db", "dB"),
    col("feasible", "-"),
    col("phi_r", "ln (m/s)^2"),
    col("rcrb_db", "dB re 1 (m/s)^2"),
    col("phi_c_norm", "normalized [0,1]"),
    col("phi_r_norm", "normalized [0,1]"),
    col("on_hull", "-"),
    col("hull_vertex", "-"),
    col("collinear", "-"),
    col("note", "-"),
];

fn family_name(f: Family) -> &'static str {
    FamilyKind::from(f).name()
}

fn tradeoff(cfg: &ExperimentConfig) -> Result<Outputs> {
    let t = &cfg.tradeoff;
    let mut table = Table::new("tradeoff", TRADEOFF_COLUMNS);
    let mut series = Vec::new();
    for &k in &t.target_counts {
        for &d in &cfg.scenario.distances_m {
            let sw = sweep(cfg, &t.families, t.m_min..=t.m_max, t.rule, k, d)?;
            for (f, pts, hull) in &sw.families {
                for (i, p) in pts.iter().enumerate() {
                    let norm = sw.normalization.and_then(|n| n.apply(p));
                    let vertex = hull.as_ref().is_some_and(|h| h.vertices.contains(&i));
                    table.push(vec![
                        k.into(),
                        d.into(),
                        family_name(*f).into(),
                        p.params.to_string().into(),
                        p.elements.into(),
                        p.aperture.into(),
                        p.span.into(),
                        p.mu.into(),
                        p.rate.into(),
                        p.phi_c.into(),
                        p.dmmse_db.into(),
                        p.feasible().into(),
                        p.phi_r().into(),
                        p.rcrb_db().into(),
                        norm.map(|n| n.0).into(),
                        norm.map(|n| n.1).into(),
                        p.on_hull.into(),
                        vertex.into(),
                        p.collinear.into(),
                        p.note.clone().into(),
                    ]);
                }
                series.push(Series {
                    label: format!("{} K={k} {d} m", family_name(*f)),
                    points: pts.iter().filter_map(|p| p.rcrb_db().map(|r| (p.dmmse_db, r))).collect(),
                });
            }
        }
    }
    let plot = svg_plot("Radar RCRB vs communication DMMSE", "dmmse_db (dB)", "rcrb_db (dB re 1 (m/s)^2)", &series);
    Ok(Outputs { tables: vec![table], plots: vec![("tradeoff".into(), plot)] })
}

const MUSIC_COLUMNS: &[Column] = &[
    col("family", "-"),
    col("params", "-"),
    col("elements", "preambles"),
    col("targets", "-"),
    col("distance_m", "m"),
    col("snr_db", "dB per target"),
    col("method", "-"),
    col("snapshots", "-"),
    col("trials", "-"),
    col("failures", "trials"),
    col("resolved_fraction", "fraction of trials"),
    col("rmse", "m/s"),
    col("rcrb", "m/s"),
    col("rmse_db", "dB re 1 m/s"),
    col("rcrb_db", "dB re 1 m/s"),
    col("status", "-"),
];

fn music_rmse(cfg: &ExperimentConfig) -> Result<Outputs> {
    let c = &cfg.music_rmse;
    let distances: Vec<f64> =
        if c.snr_db.is_some() { vec![cfg.scenario.distances_m[0]] } else { cfg.scenario.distances_m.clone() };
    let mut table = Table::new("music_rmse", MUSIC_COLUMNS);
    let mut series = Vec::new();
    for (fi, &f) in c.families.iter().enumerate() {
        let opt = vp_count_optimal_params(f.into(), c.elements)
            .with_context(|| format!("{f:?} with {} preambles", c.elements))?;
        for (di, &d) in distances.iter().enumerate() {
            let mut sc = scenario(cfg, c.targets, d)?;
            if let Some(snr) = c.snr_db {
                let (powers, _) = target_powers_and_snr(&sc.scene);
                sc.scene.noise_power = powers[0] / 10f64.powf(snr / 10.0);
            }
            let (_, snr) = target_powers_and_snr(&sc.scene);
            let snr_db = linear_to_db(snr[0]);
            let schedule = PreambleSchedule::build(opt.params, sc.grid)
                .with_context(|| format!("{} at {d} m", opt.params))?;
            let grid = VelocityGrid::new(c.grid_points, sc.scene.wavelength, sc.grid.slot_interval)?;
            for (mi, &m) in c.methods.iter().enumerate() {
                let method = match m {
                    Estimator::DirectMusic => Method::DirectMusic,
                    Estimator::DaMusic => Method::DaMusic,
                };
                let seed = derive_seed(cfg.seed, &[fi as u64, di as u64, mi as u64]);
                let mut curve = Vec::new();
                let mut bound = Vec::new();
                for &eta in &c.snapshots {
                    let study =
                        RmseStudy { schedule: &schedule, scene: &sc.scene, method, snapshots: eta, trials: c.trials, seed, grid: &grid };
                    let head: Vec<Cell> = vec![
                        family_name(f).into(),
                        opt.params.to_string().into(),
                        schedule.len().into(),
                        c.targets.into(),
                        d.into(),
                        snr_db.into(),
                        method.name().into(),
                        eta.into(),
                        c.trials.into(),
                    ];
                    let tail: Vec<Cell> = match rmse_study(&study) {
                        Ok(r) => {
                            let rcrb = r.rcrb.as_ref().map(|v| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt());
                            curve.push((eta as f64, 20.0 * r.rmse.log10()));
                            if let Some(b) = rcrb {
                                bound.push((eta as f64, 20.0 * b.log10()));
                            }
                            vec![
                                r.failures.into(),
                                r.resolved_fraction().into(),
                                r.rmse.into(),
                                rcrb.into(),
                                (20.0 * r.rmse.log10()).into(),
                                rcrb.map(|b| 20.0 * b.log10()).into(),
                                "ok".into(),
                            ]
                        }
                        Err(e @ (JcrError::TooManyTargets { .. } | JcrError::CoArrayTooSmall { .. } | JcrError::VelocityAliased { .. })) => {
                            vec![Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, e.to_string().into()]
                        }
                        Err(e) => {
                            return Err(anyhow!(e)
                                .context(format!("{} {} at {d} m with {eta} snapshots", opt.params, method.name())))
                        }
                    };
                    table.push(head.into_iter().chain(tail).collect());
                }
                series.push(Series { label: format!("{} {} {d} m", opt.params, method.name()), points: curve });
                if m == c.methods[0] {
                    series.push(Series { label: format!("{} RCRB {d} m", opt.params), points: bound });
                }
            }
        }
    }
    let plot = svg_plot("Velocity RMSE vs snapshots", "snapshots", "RMSE (dB re 1 m/s)", &series);
    Ok(Outputs { tables: vec![table], plots: vec![("music_rmse".into(), plot)] })
}

const WEIGHTED_COLUMNS: &[Column] = &[
    col("targets", "-"),
    col("distance_m", "m"),
    col("family", "-"),
    col("omega_c", "-"),
    col("params", "-"),
    col("elements", "preambles"),
    col("objective", "normalized [0,1]"),
    col("phi_c", "bit"),
    col("dmmse_db", "dB"),
    col("phi_r", "ln (m/s)^2"),
    col("rcrb_db", "dB re 1 (m/s)^2"),
    col("status", "-"),
];

const CONSTRAINED_COLUMNS: &[Column] = &[
    col("targets", "-"),
    col("distance_m", "m"),
    col("family", "-"),
    col("problem", "-"),
    col("bound", "see bound_unit"),
    col("bound_unit", "-"),
    col("params", "-"),
    col("elements", "preambles"),
    col("dmmse_db", "dB"),
    col("rcrb_db", "dB re 1 (m/s)^2"),
    col("objective", "bit (crb-constrained) or ln (m/s)^2 (dmmse-constrained)"),
    col("slack", "bit (dmmse-constrained) or ln (m/s)^2 (crb-constrained)"),
    col("mix_a_elements", "preambles"),
    col("mix_b_elements", "preambles"),
    col("mix_weight", "time fraction on mix_a"),
    col("mix_dmmse_db", "dB"),
    col("mix_rcrb_db", "dB re 1 (m/s)^2"),
    col("status", "-"),
];

const VP_COLUMNS: &[Column] = &[
    col("targets", "-"),
    col("distance_m", "m"),
    col("family", "-"),
    col("elements", "preambles"),
    col("vp_params", "-"),
    col("crb_params", "-"),
    col("agree", "-"),
    col("first_param_gap", "M1 or p, CRB-optimal minus rule"),
    col("vp_rcrb_db", "dB re 1 (m/s)^2"),
    col("crb_rcrb_db", "dB re 1 (m/s)^2"),
];

fn phi_r_to_db(phi_r: f64) -> f64 {
    10.0 * phi_r / std::f64::consts::LN_10
}

fn phi_c_to_db(phi_c: f64) -> f64 {
    10.0 * std::f64::consts::LOG10_2 * phi_c
}

fn constrained_row(
    head: Vec<Cell>,
    pts: &[TradeoffPoint],
    sol: std::result::Result<DesignSolution, JcrError>,
) -> Result<Vec<Cell>> {
    let tail: Vec<Cell> = match sol {
        Ok(s) => {
            let p = &pts[s.index];
            let mix = s.mixture;
            vec![
                p.params.to_string().into(),
                p.elements.into(),
                p.dmmse_db.into(),
                p.rcrb_db().into(),
                s.objective.into(),
                s.slack.into(),
                mix.map(|m| pts[m.a].elements).into(),
                mix.map(|m| pts[m.b].elements).into(),
                mix.map(|m| m.weight).into(),
                mix.map(|m| phi_c_to_db(m.phi_c)).into(),
                mix.map(|m| phi_r_to_db(m.phi_r)).into(),
                "ok".into(),
            ]
        }
        Err(e @ (JcrError::ConstraintInfeasible(_) | JcrError::NoFeasiblePoints)) => {
            let mut v = vec![Cell::Empty; 11];
            v.push(e.to_string().into());
            v
        }
        Err(e) => return Err(e.into()),
    };
    Ok(head.into_iter().chain(tail).collect())
}

fn optimize(cfg: &ExperimentConfig) -> Result<Outputs> {
    let o = &cfg.optimize;
    let mut weighted = Table::new("optimize_weighted", WEIGHTED_COLUMNS);
    let mut constrained = Table::new("optimize_constrained", CONSTRAINED_COLUMNS);
    let mut vp = Table::new("optimize_vp_compare", VP_COLUMNS);
    let mut series = Vec::new();
    for &k in &o.target_counts {
        for &d in &cfg.scenario.distances_m {
            let sw = sweep(cfg, &o.families, o.m_min..=o.m_max, o.rule, k, d)?;
            for (f, pts, hull) in &sw.families {
                let base = || -> Vec<Cell> { vec![k.into(), d.into(), family_name(*f).into()] };
                let mut chosen = Vec::new();
                for &w in &o.weights {
                    let mut row = base();
                    row.push(w.into());
                    match hull {
                        Some(h) => {
                            let s = solve_weighted(pts, h, w)?;
                            let p = &pts[s.index];
                            chosen.push((w, p.elements as f64));
                            row.extend([
                                p.params.to_string().into(),
                                p.elements.into(),
                                s.objective.into(),
                                p.phi_c.into(),
                                p.dmmse_db.into(),
                                p.phi_r().into(),
                                p.rcrb_db().into(),
                                "ok".into(),
                            ]);
                        }
                        None => {
                            row.extend(vec![Cell::Empty; 7]);
                            row.push(JcrError::NoFeasiblePoints.to_string().into());
                        }
                    }
                    weighted.push(row);
                }
                series.push(Series { label: format!("{} K={k} {d} m", family_name(*f)), points: chosen });

                for &v in &o.dmmse_db {
                    let bound = DmmseConstraint::Db(v);
                    let mut head = base();
                    head.extend(["dmmse-constrained".into(), v.into(), "dB (dmmse_db)".into()]);
                    let sol = match hull {
                        Some(h) => solve_dmmse_constrained(pts, h, bound),
                        None => Err(JcrError::NoFeasiblePoints),
                    };
                    constrained.push(constrained_row(head, pts, sol)?);
                }
                let crb_bounds = o
                    .crb_mps2
                    .iter()
                    .map(|&v| (v, "(m/s)^2 geometric mean", CrbConstraint::Linear(v)))
                    .chain(o.crb_db.iter().map(|&v| (v, "dB (rcrb_db)", CrbConstraint::Db(v))));
                for (v, unit, bound) in crb_bounds {
                    let mut head = base();
                    head.extend(["crb-constrained".into(), v.into(), unit.into()]);
                    constrained.push(constrained_row(head, pts, solve_crb_constrained(pts, hull.as_ref(), bound))?);
                }
            }
            if o.vp_compare {
                for &f in o.families.iter().filter(|&&f| f != Family::Uniform) {
                    let sc = scenario(cfg, k, d)?;
                    let rows = compare_vp_count_vs_crb(f.into(), &sc, o.m_min..=o.m_max)
                        .with_context(|| format!("{f:?} VP comparison with {k} targets at {d} m"))?;
                    for r in rows {
                        let (a, b) = (r.vp_rule.rcrb_db(), r.crb_optimal.rcrb_db());
                        vp.push(vec![
                            k.into(),
                            d.into(),
                            family_name(f).into(),
                            r.elements.into(),
                            r.vp_rule.params.to_string().into(),
                            r.crb_optimal.params.to_string().into(),
                            r.agree.into(),
                            r.first_param_gap.into(),
                            a.into(),
                            b.into(),
                        ]);
                    }
                }
            }
        }
    }
    let plot = svg_plot("Weighted design: chosen preamble count", "omega_c", "elements (preambles)", &series);
    Ok(Outputs { tables: vec![weighted, constrained, vp], plots: vec![("optimize_weighted".into(), plot)] })
}
