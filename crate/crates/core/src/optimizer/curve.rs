use rayon::prelude::*;

use super::Scenario;
use crate::error::{JcrError, Result};
use crate::metrics::{crb_velocity, radar_scalar, CommMetrics, RadarMetrics};
use crate::waveform::{family_configurations, preamble_overhead, vp_count_optimal_params, FamilyKind, FamilyParams, PreambleSchedule};

/// How family parameters are chosen at each preamble count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamRule {
    /// Closed-form VP-count-optimal parameters.
    VpCount,
    /// Every configuration with exactly `M` preambles; keeps the lowest `phi_r`.
    Exhaustive,
}

/// One evaluated design.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub family: FamilyKind,
    pub params: FamilyParams,
    /// Preamble count `M`.
    pub elements: usize,
    /// Largest slot position.
    pub aperture: usize,
    /// Schedule span in seconds.
    pub span: f64,
    /// Data-symbol fraction.
    pub mu: f64,
    /// Spectral efficiency in bits/s/Hz.
    pub rate: f64,
    pub phi_c: f64,
    pub dmmse_db: f64,
    /// Present exactly when the CRB exists.
    pub radar: Option<RadarMetrics>,
    pub on_hull: bool,
    /// On the hull but strictly inside a segment between two vertices.
    pub collinear: bool,
    /// Why the point has no radar metric.
    pub note: Option<String>,
}

impl TradeoffPoint {
    pub fn feasible(&self) -> bool {
        self.radar.is_some()
    }

    pub fn phi_r(&self) -> Option<f64> {
        self.radar.map(|r| r.phi_r)
    }

    pub fn rcrb_db(&self) -> Option<f64> {
        self.radar.map(|r| r.rcrb_db)
    }
}

/// Evaluates one configuration. Model failures become `radar = None` with a
/// note; only an invalid configuration is an error.
pub fn evaluate_point(params: FamilyParams, scenario: &Scenario) -> Result<TradeoffPoint> {
    let family = params
        .kind()
        .ok_or_else(|| JcrError::InvalidArgument("trade-off points need a closed-form family".into()))?;
    let schedule = PreambleSchedule::build(params, scenario.grid);
    let (elements, aperture, span) = match &schedule {
        Ok(s) => (s.len(), s.aperture(), s.span()),
        Err(JcrError::ScheduleTooLong { span_s, .. }) => {
            let relaxed = PreambleSchedule::build(params, crate::waveform::SlotGrid::unbounded(scenario.grid.slot_interval))?;
            (relaxed.len(), relaxed.aperture(), *span_s)
        }
        Err(e) => return Err(e.clone()),
    };
    let mu = preamble_overhead(elements, &scenario.timing);
    let comm = CommMetrics::evaluate(scenario.comm_snr, &scenario.comm_eigenvalues, mu.clone().unwrap_or(0.0))?;
    let mut note = None;
    let radar = match (&schedule, &mu) {
        (Err(e), _) | (_, Err(e)) => {
            note = Some(e.to_string());
            None
        }
        (Ok(s), Ok(_)) => match crb_velocity(s, &scenario.scene, scenario.crb_snapshots).and_then(|c| radar_scalar(&c)) {
            Ok(r) => Some(r),
            Err(e @ (JcrError::NotIdentifiable(_) | JcrError::CrbDoesNotExist)) => {
                note = Some(e.to_string());
                None
            }
            Err(e) => return Err(e),
        },
    };
    Ok(TradeoffPoint {
        family,
        params,
        elements,
        aperture,
        span,
        mu: mu.unwrap_or(0.0),
        rate: comm.r,
        phi_c: comm.phi_c,
        dmmse_db: comm.dmmse_db,
        radar,
        on_hull: false,
        collinear: false,
        note,
    })
}

fn better(a: &TradeoffPoint, b: &TradeoffPoint) -> bool {
    match (a.phi_r(), b.phi_r()) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        _ => false,
    }
}

fn best_configuration(family: FamilyKind, m: usize, scenario: &Scenario) -> Result<Option<TradeoffPoint>> {
    let mut best: Option<TradeoffPoint> = None;
    for params in family_configurations(family, m) {
        let p = evaluate_point(params, scenario)?;
        if best.as_ref().is_none_or(|b| better(&p, b)) {
            best = Some(p);
        }
    }
    Ok(best)
}

/// One point per preamble count in `m_range`, in ascending `M`.
///
/// Counts the family cannot realize are skipped.
pub fn tradeoff_curve(
    family: FamilyKind,
    scenario: &Scenario,
    m_range: std::ops::RangeInclusive<usize>,
    rule: ParamRule,
) -> Result<Vec<TradeoffPoint>> {
    let ms: Vec<usize> = m_range.collect();
    let points: Vec<Option<TradeoffPoint>> = ms
        .par_iter()
        .map(|&m| match rule {
            ParamRule::VpCount => match vp_count_optimal_params(family, m) {
                Ok(opt) if !opt.mismatch => evaluate_point(opt.params, scenario).map(Some),
                Ok(_) | Err(JcrError::InfeasibleBudget { .. }) => Ok(None),
                Err(e) => Err(e),
            },
            ParamRule::Exhaustive => best_configuration(family, m, scenario),
        })
        .collect::<Result<_>>()?;
    Ok(points.into_iter().flatten().collect())
}

/// VP-count-rule parameters next to the CRB-optimal ones at one `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct VpComparison {
    pub elements: usize,
    pub vp_rule: TradeoffPoint,
    pub crb_optimal: TradeoffPoint,
    /// Both choices have the same parameters.
    pub agree: bool,
    /// Difference of the first parameter (`M1` or `p`), CRB-optimal minus VP rule.
    pub first_param_gap: i64,
}

/// Side-by-side VP-count and CRB-optimal parameters for a sparse family.
pub fn compare_vp_count_vs_crb(
    family: FamilyKind,
    scenario: &Scenario,
    m_range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<VpComparison>> {
    if family == FamilyKind::Uniform {
        return Err(JcrError::InvalidArgument("the VP-count comparison needs a sparse family".into()));
    }
    let vp = tradeoff_curve(family, scenario, m_range.clone(), ParamRule::VpCount)?;
    let crb = tradeoff_curve(family, scenario, m_range, ParamRule::Exhaustive)?;
    Ok(vp
        .into_iter()
        .filter_map(|v| {
            let c = crb.iter().find(|c| c.elements == v.elements)?.clone();
            let first = |p: &FamilyParams| p.pair().0.unwrap_or(0) as i64;
            Some(VpComparison {
                elements: v.elements,
                agree: v.params == c.params,
                first_param_gap: first(&c.params) - first(&v.params),
                vp_rule: v,
                crb_optimal: c,
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::ScenarioParams;

    fn scenario(targets: usize, distance: f64) -> Scenario {
        ScenarioParams { targets, target_distance: distance, ..Default::default() }.build().unwrap()
    }

    #[test]
    fn uniform_needs_more_preambles_than_targets() {
        let sc = scenario(30, 5.0);
        let curve = tradeoff_curve(FamilyKind::Uniform, &sc, 3..=40, ParamRule::VpCount).unwrap();
        for p in &curve {
            assert_eq!(p.feasible(), p.elements > 30, "M = {}", p.elements);
        }
    }

    #[test]
    fn comm_cost_improves_with_fewer_preambles() {
        let sc = scenario(1, 100.0);
        let curve = tradeoff_curve(FamilyKind::Nested, &sc, 3..=40, ParamRule::VpCount).unwrap();
        assert_eq!(curve.len(), 38);
        for w in curve.windows(2) {
            assert!(w[0].phi_c < w[1].phi_c);
        }
    }

    #[test]
    fn exhaustive_is_never_worse_than_the_rule() {
        let sc = scenario(2, 20.0);
        let vp = tradeoff_curve(FamilyKind::Wichmann, &sc, 3..=20, ParamRule::VpCount).unwrap();
        let ex = tradeoff_curve(FamilyKind::Wichmann, &sc, 3..=20, ParamRule::Exhaustive).unwrap();
        for (a, b) in vp.iter().zip(&ex) {
            assert_eq!(a.elements, b.elements);
            if let (Some(x), Some(y)) = (a.phi_r(), b.phi_r()) {
                assert!(y <= x);
            }
        }
    }

    #[test]
    fn span_limit_marks_points_infeasible() {
        let sc = ScenarioParams { aperture_limit_s: 1e-3, ..Default::default() }.build().unwrap();
        let p = evaluate_point(FamilyParams::Wichmann { p: 3, q: 5 }, &sc).unwrap();
        assert!(!p.feasible());
        assert!(p.note.unwrap().contains("spans"));
        let p = evaluate_point(FamilyParams::Uniform { elements: 40 }, &sc).unwrap();
        assert!(p.feasible());
    }
}
