use std::f64::consts::{LN_10, LOG10_2};

use super::{Hull, TradeoffPoint};
use crate::error::{JcrError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Weighted,
    CrbConstrained,
    DmmseConstrained,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Weighted => "weighted",
            ProblemKind::CrbConstrained => "crb-constrained",
            ProblemKind::DmmseConstrained => "dmmse-constrained",
        }
    }
}

/// Upper bound on the radar CRB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrbConstraint {
    /// Geometric-mean CRB in (m/s)².
    Linear(f64),
    /// Bound on `rcrb_db`.
    Db(f64),
}

impl CrbConstraint {
    /// Equivalent bound on `phi_r`.
    pub fn phi_r(self) -> f64 {
        match self {
            CrbConstraint::Linear(v) => v.ln(),
            CrbConstraint::Db(db) => db * LN_10 / 10.0,
        }
    }
}

/// Upper bound on the communication DMMSE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DmmseConstraint {
    /// Bound on `phi_c` in bits.
    Bits(f64),
    /// Bound on `dmmse_db`.
    Db(f64),
}

impl DmmseConstraint {
    /// Equivalent bound on `phi_c`.
    pub fn phi_c(self) -> f64 {
        match self {
            DmmseConstraint::Bits(v) => v,
            DmmseConstraint::Db(db) => db / (10.0 * LOG10_2),
        }
    }
}

/// Time-sharing between two hull vertices: `weight` of the time on `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mixture {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub phi_c: f64,
    pub phi_r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSolution {
    pub problem: ProblemKind,
    /// Index of the chosen point in the input slice.
    pub index: usize,
    pub objective: f64,
    /// Constraint bound minus achieved value; zero for the weighted problem.
    pub slack: f64,
    /// Hull mixture that meets a constraint with equality, when one exists.
    pub mixture: Option<Mixture>,
}

fn prefer(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Minimizes `(1 - w_c) phi_r~ + w_c phi_c~` over the hull vertices.
pub fn solve_weighted(points: &[TradeoffPoint], hull: &Hull, omega_c: f64) -> Result<DesignSolution> {
    if !(0.0..=1.0).contains(&omega_c) {
        return Err(JcrError::InvalidArgument(format!("communication weight must lie in [0, 1], got {omega_c}")));
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for &i in &hull.vertices {
        let (x, y) = hull.normalization.apply(&points[i]).ok_or(JcrError::NoFeasiblePoints)?;
        let obj = (1.0 - omega_c) * y + omega_c * x;
        if best.is_none_or(|(o, _, m)| prefer((obj, points[i].elements), (o, m))) {
            best = Some((obj, i, points[i].elements));
        }
    }
    let (objective, index, _) = best.ok_or(JcrError::NoFeasiblePoints)?;
    Ok(DesignSolution { problem: ProblemKind::Weighted, index, objective, slack: 0.0, mixture: None })
}

/// Smallest `phi_c` among feasible points with `phi_r <= bound`.
pub fn solve_crb_constrained(points: &[TradeoffPoint], hull: Option<&Hull>, bound: CrbConstraint) -> Result<DesignSolution> {
    let limit = bound.phi_r();
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, p) in points.iter().enumerate() {
        if p.phi_r().is_some_and(|r| r <= limit) && best.is_none_or(|(o, _, m)| prefer((p.phi_c, p.elements), (o, m))) {
            best = Some((p.phi_c, i, p.elements));
        }
    }
    let (objective, index, _) = best.ok_or_else(|| JcrError::ConstraintInfeasible(format!("phi_r <= {limit:.6}")))?;
    let slack = limit - points[index].phi_r().expect("feasible");
    let mixture = hull.and_then(|h| crossing(points, h, |p| p.phi_r().expect("feasible"), limit));
    Ok(DesignSolution { problem: ProblemKind::CrbConstrained, index, objective, slack, mixture })
}

/// Smallest `phi_r` among hull points with `phi_c <= bound`.
pub fn solve_dmmse_constrained(points: &[TradeoffPoint], hull: &Hull, bound: DmmseConstraint) -> Result<DesignSolution> {
    let limit = bound.phi_c();
    let tol = 1e-12 * limit.abs().max(1.0);
    let mut best: Option<(f64, usize, usize)> = None;
    for &i in &hull.members {
        let p = &points[i];
        if p.phi_c <= limit + tol {
            let r = p.phi_r().ok_or(JcrError::NoFeasiblePoints)?;
            if best.is_none_or(|(o, _, m)| prefer((r, p.elements), (o, m))) {
                best = Some((r, i, p.elements));
            }
        }
    }
    let (objective, index, _) = best.ok_or_else(|| JcrError::ConstraintInfeasible(format!("phi_c <= {limit:.6}")))?;
    let slack = (limit - points[index].phi_c).max(0.0);
    let mixture = crossing(points, hull, |p| p.phi_c, limit);
    Ok(DesignSolution { problem: ProblemKind::DmmseConstrained, index, objective, slack, mixture })
}

/// Hull segment on which `metric` passes through `limit`, as a mixture.
fn crossing(points: &[TradeoffPoint], hull: &Hull, metric: impl Fn(&TradeoffPoint) -> f64, limit: f64) -> Option<Mixture> {
    hull.vertices.windows(2).find_map(|w| {
        let (a, b) = (&points[w[0]], &points[w[1]]);
        let (ma, mb) = (metric(a), metric(b));
        let (lo, hi) = if ma <= mb { (ma, mb) } else { (mb, ma) };
        if !(lo < limit && limit < hi) {
            return None;
        }
        let weight = (limit - mb) / (ma - mb);
        let ra = a.phi_r().expect("feasible");
        let rb = b.phi_r().expect("feasible");
        Some(Mixture {
            a: w[0],
            b: w[1],
            weight,
            phi_c: weight * a.phi_c + (1.0 - weight) * b.phi_c,
            phi_r: weight * ra + (1.0 - weight) * rb,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::RadarMetrics;
    use crate::optimizer::convex_hull;
    use crate::waveform::{FamilyKind, FamilyParams};

    fn point(m: usize, phi_c: f64, phi_r: Option<f64>) -> TradeoffPoint {
        TradeoffPoint {
            family: FamilyKind::Nested,
            params: FamilyParams::Uniform { elements: m },
            elements: m,
            aperture: m - 1,
            span: 0.0,
            mu: 1.0,
            rate: 1.0,
            phi_c,
            dmmse_db: 10.0 * LOG10_2 * phi_c,
            radar: phi_r.map(|r| RadarMetrics { phi_r: r, rcrb_db: 10.0 * r / LN_10 }),
            on_hull: false,
            collinear: false,
            note: None,
        }
    }

    fn curve() -> Vec<TradeoffPoint> {
        vec![
            point(3, -10.0, Some(0.0)),
            point(4, -9.0, Some(-3.0)),
            point(5, -8.0, Some(-5.0)),
            point(6, -7.0, Some(-4.0)),
            point(7, -6.0, None),
        ]
    }

    #[test]
    fn weighted_extremes() {
        let mut pts = curve();
        let hull = convex_hull(&mut pts, None).unwrap();
        assert_eq!(pts[solve_weighted(&pts, &hull, 0.0).unwrap().index].elements, 5);
        assert_eq!(pts[solve_weighted(&pts, &hull, 1.0).unwrap().index].elements, 3);
        assert!(solve_weighted(&pts, &hull, 1.5).is_err());
    }

    #[test]
    fn weighted_tie_prefers_fewer_preambles() {
        let mut pts = vec![point(3, 0.0, Some(1.0)), point(4, 1.0, Some(0.0))];
        let hull = convex_hull(&mut pts, None).unwrap();
        assert_eq!(pts[solve_weighted(&pts, &hull, 0.5).unwrap().index].elements, 3);
    }

    #[test]
    fn weighted_choice_is_monotone() {
        let mut pts = curve();
        let hull = convex_hull(&mut pts, None).unwrap();
        let mut last = usize::MAX;
        for i in 0..=20 {
            let m = pts[solve_weighted(&pts, &hull, i as f64 / 20.0).unwrap().index].elements;
            assert!(m <= last);
            last = m;
        }
    }

    #[test]
    fn crb_constraint_cases() {
        let mut pts = curve();
        let hull = convex_hull(&mut pts, None).unwrap();
        assert!(matches!(
            solve_crb_constrained(&pts, Some(&hull), CrbConstraint::Linear(0.0)),
            Err(JcrError::ConstraintInfeasible(_))
        ));
        let slack = solve_crb_constrained(&pts, Some(&hull), CrbConstraint::Linear(10.0)).unwrap();
        assert_eq!(pts[slack.index].elements, 3);
        let s = solve_crb_constrained(&pts, Some(&hull), CrbConstraint::Linear((-4.0f64).exp())).unwrap();
        assert_eq!(pts[s.index].elements, 5);
        assert!(s.slack >= 0.0);
        let mix = s.mixture.unwrap();
        assert!((mix.phi_r + 4.0).abs() < 1e-12);
        assert!(mix.phi_c < pts[s.index].phi_c);
    }

    #[test]
    fn crb_constraint_in_db() {
        let db = CrbConstraint::Db(-38.2391);
        assert!((db.phi_r() - 1.5e-4f64.ln()).abs() < 1e-4);
    }

    #[test]
    fn dmmse_constraint_cases() {
        let mut pts = curve();
        let hull = convex_hull(&mut pts, None).unwrap();
        let s = solve_dmmse_constrained(&pts, &hull, DmmseConstraint::Bits(-9.0)).unwrap();
        assert_eq!(pts[s.index].elements, 4);
        assert_eq!(s.slack, 0.0);
        let s = solve_dmmse_constrained(&pts, &hull, DmmseConstraint::Db(-8.5 * 10.0 * LOG10_2)).unwrap();
        assert_eq!(pts[s.index].elements, 4);
        assert!(matches!(
            solve_dmmse_constrained(&pts, &hull, DmmseConstraint::Bits(-11.0)),
            Err(JcrError::ConstraintInfeasible(_))
        ));
    }
}
