use super::TradeoffPoint;
use crate::error::{JcrError, Result};

/// Tolerance in normalized coordinates for hull membership tests.
pub const HULL_TOLERANCE: f64 = 1e-9;

/// Min-max scaling of `(phi_c, phi_r)` to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub phi_c_min: f64,
    pub phi_c_max: f64,
    pub phi_r_min: f64,
    pub phi_r_max: f64,
}

impl Normalization {
    /// Ranges over every feasible point in `points`.
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a TradeoffPoint>) -> Result<Self> {
        let mut n = Self {
            phi_c_min: f64::INFINITY,
            phi_c_max: f64::NEG_INFINITY,
            phi_r_min: f64::INFINITY,
            phi_r_max: f64::NEG_INFINITY,
        };
        let mut any = false;
        for p in points {
            if let Some(r) = p.phi_r() {
                any = true;
                n.phi_c_min = n.phi_c_min.min(p.phi_c);
                n.phi_c_max = n.phi_c_max.max(p.phi_c);
                n.phi_r_min = n.phi_r_min.min(r);
                n.phi_r_max = n.phi_r_max.max(r);
            }
        }
        if any {
            Ok(n)
        } else {
            Err(JcrError::NoFeasiblePoints)
        }
    }

    fn scale(v: f64, lo: f64, hi: f64) -> f64 {
        if hi > lo {
            (v - lo) / (hi - lo)
        } else {
            0.0
        }
    }

    pub fn phi_c(&self, v: f64) -> f64 {
        Self::scale(v, self.phi_c_min, self.phi_c_max)
    }

    pub fn phi_r(&self, v: f64) -> f64 {
        Self::scale(v, self.phi_r_min, self.phi_r_max)
    }

    /// Normalized `(phi_c, phi_r)` of a feasible point.
    pub fn apply(&self, p: &TradeoffPoint) -> Option<(f64, f64)> {
        p.phi_r().map(|r| (self.phi_c(p.phi_c), self.phi_r(r)))
    }
}

/// Lower-left convex frontier of a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct Hull {
    /// Indices of the extreme points, ascending in `phi_c`.
    pub vertices: Vec<usize>,
    /// Vertices plus points lying on a segment between two of them, ascending in `phi_c`.
    pub members: Vec<usize>,
    pub normalization: Normalization,
}

impl Hull {
    /// Frontier height at normalized abscissa `x`; flat to the right of the
    /// last vertex and undefined (infinite) to the left of the first.
    pub fn frontier(&self, points: &[TradeoffPoint], x: f64) -> f64 {
        let xy: Vec<(f64, f64)> = self.vertices.iter().map(|&i| self.normalization.apply(&points[i]).expect("feasible")).collect();
        if x < xy[0].0 - HULL_TOLERANCE {
            return f64::INFINITY;
        }
        for w in xy.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x <= x1 {
                if x1 - x0 <= 0.0 {
                    return y0.min(y1);
                }
                return y0 + (y1 - y0) * ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
            }
        }
        xy[xy.len() - 1].1
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Builds the hull of the feasible points and sets `on_hull` / `collinear`.
///
/// With `normalization = None` the ranges of `points` themselves are used.
pub fn convex_hull(points: &mut [TradeoffPoint], normalization: Option<Normalization>) -> Result<Hull> {
    let norm = match normalization {
        Some(n) => n,
        None => Normalization::from_points(points.iter())?,
    };
    let mut idx: Vec<usize> = (0..points.len()).filter(|&i| points[i].feasible()).collect();
    if idx.is_empty() {
        return Err(JcrError::NoFeasiblePoints);
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|p| norm.apply(p).unwrap_or((f64::NAN, f64::NAN))).collect();
    idx.sort_by(|&a, &b| {
        xy[a].0.total_cmp(&xy[b].0).then(xy[a].1.total_cmp(&xy[b].1)).then(points[a].elements.cmp(&points[b].elements))
    });

    // Monotone chain lower hull, dropping collinear points.
    let mut chain: Vec<usize> = Vec::new();
    for &i in &idx {
        if let Some(&last) = chain.last() {
            if (xy[i].0 - xy[last].0).abs() <= HULL_TOLERANCE && xy[i].1 >= xy[last].1 - HULL_TOLERANCE {
                continue;
            }
        }
        // Pop the middle point unless it lies strictly below the chord.
        while chain.len() >= 2 {
            let (o, a, b) = (xy[chain[chain.len() - 2]], xy[chain[chain.len() - 1]], xy[i]);
            let chord = ((b.0 - o.0).powi(2) + (b.1 - o.1).powi(2)).sqrt();
            if cross(o, a, b) > HULL_TOLERANCE * chord {
                break;
            }
            chain.pop();
        }
        chain.push(i);
    }
    // Keep the non-increasing part: up to the lowest vertex.
    let lowest = (0..chain.len()).min_by(|&a, &b| xy[chain[a]].1.total_cmp(&xy[chain[b]].1).then(a.cmp(&b))).expect("non-empty");
    chain.truncate(lowest + 1);

    let mut members = chain.clone();
    for &i in &idx {
        if chain.contains(&i) {
            continue;
        }
        let on_segment = chain.windows(2).any(|w| {
            let (a, b) = (xy[w[0]], xy[w[1]]);
            let p = xy[i];
            let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
            let within = p.0 >= a.0 - HULL_TOLERANCE && p.0 <= b.0 + HULL_TOLERANCE;
            within && len > 0.0 && (cross(a, b, p) / len).abs() <= HULL_TOLERANCE
        });
        if on_segment {
            members.push(i);
        }
    }
    members.sort_by(|&a, &b| xy[a].0.total_cmp(&xy[b].0).then(points[a].elements.cmp(&points[b].elements)));

    for p in points.iter_mut() {
        p.on_hull = false;
        p.collinear = false;
    }
    for &i in &members {
        points[i].on_hull = true;
        points[i].collinear = !chain.contains(&i);
    }
    Ok(Hull { vertices: chain, members, normalization: norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::RadarMetrics;
    use crate::waveform::{FamilyKind, FamilyParams};

    pub(crate) fn point(m: usize, phi_c: f64, phi_r: Option<f64>) -> TradeoffPoint {
        TradeoffPoint {
            family: FamilyKind::Uniform,
            params: FamilyParams::Uniform { elements: m },
            elements: m,
            aperture: m - 1,
            span: 0.0,
            mu: 1.0,
            rate: 1.0,
            phi_c,
            dmmse_db: 0.0,
            radar: phi_r.map(|r| RadarMetrics { phi_r: r, rcrb_db: r }),
            on_hull: false,
            collinear: false,
            note: None,
        }
    }

    #[test]
    fn single_point() {
        let mut pts = vec![point(3, -5.0, Some(1.0)), point(4, -4.0, None)];
        let h = convex_hull(&mut pts, None).unwrap();
        assert_eq!(h.vertices, vec![0]);
        assert!(pts[0].on_hull && !pts[1].on_hull);
    }

    #[test]
    fn collinear_middle_is_marked() {
        let mut pts = vec![point(3, 0.0, Some(2.0)), point(4, 1.0, Some(1.0)), point(5, 2.0, Some(0.0))];
        let h = convex_hull(&mut pts, None).unwrap();
        assert_eq!(h.vertices, vec![0, 2]);
        assert_eq!(h.members, vec![0, 1, 2]);
        assert!(pts.iter().all(|p| p.on_hull));
        assert!(pts[1].collinear && !pts[0].collinear);
    }

    #[test]
    fn interior_and_dominated_points_are_off_hull() {
        let mut pts = vec![
            point(3, 0.0, Some(10.0)),
            point(4, 1.0, Some(9.5)),
            point(5, 2.0, Some(4.0)),
            point(6, 3.0, Some(3.0)),
            point(7, 4.0, Some(3.5)),
        ];
        let h = convex_hull(&mut pts, None).unwrap();
        assert_eq!(h.vertices, vec![0, 2, 3]);
        assert!(!pts[1].on_hull && !pts[4].on_hull);
        for p in &pts {
            let (x, y) = h.normalization.apply(p).unwrap();
            assert!(y >= h.frontier(&pts, x) - HULL_TOLERANCE);
        }
    }

    #[test]
    fn no_feasible_points() {
        let mut pts = vec![point(3, 0.0, None)];
        assert_eq!(convex_hull(&mut pts, None), Err(JcrError::NoFeasiblePoints));
    }
}
