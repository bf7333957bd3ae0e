//! Preamble schedules and their difference co-waveforms.
//!
//! A schedule places `M` preambles on an integer slot grid of pitch `T_D`
//! inside a coherent processing interval. Three closed-form families are
//! supported (uniform, two-level nested, Wichmann) plus arbitrary position
//! sets. Co-waveform facts (lags, multiplicities, hole-freeness) always come
//! from brute-force enumeration; the closed-form VP counts are advisory.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{JcrError, Result};

/// Schedule family without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyKind {
    Uniform,
    Nested,
    Wichmann,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 3] = [FamilyKind::Uniform, FamilyKind::Nested, FamilyKind::Wichmann];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Uniform => "uniform",
            FamilyKind::Nested => "nested",
            FamilyKind::Wichmann => "wichmann",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Family together with its configuration parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyParams {
    Uniform { elements: usize },
    Nested { m1: usize, m2: usize },
    Wichmann { p: usize, q: usize },
    /// Arbitrary position set.
    Custom,
}

impl FamilyParams {
    pub fn kind(&self) -> Option<FamilyKind> {
        match self {
            FamilyParams::Uniform { .. } => Some(FamilyKind::Uniform),
            FamilyParams::Nested { .. } => Some(FamilyKind::Nested),
            FamilyParams::Wichmann { .. } => Some(FamilyKind::Wichmann),
            FamilyParams::Custom => None,
        }
    }

    /// The two integer parameters as printed in tables (`M_U, -`, `M1, M2`, `p, q`).
    pub fn pair(&self) -> (Option<usize>, Option<usize>) {
        match *self {
            FamilyParams::Uniform { elements } => (Some(elements), None),
            FamilyParams::Nested { m1, m2 } => (Some(m1), Some(m2)),
            FamilyParams::Wichmann { p, q } => (Some(p), Some(q)),
            FamilyParams::Custom => (None, None),
        }
    }
}

impl fmt::Display for FamilyParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyParams::Uniform { elements } => write!(f, "uniform({elements})"),
            FamilyParams::Nested { m1, m2 } => write!(f, "nested({m1},{m2})"),
            FamilyParams::Wichmann { p, q } => write!(f, "wichmann({p},{q})"),
            FamilyParams::Custom => f.write_str("custom"),
        }
    }
}

/// Slot pitch and the time budget a schedule has to fit into.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotGrid {
    /// Doppler Nyquist sampling interval `T_D` in seconds.
    pub slot_interval: f64,
    /// Longest allowed span `max(position) * T_D` in seconds.
    pub cpi: f64,
}

impl SlotGrid {
    pub fn new(slot_interval: f64, cpi: f64) -> Self {
        Self { slot_interval, cpi }
    }

    /// A grid whose span is not limited.
    pub fn unbounded(slot_interval: f64) -> Self {
        Self { slot_interval, cpi: f64::INFINITY }
    }

    /// `T_D = lambda / (4 v_max)`.
    pub fn nyquist(wavelength: f64, max_velocity: f64, cpi: f64) -> Self {
        Self { slot_interval: wavelength / (4.0 * max_velocity), cpi }
    }
}

/// Ordered preamble slot positions plus timing. Positions start at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PreambleSchedule {
    positions: Vec<usize>,
    params: FamilyParams,
    grid: SlotGrid,
}

impl PreambleSchedule {
    /// `{0, 1, ..., M_U - 1}`.
    pub fn uniform(elements: usize, grid: SlotGrid) -> Result<Self> {
        if elements < 2 {
            return Err(JcrError::InvalidSchedule(format!(
                "uniform schedule needs at least 2 preambles, got {elements}"
            )));
        }
        Self::checked((0..elements).collect(), FamilyParams::Uniform { elements }, grid)
    }

    /// Two-level nested schedule `{1..M1} U {k (M1 + 1) : k = 1..M2}`, shifted to start at 0.
    pub fn nested(m1: usize, m2: usize, grid: SlotGrid) -> Result<Self> {
        if m1 == 0 || m2 == 0 {
            return Err(JcrError::InvalidSchedule(format!(
                "nested schedule needs M1 >= 1 and M2 >= 1, got ({m1}, {m2})"
            )));
        }
        let inner = 1..=m1;
        let outer = (1..=m2).map(|k| k * (m1 + 1));
        let positions: Vec<usize> = inner.chain(outer).map(|x| x - 1).collect();
        Self::checked(positions, FamilyParams::Nested { m1, m2 }, grid)
    }

    /// Wichmann ruler with spacings
    /// `{1^(p), p+1, (2p+1)^(p), (4p+3)^(q), (2p+2)^(p+1), 1^(p)}`.
    ///
    /// Gives `4p + q + 3` preambles and a hole-free co-waveform of extent
    /// `4p(p+q+2) + 3(q+1)`.
    pub fn wichmann(p: usize, q: usize, grid: SlotGrid) -> Result<Self> {
        let positions = cumulative(&wichmann_spacings(p, q));
        if positions.len() < 2 {
            return Err(JcrError::InvalidSchedule(format!("wichmann({p},{q}) has fewer than 2 preambles")));
        }
        Self::checked(positions, FamilyParams::Wichmann { p, q }, grid)
    }

    /// Arbitrary distinct positions; re-anchored so the first one is 0.
    pub fn from_positions(mut positions: Vec<usize>, grid: SlotGrid) -> Result<Self> {
        positions.sort_unstable();
        if positions.windows(2).any(|w| w[0] == w[1]) {
            return Err(JcrError::InvalidSchedule("positions must be distinct".into()));
        }
        if positions.len() < 2 {
            return Err(JcrError::InvalidSchedule("at least 2 positions are required".into()));
        }
        let origin = positions[0];
        let positions = positions.into_iter().map(|x| x - origin).collect();
        Self::checked(positions, FamilyParams::Custom, grid)
    }

    /// Builds the schedule for a family with explicit parameters.
    pub fn build(params: FamilyParams, grid: SlotGrid) -> Result<Self> {
        match params {
            FamilyParams::Uniform { elements } => Self::uniform(elements, grid),
            FamilyParams::Nested { m1, m2 } => Self::nested(m1, m2, grid),
            FamilyParams::Wichmann { p, q } => Self::wichmann(p, q, grid),
            FamilyParams::Custom => Err(JcrError::InvalidSchedule("custom schedules need explicit positions".into())),
        }
    }

    fn checked(positions: Vec<usize>, params: FamilyParams, grid: SlotGrid) -> Result<Self> {
        if !(grid.slot_interval > 0.0) {
            return Err(JcrError::InvalidSchedule(format!("slot interval must be positive, got {}", grid.slot_interval)));
        }
        let span = *positions.last().expect("non-empty") as f64 * grid.slot_interval;
        if span > grid.cpi * (1.0 + 1e-12) {
            return Err(JcrError::ScheduleTooLong { span_s: span, limit_s: grid.cpi });
        }
        Ok(Self { positions, params, grid })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn params(&self) -> FamilyParams {
        self.params
    }

    pub fn family(&self) -> Option<FamilyKind> {
        self.params.kind()
    }

    pub fn grid(&self) -> SlotGrid {
        self.grid
    }

    pub fn slot_interval(&self) -> f64 {
        self.grid.slot_interval
    }

    /// Largest position, in slots.
    pub fn aperture(&self) -> usize {
        *self.positions.last().expect("non-empty")
    }

    /// `max(position) * T_D` in seconds.
    pub fn span(&self) -> f64 {
        self.aperture() as f64 * self.grid.slot_interval
    }

    pub fn cowaveform(&self) -> CoWaveform {
        difference_cowaveform(&self.positions)
    }
}

fn wichmann_spacings(p: usize, q: usize) -> Vec<usize> {
    let mut d = Vec::with_capacity(4 * p + q + 2);
    d.extend(std::iter::repeat_n(1, p));
    d.push(p + 1);
    d.extend(std::iter::repeat_n(2 * p + 1, p));
    d.extend(std::iter::repeat_n(4 * p + 3, q));
    d.extend(std::iter::repeat_n(2 * p + 2, p + 1));
    d.extend(std::iter::repeat_n(1, p));
    d
}

fn cumulative(spacings: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(spacings.len() + 1);
    out.push(0);
    let mut acc = 0;
    for &s in spacings {
        acc += s;
        out.push(acc);
    }
    out
}

/// Non-negative half of a difference co-waveform (the negative half mirrors it).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoWaveform {
    /// Sorted distinct non-negative lags.
    pub lags: Vec<usize>,
    /// Ordered pairs realizing each entry of `lags`.
    pub multiplicity: Vec<usize>,
    /// Largest `L` with `{0, ..., L}` contained in `lags`.
    pub contiguous_extent: usize,
    pub hole_free: bool,
}

impl CoWaveform {
    /// Number of distinct positive lags.
    pub fn vp_count_one_sided(&self) -> usize {
        self.lags.len() - 1
    }

    pub fn max_lag(&self) -> usize {
        *self.lags.last().expect("lag 0 is always present")
    }

    pub fn multiplicity_of(&self, lag: usize) -> usize {
        self.lags.binary_search(&lag).map(|i| self.multiplicity[i]).unwrap_or(0)
    }

    /// Missing lags between 0 and the largest lag.
    pub fn holes(&self) -> Vec<usize> {
        (0..=self.max_lag()).filter(|l| self.lags.binary_search(l).is_err()).collect()
    }
}

/// Enumerates `{m_p - m_q}` over all ordered pairs.
pub fn difference_cowaveform(positions: &[usize]) -> CoWaveform {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &a in positions {
        for &b in positions {
            if a >= b {
                *counts.entry(a - b).or_default() += 1;
            }
        }
    }
    let lags: Vec<usize> = counts.keys().copied().collect();
    let multiplicity: Vec<usize> = counts.values().copied().collect();
    let contiguous_extent = lags.iter().enumerate().take_while(|&(i, &l)| i == l).count().saturating_sub(1);
    let hole_free = contiguous_extent == *lags.last().unwrap_or(&0);
    CoWaveform { lags, multiplicity, contiguous_extent, hole_free }
}

/// One-sided VP count from the family's closed form (lag 0 excluded).
pub fn vp_count_closed_form(params: FamilyParams) -> Option<usize> {
    match params {
        FamilyParams::Uniform { elements } => Some(elements.saturating_sub(1)),
        FamilyParams::Nested { m1, m2 } => Some((m2 * (m1 + 1)).saturating_sub(1)),
        FamilyParams::Wichmann { p, q } => Some(4 * p * (p + q + 2) + 3 * (q + 1)),
        FamilyParams::Custom => None,
    }
}

/// Preamble count from the family's closed form.
pub fn element_count_closed_form(params: FamilyParams) -> Option<usize> {
    match params {
        FamilyParams::Uniform { elements } => Some(elements),
        FamilyParams::Nested { m1, m2 } => Some(m1 + m2),
        FamilyParams::Wichmann { p, q } => Some(4 * p + q + 3),
        FamilyParams::Custom => None,
    }
}

/// Parameters that maximize the VP count for a preamble budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VpOptimal {
    pub params: FamilyParams,
    /// Preamble count of the resulting schedule, by enumeration.
    pub elements: usize,
    /// Set when `elements` differs from the requested budget.
    pub mismatch: bool,
}

/// VP-count-optimal configuration for a budget of `budget` preambles.
///
/// * Uniform: `M_U = budget`.
/// * Nested: `M1 = M2 = M/2` for even `M`; `M1 = (M-1)/2`, `M2 = (M+1)/2` for odd `M`.
/// * Wichmann: `p = round((M-4)/6)` and `q = M - 4p - 3`, both clamped at 0.
pub fn vp_count_optimal_params(family: FamilyKind, budget: usize) -> Result<VpOptimal> {
    if budget < 2 {
        return Err(JcrError::InfeasibleBudget { budget });
    }
    let params = match family {
        FamilyKind::Uniform => FamilyParams::Uniform { elements: budget },
        FamilyKind::Nested => {
            let m1 = if budget.is_multiple_of(2) { budget / 2 } else { (budget - 1) / 2 };
            FamilyParams::Nested { m1, m2: budget - m1 }
        }
        FamilyKind::Wichmann => {
            let p = ((budget as f64 - 4.0) / 6.0).round().max(0.0) as usize;
            let q = (budget as isize - 4 * p as isize - 3).max(0) as usize;
            FamilyParams::Wichmann { p, q }
        }
    };
    let elements = match params {
        FamilyParams::Wichmann { p, q } => cumulative(&wichmann_spacings(p, q)).len(),
        _ => element_count_closed_form(params).expect("closed-form family"),
    };
    if elements < 2 {
        return Err(JcrError::InfeasibleBudget { budget });
    }
    Ok(VpOptimal { params, elements, mismatch: elements != budget })
}

/// Every parameter choice of `family` that yields exactly `elements` preambles.
pub fn family_configurations(family: FamilyKind, elements: usize) -> Vec<FamilyParams> {
    match family {
        FamilyKind::Uniform if elements >= 2 => vec![FamilyParams::Uniform { elements }],
        FamilyKind::Nested if elements >= 2 => {
            (1..elements).map(|m1| FamilyParams::Nested { m1, m2: elements - m1 }).collect()
        }
        FamilyKind::Wichmann if elements >= 3 => (0..=(elements - 3) / 4)
            .map(|p| FamilyParams::Wichmann { p, q: elements - 3 - 4 * p })
            .collect(),
        _ => Vec::new(),
    }
}

/// Frame layout that determines preamble overhead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTiming {
    /// Preamble length `P` in symbols.
    pub preamble_symbols: usize,
    /// Symbol period `T_s` in seconds.
    pub symbol_period: f64,
    /// Inter-frame space in seconds.
    pub ifs: f64,
    /// CPI duration `T` in seconds.
    pub cpi: f64,
}

impl FrameTiming {
    /// Time taken by one preamble plus its inter-frame space.
    pub fn per_preamble(&self) -> f64 {
        self.preamble_symbols as f64 * self.symbol_period + self.ifs
    }
}

/// Fraction `mu` of CPI symbols left for data when `preambles` frames are sent:
/// `1 - mu = n (P T_s + T_IFS) / T`.
pub fn preamble_overhead(preambles: usize, timing: &FrameTiming) -> Result<f64> {
    let overhead = preambles as f64 * timing.per_preamble() / timing.cpi;
    if overhead > 1.0 {
        return Err(JcrError::OverheadExceedsCpi { overhead });
    }
    Ok(1.0 - overhead)
}
