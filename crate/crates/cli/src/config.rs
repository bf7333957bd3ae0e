//! Experiment configuration: a TOML document with one section per concern.
//!
//! Every key has a default, so an empty document is a valid configuration.
//! Unknown keys are rejected.

use std::path::Path;

use jcrwave_core::optimizer::{ParamRule, ScenarioParams};
use jcrwave_core::{EigenvalueMode, FamilyKind};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Parse(String),
    #[error("invalid override `{0}`: expected key=value")]
    OverrideSyntax(String),
    #[error("override `{key}`: {message}")]
    Override { key: String, message: String },
    #[error("`{key}`: {message}")]
    Invalid { key: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Uniform,
    Nested,
    Wichmann,
}

impl From<Family> for FamilyKind {
    fn from(f: Family) -> Self {
        match f {
            Family::Uniform => FamilyKind::Uniform,
            Family::Nested => FamilyKind::Nested,
            Family::Wichmann => FamilyKind::Wichmann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    VpCount,
    Exhaustive,
}

impl From<Rule> for ParamRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::VpCount => ParamRule::VpCount,
            Rule::Exhaustive => ParamRule::Exhaustive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Eigenvalues {
    Expected,
    Realization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    DirectMusic,
    DaMusic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub carrier_hz: f64,
    pub sample_rate_hz: f64,
    pub cpi_s: f64,
    pub preamble_symbols: usize,
    pub ifs_s: f64,
    pub max_velocity_mps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slot_interval_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aperture_limit_s: Option<f64>,
    pub targets: usize,
    pub velocities_mps: Vec<f64>,
    pub velocity_min_mps: f64,
    pub velocity_max_mps: f64,
    pub distances_m: Vec<f64>,
    pub rcs_dbsm: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub symbol_energy_j: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation_gain: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_power_w: Option<f64>,
    pub noise_figure_db: f64,
    pub temperature_k: f64,
    pub crb_snapshots: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let p = ScenarioParams::default();
        Self {
            carrier_hz: p.carrier_hz,
            sample_rate_hz: p.sample_rate_hz,
            cpi_s: p.cpi_s,
            preamble_symbols: p.preamble_symbols,
            ifs_s: p.ifs_s,
            max_velocity_mps: p.max_velocity,
            slot_interval_s: None,
            aperture_limit_s: None,
            targets: p.targets,
            velocities_mps: Vec::new(),
            velocity_min_mps: p.velocity_min,
            velocity_max_mps: p.velocity_max,
            distances_m: vec![5.0, 20.0, 100.0],
            rcs_dbsm: p.rcs_dbsm,
            tx_gain_db: p.tx_gain_db,
            rx_gain_db: p.rx_gain_db,
            symbol_energy_j: p.symbol_energy,
            correlation_gain: None,
            noise_power_w: None,
            noise_figure_db: p.noise_figure_db,
            temperature_k: p.temperature_k,
            crb_snapshots: p.crb_snapshots,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommConfig {
    pub distance_m: f64,
    pub pathloss_exponent: f64,
    pub taps: usize,
    pub tap_decay_db: f64,
    pub array_gain_db: f64,
    pub block_size: usize,
    pub eigenvalues: Eigenvalues,
}

impl Default for CommConfig {
    fn default() -> Self {
        let p = ScenarioParams::default();
        Self {
            distance_m: p.comm_distance,
            pathloss_exponent: p.pathloss_exponent,
            taps: p.comm_taps,
            tap_decay_db: p.comm_tap_decay_db,
            array_gain_db: p.comm_array_gain_db,
            block_size: p.block_size,
            eigenvalues: Eigenvalues::Expected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoarrayConfig {
    pub family: Family,
    /// `[M_U]`, `[M1, M2]` or `[p, q]`.
    pub params: Vec<usize>,
    /// Explicit positions; used instead of `family`/`params` when non-empty.
    pub positions: Vec<usize>,
}

impl Default for CoarrayConfig {
    fn default() -> Self {
        Self { family: Family::Wichmann, params: vec![1, 1], positions: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TradeoffConfig {
    pub families: Vec<Family>,
    pub m_min: usize,
    pub m_max: usize,
    pub rule: Rule,
    pub target_counts: Vec<usize>,
}

impl Default for TradeoffConfig {
    fn default() -> Self {
        Self {
            families: vec![Family::Uniform, Family::Nested, Family::Wichmann],
            m_min: 3,
            m_max: 40,
            rule: Rule::VpCount,
            target_counts: vec![1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MusicRmseConfig {
    pub families: Vec<Family>,
    pub elements: usize,
    pub methods: Vec<Estimator>,
    pub targets: usize,
    pub snapshots: Vec<usize>,
    pub trials: usize,
    /// Per-target SNR; overrides the link budget and collapses the distance sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    pub grid_points: usize,
}

impl Default for MusicRmseConfig {
    fn default() -> Self {
        Self {
            families: vec![Family::Uniform, Family::Nested, Family::Wichmann],
            elements: 20,
            methods: vec![Estimator::DirectMusic, Estimator::DaMusic],
            targets: 2,
            snapshots: vec![10, 30, 100, 300, 1000],
            trials: 200,
            snr_db: None,
            grid_points: jcrwave_core::estimators::DEFAULT_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    pub families: Vec<Family>,
    pub m_min: usize,
    pub m_max: usize,
    pub rule: Rule,
    pub target_counts: Vec<usize>,
    pub weights: Vec<f64>,
    pub dmmse_db: Vec<f64>,
    /// Geometric-mean CRB bounds in (m/s)².
    pub crb_mps2: Vec<f64>,
    pub crb_db: Vec<f64>,
    pub vp_compare: bool,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            families: vec![Family::Uniform, Family::Nested, Family::Wichmann],
            m_min: 3,
            m_max: 40,
            rule: Rule::VpCount,
            target_counts: vec![1, 10],
            weights: (0..=20).map(|i| i as f64 / 20.0).collect(),
            dmmse_db: vec![-27.6, -31.3],
            crb_mps2: vec![1.5e-4],
            crb_db: Vec::new(),
            vp_compare: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub comm: CommConfig,
    pub coarray: CoarrayConfig,
    pub tradeoff: TradeoffConfig,
    pub music_rmse: MusicRmseConfig,
    pub optimize: OptimizeConfig,
}

impl ExperimentConfig {
    /// Reads `path` (or starts from defaults) and applies `key=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|source| ConfigError::Io { path: p.display().to_string(), source })?,
            None => String::new(),
        };
        Self::from_str_with_overrides(&text, overrides)
    }

    pub fn from_str_with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for item in overrides {
            apply_override(&mut doc, item)?;
        }
        let cfg: Self = toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Canonical TOML rendering of the resolved configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is serializable")
    }

    fn check(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, message: &str| Err(ConfigError::Invalid { key: key.into(), message: message.into() });
        if self.scenario.distances_m.is_empty() {
            return bad("scenario.distances_m", "at least one distance is required");
        }
        for (key, lo, hi) in [
            ("tradeoff", self.tradeoff.m_min, self.tradeoff.m_max),
            ("optimize", self.optimize.m_min, self.optimize.m_max),
        ] {
            if lo < 2 || hi < lo {
                return bad(&format!("{key}.m_min"), "need 2 <= m_min <= m_max");
            }
        }
        if self.optimize.weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return bad("optimize.weights", "weights must lie in [0, 1]");
        }
        if self.music_rmse.trials == 0 {
            return bad("music_rmse.trials", "must be at least 1");
        }
        if self.music_rmse.snapshots.contains(&0) {
            return bad("music_rmse.snapshots", "snapshot counts must be at least 1");
        }
        Ok(())
    }

    /// Core scenario parameters for one target count and distance.
    pub fn scenario_params(&self, targets: usize, distance: f64, seed: u64) -> ScenarioParams {
        let s = &self.scenario;
        let c = &self.comm;
        ScenarioParams {
            carrier_hz: s.carrier_hz,
            sample_rate_hz: s.sample_rate_hz,
            cpi_s: s.cpi_s,
            preamble_symbols: s.preamble_symbols,
            ifs_s: s.ifs_s,
            max_velocity: s.max_velocity_mps,
            slot_interval: s.slot_interval_s,
            aperture_limit_s: s.aperture_limit_s.unwrap_or(f64::INFINITY),
            targets,
            velocities: if s.velocities_mps.len() == targets { s.velocities_mps.clone() } else { Vec::new() },
            velocity_min: s.velocity_min_mps,
            velocity_max: s.velocity_max_mps,
            target_distance: distance,
            rcs_dbsm: s.rcs_dbsm,
            tx_gain_db: s.tx_gain_db,
            rx_gain_db: s.rx_gain_db,
            symbol_energy: s.symbol_energy_j,
            correlation_gain: s.correlation_gain,
            noise_power: s.noise_power_w,
            noise_figure_db: s.noise_figure_db,
            temperature_k: s.temperature_k,
            comm_distance: c.distance_m,
            pathloss_exponent: c.pathloss_exponent,
            comm_taps: c.taps,
            comm_tap_decay_db: c.tap_decay_db,
            comm_array_gain_db: c.array_gain_db,
            block_size: c.block_size,
            eigenvalue_mode: match c.eigenvalues {
                Eigenvalues::Expected => EigenvalueMode::Expected,
                Eigenvalues::Realization => EigenvalueMode::Realization,
            },
            channel_seed: seed,
            crb_snapshots: s.crb_snapshots,
        }
    }
}

/// Sets a dotted key to a TOML value; bare words are taken as strings.
fn apply_override(doc: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let (key, raw) = item.split_once('=').ok_or_else(|| ConfigError::OverrideSyntax(item.into()))?;
    let key = key.trim();
    let raw = raw.trim();
    let value: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.into()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override { key: key.into(), message: "empty path segment".into() });
    }
    let mut table = doc;
    for part in &parts[..parts.len() - 1] {
        let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::Override { key: key.into(), message: format!("`{part}` is not a section") })?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(ExperimentConfig::from_str_with_overrides("", &[]).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn rendered_defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_str_with_overrides(&cfg.to_toml(), &[]).unwrap(), cfg);
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let cfg = ExperimentConfig::from_str_with_overrides(
            "",
            &[
                "scenario.targets=3".into(),
                "tradeoff.families=[\"nested\"]".into(),
                "tradeoff.rule=exhaustive".into(),
                "seed=9".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.scenario.targets, 3);
        assert_eq!(cfg.tradeoff.families, vec![Family::Nested]);
        assert_eq!(cfg.tradeoff.rule, Rule::Exhaustive);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = ExperimentConfig::from_str_with_overrides("[scenario]\nwavelength = 3\n", &[]).unwrap_err();
        assert!(err.to_string().contains("wavelength"), "{err}");
        let err = ExperimentConfig::from_str_with_overrides("", &["tradeoff.m_mim=4".into()]).unwrap_err();
        assert!(err.to_string().contains("m_mim"), "{err}");
    }

    #[test]
    fn bad_override_syntax() {
        assert!(matches!(
            ExperimentConfig::from_str_with_overrides("", &["novalue".into()]),
            Err(ConfigError::OverrideSyntax(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_str_with_overrides("", &["seed=1".into(), "seed.x=1".into()]),
            Err(ConfigError::Override { .. })
        ));
    }

    #[test]
    fn range_checks_name_the_key() {
        let err = ExperimentConfig::from_str_with_overrides("", &["optimize.m_max=1".into()]).unwrap_err();
        assert!(err.to_string().contains("optimize.m_min"), "{err}");
    }
}
