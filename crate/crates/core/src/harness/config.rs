//! Experiment configuration: a versioned JSON document that fully
//! determines every artifact the harness can produce.

use serde::{Deserialize, Serialize};

use crate::channel::LinkBudget;
use crate::error::{Result, SensingError};
use crate::estimator::DetectorParams;
use crate::linkbudget::SensingMode;
use crate::scene::{hex_rx_positions, ArrayConfig, OfdmConfig, SceneConfig, SensingObject, Vec2};

/// Config documents this build can read.
pub const SCHEMA_VERSION: u32 = 1;

/// Station ring geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    /// Transmitter-to-receiver ring radius d0, meters.
    pub inter_site_distance_m: f64,
    /// Receivers on the ring; scheduling requires the canonical six.
    pub num_receivers: usize,
    /// Antenna pitch of every array, in carrier wavelengths.
    pub array_spacing_wavelengths: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            inter_site_distance_m: 300.0,
            num_receivers: 6,
            array_spacing_wavelengths: 0.5,
        }
    }
}

/// What varies across the experiment's x-axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", content = "values", rename_all = "snake_case")]
pub enum Sweep {
    /// Bandwidth sweep: each point substitutes Nc.
    Subcarriers(Vec<usize>),
    /// Dwell sweep: each point substitutes Ns.
    Symbols(Vec<usize>),
    /// SNR sweep: each point adds an offset to the transmit power (dB).
    TxPowerOffsetDb(Vec<f64>),
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep::Subcarriers(vec![256])
    }
}

impl Sweep {
    pub fn len(&self) -> usize {
        match self {
            Sweep::Subcarriers(v) => v.len(),
            Sweep::Symbols(v) => v.len(),
            Sweep::TxPowerOffsetDb(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sweep values as plain numbers for records and CSV.
    pub fn points(&self) -> Vec<f64> {
        match self {
            Sweep::Subcarriers(v) => v.iter().map(|&n| n as f64).collect(),
            Sweep::Symbols(v) => v.iter().map(|&n| n as f64).collect(),
            Sweep::TxPowerOffsetDb(v) => v.clone(),
        }
    }

    /// Waveform and link for sweep point `i`.
    pub fn apply(&self, i: usize, ofdm: &OfdmConfig, link: &LinkBudget) -> (OfdmConfig, LinkBudget) {
        let mut cfg = *ofdm;
        let mut link = *link;
        match self {
            Sweep::Subcarriers(v) => cfg.num_subcarriers = v[i],
            Sweep::Symbols(v) => cfg.num_symbols = v[i],
            Sweep::TxPowerOffsetDb(v) => link.tx_power_dbm += v[i],
        }
        (cfg, link)
    }
}

fn default_seed() -> u64 {
    1
}
fn default_trials() -> usize {
    1000
}
fn default_modes() -> Vec<SensingMode> {
    vec![SensingMode::Monostatic, SensingMode::Bistatic, SensingMode::Multistatic]
}
fn default_noiseless() -> bool {
    true
}
fn default_velocity_max() -> f64 {
    30.0
}
fn default_ofdm() -> OfdmConfig {
    OfdmConfig {
        carrier_hz: 2.6e9,
        subcarrier_spacing_hz: 30e3,
        symbol_period_s: 0.5e-3 / 14.0,
        num_subcarriers: 256,
        num_symbols: 56,
        num_antennas: 8,
    }
}
fn default_baseline_margin() -> f64 {
    25.0
}
fn default_heatmap_step() -> f64 {
    5.0
}
fn default_rcs() -> f64 {
    1.0
}

/// Everything one experiment needs, deserialized from JSON. Unknown keys
/// are rejected so typos fail loudly. All fields except `schema_version`
/// have desk-scale defaults that finish a full three-mode sweep in minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Monte Carlo trials per (mode, sweep point). Statistical records want
    /// hundreds or more; small values are allowed for smoke runs.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_modes")]
    pub modes: Vec<SensingMode>,
    #[serde(default = "default_noiseless")]
    pub noiseless: bool,
    /// Object speeds are drawn uniformly from [0, velocity_max_mps].
    #[serde(default = "default_velocity_max")]
    pub velocity_max_mps: f64,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default = "default_ofdm")]
    pub ofdm: OfdmConfig,
    #[serde(default)]
    pub link: LinkBudget,
    #[serde(default)]
    pub layout: LayoutConfig,
    #[serde(default)]
    pub detector: DetectorParams,
    /// Azimuth of the served sub-sensing cell, degrees from the transmitter.
    #[serde(default)]
    pub target_azimuth_deg: f64,
    /// Objects are drawn at least this far inside the cell triangle edges,
    /// keeping draws away from the station baselines where the ellipse
    /// inversion degenerates.
    #[serde(default = "default_baseline_margin")]
    pub baseline_margin_m: f64,
    #[serde(default = "default_heatmap_step")]
    pub heatmap_step_m: f64,
    #[serde(default = "default_rcs")]
    pub rcs: f64,
    /// Fixed object for single-shot runs; Monte Carlo draws ignore it.
    #[serde(default)]
    pub object_override: Option<SensingObject>,
    /// Default artifact path; the CLI `--out` flag wins when both are set.
    #[serde(default)]
    pub output: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            seed: default_seed(),
            trials: default_trials(),
            modes: default_modes(),
            noiseless: default_noiseless(),
            velocity_max_mps: default_velocity_max(),
            sweep: Sweep::default(),
            ofdm: default_ofdm(),
            link: LinkBudget::default(),
            layout: LayoutConfig::default(),
            detector: DetectorParams::default(),
            target_azimuth_deg: 0.0,
            baseline_margin_m: default_baseline_margin(),
            heatmap_step_m: default_heatmap_step(),
            rcs: default_rcs(),
            object_override: None,
            output: None,
        }
    }
}

impl ExperimentConfig {
    /// Parses and structurally checks a JSON document. Parse failures keep
    /// serde's line/column anchor in the message.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| SensingError::Config(format!("config parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn target_azimuth_rad(&self) -> f64 {
        self.target_azimuth_deg.to_radians()
    }

    /// Station ring and arrays, no objects. The transmit boresight points
    /// at the served cell.
    pub fn base_scene(&self) -> SceneConfig {
        let tx = Vec2::new(0.0, 0.0);
        let array = ArrayConfig {
            num_elements: self.ofdm.num_antennas,
            spacing_wavelengths: self.layout.array_spacing_wavelengths,
            boresight_rad: self.target_azimuth_rad(),
        };
        SceneConfig {
            tx_position: tx,
            rx_positions: hex_rx_positions(tx, self.layout.inter_site_distance_m, self.layout.num_receivers),
            inter_site_distance: self.layout.inter_site_distance_m,
            objects: vec![],
            tx_array: array,
            rx_array: array,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SensingError::Config(format!(
                "unsupported schema_version {}; this build reads version {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        if self.trials == 0 {
            return Err(SensingError::Config("trials must be at least 1".into()));
        }
        if self.modes.is_empty() {
            return Err(SensingError::Config("modes must name at least one sensing mode".into()));
        }
        if self.sweep.is_empty() {
            return Err(SensingError::Config("sweep values must be nonempty".into()));
        }
        if let Sweep::Symbols(values) = &self.sweep {
            if let Some(odd) = values.iter().find(|&&n| n % 2 != 0) {
                return Err(SensingError::Config(format!(
                    "swept num_symbols must be even for the centered Doppler axis, got {odd}"
                )));
            }
        }
        if let Sweep::Subcarriers(values) = &self.sweep {
            if values.contains(&0) {
                return Err(SensingError::Config("swept num_subcarriers must be positive".into()));
            }
        }
        if matches!(self.sweep, Sweep::TxPowerOffsetDb(_)) && self.noiseless {
            return Err(SensingError::Config(
                "a transmit-power sweep has no effect on a noiseless run; set noiseless to false"
                    .into(),
            ));
        }
        if !(self.velocity_max_mps >= 0.0) {
            return Err(SensingError::Config("velocity_max_mps must be non-negative".into()));
        }
        if !(self.baseline_margin_m >= 0.0) {
            return Err(SensingError::Config("baseline_margin_m must be non-negative".into()));
        }
        if !(self.heatmap_step_m > 0.0) {
            return Err(SensingError::Config("heatmap_step_m must be positive".into()));
        }
        if !(self.rcs > 0.0) {
            return Err(SensingError::Config("rcs must be positive".into()));
        }
        if !(self.layout.inter_site_distance_m > 0.0) {
            return Err(SensingError::Config("inter_site_distance_m must be positive".into()));
        }
        let needs_ring = self
            .modes
            .iter()
            .any(|m| matches!(m, SensingMode::Bistatic | SensingMode::Multistatic));
        if needs_ring && self.layout.num_receivers != 6 {
            return Err(SensingError::Config(format!(
                "receiver scheduling assumes the six-receiver ring, got {}",
                self.layout.num_receivers
            )));
        }
        self.ofdm.validate()?;
        self.link.validate()?;
        if let Some(obj) = &self.object_override {
            obj.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_desk_defaults() {
        let config = ExperimentConfig::from_json_str(r#"{"schema_version": 1}"#).unwrap();
        assert_eq!(config, ExperimentConfig::default());
        assert_eq!(config.trials, 1000);
        assert_eq!(config.ofdm.num_subcarriers, 256);
        assert_eq!(config.ofdm.num_symbols, 56);
        assert_eq!(config.ofdm.num_antennas, 8);
        assert_eq!(config.modes.len(), 3);
        assert!(config.noiseless);
    }

    #[test]
    fn json_roundtrip_is_identity() {
        let config = ExperimentConfig {
            sweep: Sweep::Symbols(vec![56, 112]),
            modes: vec![SensingMode::Multistatic],
            object_override: Some(SensingObject {
                position: Vec2::new(150.0, 10.0),
                velocity: Vec2::new(3.0, -4.0),
                rcs: 1.0,
            }),
            ..ExperimentConfig::default()
        };
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back = ExperimentConfig::from_json_str(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = ExperimentConfig::from_json_str("{\"schema_version\": 1,\n \"trails\": 5}")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("trails"), "should name the stray key: {msg}");
        assert!(msg.contains("line 2"), "should carry the location: {msg}");
    }

    #[test]
    fn odd_symbol_count_is_rejected_citing_evenness() {
        let doc = r#"{"schema_version": 1, "ofdm": {
            "carrier_hz": 2.6e9, "subcarrier_spacing_hz": 30e3,
            "symbol_period_s": 3.57e-5, "num_subcarriers": 256,
            "num_symbols": 57, "num_antennas": 8}}"#;
        let msg = ExperimentConfig::from_json_str(doc).unwrap_err().to_string();
        assert!(msg.contains("even"), "must cite the even-count invariant: {msg}");

        let swept = r#"{"schema_version": 1, "sweep": {"axis": "symbols", "values": [56, 57]}}"#;
        let msg = ExperimentConfig::from_json_str(swept).unwrap_err().to_string();
        assert!(msg.contains("even"), "swept values are checked too: {msg}");
    }

    #[test]
    fn power_sweep_requires_noise() {
        let doc = r#"{"schema_version": 1,
            "sweep": {"axis": "tx_power_offset_db", "values": [0.0, 10.0]}}"#;
        let msg = ExperimentConfig::from_json_str(doc).unwrap_err().to_string();
        assert!(msg.contains("noiseless"), "{msg}");
        let noisy = r#"{"schema_version": 1, "noiseless": false,
            "sweep": {"axis": "tx_power_offset_db", "values": [0.0, 10.0]}}"#;
        assert!(ExperimentConfig::from_json_str(noisy).is_ok());
    }

    #[test]
    fn future_schema_versions_are_refused() {
        let msg = ExperimentConfig::from_json_str(r#"{"schema_version": 2}"#)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("schema_version"), "{msg}");
    }

    #[test]
    fn sweep_apply_substitutes_one_knob() {
        let ofdm = default_ofdm();
        let link = LinkBudget::default();
        let (cfg, l) = Sweep::Subcarriers(vec![128, 512]).apply(1, &ofdm, &link);
        assert_eq!(cfg.num_subcarriers, 512);
        assert_eq!(cfg.num_symbols, ofdm.num_symbols);
        assert_eq!(l, link);
        let (cfg, _) = Sweep::Symbols(vec![112]).apply(0, &ofdm, &link);
        assert_eq!(cfg.num_symbols, 112);
        let (cfg, l) = Sweep::TxPowerOffsetDb(vec![-3.0]).apply(0, &ofdm, &link);
        assert_eq!(cfg, ofdm);
        assert_eq!(l.tx_power_dbm, link.tx_power_dbm - 3.0);
    }

    #[test]
    fn base_scene_is_the_canonical_ring() {
        let config = ExperimentConfig::default();
        let scene = config.base_scene();
        scene.validate().unwrap();
        assert_eq!(scene.rx_positions.len(), 6);
        for rx in &scene.rx_positions {
            assert!((rx.distance_to(scene.tx_position) - 300.0).abs() < 1e-9);
        }
        assert_eq!(scene.tx_array.num_elements, 8);
        // First receiver sits at +30 degrees.
        let b = scene.tx_position.bearing_to(scene.rx_positions[0]);
        assert!((b - 30f64.to_radians()).abs() < 1e-12);
    }
}
