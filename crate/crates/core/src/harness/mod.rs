//! Experiment orchestration: configuration documents, Monte Carlo drivers,
//! and artifact serialization. Everything downstream of a config is a pure
//! function of (config, seed), which is what makes CLI artifacts
//! reproducible byte for byte.

pub mod artifacts;
pub mod config;
pub mod experiments;
pub mod scenario;

pub use artifacts::{rmse_csv, snr_map_csv, trace_json, write_text};
pub use config::{ExperimentConfig, LayoutConfig, Sweep, SCHEMA_VERSION};
pub use experiments::{
    run_quantization_stats, run_rmse_sweep, run_single_shot, run_snr_map, QuantizationStats,
    ReceiverTrace, RmseRecord, SingleShotTrace,
};
pub use scenario::{
    draw_position, draw_trial, on_bin_scene, scene_for_mode, OnBinTarget, TrialDraw,
    MONO_SELF_INTERFERENCE,
};
