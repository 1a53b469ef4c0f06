//! Experiment drivers: Monte Carlo RMSE sweeps, quantization-error
//! statistics, SNR maps, and fully traced single runs. Every driver is a
//! pure function of its configuration, so artifacts are reproducible byte
//! for byte.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{gen_tx_symbols, synthesize_rx, LinkBudget, SymbolGrid};
use crate::error::Result;
use crate::estimator::{
    aoa_spectrum, detect, find_peaks_1d, sector_grid, Detection, DetectorParams,
};
use crate::fusion::{
    bistatic_estimate, ellipse_range, fuse_multistatic, monostatic_estimate, FusedTrack,
    VelocitySolveMode,
};
use crate::harness::config::ExperimentConfig;
use crate::harness::scenario::{draw_trial, scene_for_mode, TrialDraw};
use crate::linkbudget::{snr_heatmap, sub_sensing_cell, Heatmap, SensingMode};
use crate::rng::{stream_rng, tag};
use crate::scene::{propagation_truth, OfdmConfig, PropagationTruth, SceneConfig, SensingObject, Vec2};

/// One row of the RMSE sweep output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmseRecord {
    pub mode: SensingMode,
    /// The sweep-axis value this row was measured at.
    pub sweep: f64,
    pub position_rmse_m: f64,
    pub velocity_rmse_mps: f64,
    pub detection_rate: f64,
    pub trials: usize,
}

/// Aggregate quantization-error statistics from a noiseless single-receiver
/// run with off-bin truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizationStats {
    pub mean_abs_range_error_m: f64,
    pub mean_abs_rate_error_mps: f64,
    pub mean_abs_aoa_error_rad: f64,
    pub detected: usize,
    pub trials: usize,
}

/// Everything one receiver saw during a traced run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverTrace {
    pub rx_index: usize,
    pub rx_position: Vec2,
    pub truth: PropagationTruth,
    /// Mean per-element received power of the symbol grid, mW.
    pub mean_grid_power_mw: f64,
    pub aoa_peaks_rad: Vec<f64>,
    /// Range-Doppler lattice indices (p, q) behind each detection; p is the
    /// centered Doppler row, q the 1-based range column.
    pub rd_peak_bins: Vec<(i64, i64)>,
    pub detections: Vec<Detection>,
}

/// One full pipeline pass with every intermediate kept for inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleShotTrace {
    pub schema_version: u32,
    pub mode: SensingMode,
    pub seed: u64,
    pub noiseless: bool,
    pub object: SensingObject,
    pub receivers: Vec<ReceiverTrace>,
    pub track: Option<FusedTrack>,
    pub position_error_m: Option<f64>,
    pub velocity_error_mps: Option<f64>,
}

/// Detections from every receiver in the scene, strongest first per
/// receiver.
fn detect_all(
    scene: &SceneConfig,
    link: &LinkBudget,
    cfg: &OfdmConfig,
    detector: &DetectorParams,
    tx_symbols: &SymbolGrid,
    synth_seed: u64,
    noiseless: bool,
) -> Result<Vec<Detection>> {
    debug_assert_eq!(*cfg, tx_symbols.cfg);
    let mut all = Vec::new();
    for k in 0..scene.rx_positions.len() {
        let rx = synthesize_rx(scene, link, k, tx_symbols, synth_seed, noiseless)?;
        all.extend(detect(&rx, tx_symbols, &scene.rx_array_for(k), detector, k));
    }
    Ok(all)
}

/// Turns per-receiver detections into one object state according to the
/// mode's fusion rule. `None` means the trial missed: no usable detection,
/// or (multistatic) no cluster that supports a velocity solve.
fn estimate_track(
    mode: SensingMode,
    detections: &[Detection],
    scene: &SceneConfig,
    cfg: &OfdmConfig,
) -> Option<FusedTrack> {
    match mode {
        SensingMode::Monostatic => {
            // Strongest return from the co-located receiver.
            let det = detections.iter().find(|d| d.rx_index == 0)?;
            Some(monostatic_estimate(det, scene.tx_position))
        }
        SensingMode::Bistatic => {
            let det = detections.iter().find(|d| d.rx_index == 0)?;
            bistatic_estimate(det, scene.rx_positions[0], scene.tx_position).ok()
        }
        SensingMode::Multistatic => fuse_multistatic(
            detections,
            &scene.rx_positions,
            scene.tx_position,
            3.0 * cfg.range_bin_m(),
            VelocitySolveMode::TwoRxWithAod,
        )
        .into_iter()
        .next(),
    }
}

/// A multistatic track only counts as a detection when two receivers agree
/// and the geometry supports a velocity solve; single-station tracks always
/// carry a (possibly partial) velocity.
fn track_is_complete(mode: SensingMode, track: &FusedTrack) -> bool {
    match mode {
        SensingMode::Multistatic => track.members.len() >= 2 && track.velocity.is_some(),
        _ => track.velocity.is_some(),
    }
}

/// Monte Carlo RMSE over the configured sweep. Trials are paired: trial t
/// draws the same object and waveform seed for every mode and sweep point,
/// so mode differences are not masked by draw noise. Undetected trials are
/// excluded from RMSE and surface through `detection_rate`.
pub fn run_rmse_sweep(config: &ExperimentConfig) -> Result<Vec<RmseRecord>> {
    config.validate()?;
    let base = config.base_scene();
    let azimuth = config.target_azimuth_rad();
    let tri = sub_sensing_cell(&base, azimuth).vertices;
    let points = config.sweep.points();

    let mut records = Vec::new();
    for (i, &sweep_value) in points.iter().enumerate() {
        let (cfg_i, link_i) = config.sweep.apply(i, &config.ofdm, &config.link);
        cfg_i.validate()?;

        let mut hits = vec![0usize; config.modes.len()];
        let mut pos_sq = vec![0.0f64; config.modes.len()];
        let mut vel_sq = vec![0.0f64; config.modes.len()];
        for trial in 0..config.trials {
            let draw = draw_trial(
                &tri,
                config.baseline_margin_m,
                config.velocity_max_mps,
                config.rcs,
                config.seed,
                trial as u64,
            );
            let tx_symbols = gen_tx_symbols(&cfg_i, draw.synth_seed);
            for (mi, &mode) in config.modes.iter().enumerate() {
                let (scene, link_m) = scene_for_mode(&base, mode, azimuth, draw.object, &link_i);
                let detections = detect_all(
                    &scene,
                    &link_m,
                    &cfg_i,
                    &config.detector,
                    &tx_symbols,
                    draw.synth_seed,
                    config.noiseless,
                )?;
                let Some(track) = estimate_track(mode, &detections, &scene, &cfg_i) else {
                    continue;
                };
                if !track_is_complete(mode, &track) {
                    continue;
                }
                let dp = track.position - draw.object.position;
                let dv = track.velocity.expect("checked by track_is_complete")
                    - draw.object.velocity;
                hits[mi] += 1;
                pos_sq[mi] += dp.dot(dp);
                vel_sq[mi] += dv.dot(dv);
            }
        }

        for (mi, &mode) in config.modes.iter().enumerate() {
            let n = hits[mi] as f64;
            records.push(RmseRecord {
                mode,
                sweep: sweep_value,
                position_rmse_m: (pos_sq[mi] / n).sqrt(),
                velocity_rmse_mps: (vel_sq[mi] / n).sqrt(),
                detection_rate: hits[mi] as f64 / config.trials as f64,
                trials: config.trials,
            });
        }
    }
    Ok(records)
}

/// Noiseless single-receiver runs that sample the detector's lattice with
/// exactly uniform fractional offsets, so every reported error is pure
/// quantization: the AoA is drawn uniformly across the swept sector, the
/// bistatic range uniformly over eight whole range bins, and the
/// along-gradient speed uniformly across three whole Doppler bins. Uses
/// the first receiver of the scheduled pair.
pub fn run_quantization_stats(config: &ExperimentConfig) -> Result<QuantizationStats> {
    config.validate()?;
    let base = config.base_scene();
    let azimuth = config.target_azimuth_rad();
    let cfg = config.ofdm;

    let mut sums = [0.0f64; 3];
    let mut detected = 0usize;
    for trial in 0..config.trials {
        let mut rng = stream_rng(config.seed, &[tag::TRIAL, trial as u64]);

        // Stay two grid steps clear of the sector edge so the AoA peak is
        // an interior grid point.
        let half_sector =
            0.5 * config.detector.sector_width_rad - 2.0 * config.detector.aoa_step_rad;
        let aoa_offset = rng.random_range(-half_sector..half_sector);
        // Eight whole pitches keep the fractional range offset exactly
        // uniform; 40 m of baseline clearance keeps the ellipse inversion
        // well away from its degenerate axis.
        let dd = cfg.range_bin_m();
        let range_span: f64 = rng.random_range(0.0..8.0 * dd);
        let dv = cfg.velocity_bin_mps();
        let v_par = rng.random_range(-1.5 * dv..1.5 * dv);
        let synth_seed: u64 = rng.random();

        let probe = SensingObject {
            position: base.tx_position,
            velocity: Vec2::new(0.0, 0.0),
            rcs: config.rcs,
        };
        let (mut scene, link) =
            scene_for_mode(&base, SensingMode::Bistatic, azimuth, probe, &config.link);
        let rx = scene.rx_positions[0];
        let tx = scene.tx_position;
        let aoa = scene.rx_array_for(0).boresight_rad + aoa_offset;
        let bistatic_range = rx.distance_to(tx) + 40.0 + range_span;
        let d_r = ellipse_range(bistatic_range, aoa, rx, tx)?;
        let position = rx + Vec2::new(aoa.cos(), aoa.sin()) * d_r;
        scene.objects[0].position = position;

        let truth0 = propagation_truth(tx, rx, &scene.objects[0])?;
        // Realize the drawn along-gradient speed with the minimum-norm
        // velocity.
        let u_t = (position - tx) * (1.0 / truth0.tx_distance);
        let u_r = (position - rx) * (1.0 / truth0.rx_distance);
        let coeff = u_t + u_r;
        let velocity = coeff * (v_par / coeff.dot(coeff));
        scene.objects[0].velocity = velocity;

        let tx_symbols = gen_tx_symbols(&cfg, synth_seed);
        let rx_grid = synthesize_rx(&scene, &link, 0, &tx_symbols, synth_seed, true)?;
        let dets = detect(&rx_grid, &tx_symbols, &scene.rx_array_for(0), &config.detector, 0);
        let Some(det) = dets.first() else {
            continue;
        };
        detected += 1;
        sums[0] += (det.bistatic_range - truth0.bistatic_range).abs();
        sums[1] += (det.range_rate - v_par).abs();
        sums[2] += crate::scene::angle_diff(det.aoa, truth0.aoa).abs();
    }

    let n = detected as f64;
    Ok(QuantizationStats {
        mean_abs_range_error_m: sums[0] / n,
        mean_abs_rate_error_mps: sums[1] / n,
        mean_abs_aoa_error_rad: sums[2] / n,
        detected,
        trials: config.trials,
    })
}

/// SNR heatmap over the served sub-sensing cell.
pub fn run_snr_map(config: &ExperimentConfig, mode: SensingMode) -> Result<Heatmap> {
    config.validate()?;
    let base = config.base_scene();
    let cell = sub_sensing_cell(&base, config.target_azimuth_rad());
    Ok(snr_heatmap(&base, &config.link, &config.ofdm, mode, &cell, config.heatmap_step_m))
}

/// One traced pipeline pass. The object is trial 0's draw unless the
/// config pins one; `seed` drives everything, so two runs with the same
/// config and seed match byte for byte.
pub fn run_single_shot(
    config: &ExperimentConfig,
    mode: SensingMode,
    seed: u64,
) -> Result<SingleShotTrace> {
    config.validate()?;
    let base = config.base_scene();
    let azimuth = config.target_azimuth_rad();
    let tri = sub_sensing_cell(&base, azimuth).vertices;
    let TrialDraw { object: drawn, synth_seed } = draw_trial(
        &tri,
        config.baseline_margin_m,
        config.velocity_max_mps,
        config.rcs,
        seed,
        0,
    );
    let object = config.object_override.unwrap_or(drawn);
    let (scene, link) = scene_for_mode(&base, mode, azimuth, object, &config.link);
    let cfg = config.ofdm;

    let tx_symbols = gen_tx_symbols(&cfg, synth_seed);
    let mut receivers = Vec::new();
    let mut detections = Vec::new();
    for k in 0..scene.rx_positions.len() {
        let rx_pos = scene.rx_positions[k];
        let truth = propagation_truth(scene.tx_position, rx_pos, &object)?;
        let rx = synthesize_rx(&scene, &link, k, &tx_symbols, synth_seed, config.noiseless)?;
        let array = scene.rx_array_for(k);
        let mean_grid_power_mw =
            rx.data.iter().map(|z| z.norm_sqr()).sum::<f64>() / rx.data.len() as f64;

        let grid = sector_grid(
            array.boresight_rad,
            config.detector.sector_width_rad,
            config.detector.aoa_step_rad,
        );
        let spectrum = aoa_spectrum(&rx, &array, &grid);
        let aoa_peaks_rad = find_peaks_1d(
            &spectrum,
            config.detector.aoa_threshold_factor,
            config.detector.aoa_min_rel,
        )
        .unwrap_or_default();

        let dets = detect(&rx, &tx_symbols, &array, &config.detector, k);
        let rd_peak_bins = dets
            .iter()
            .map(|d| {
                let p = cfg.num_symbols as f64 / 2.0 - d.range_rate / cfg.velocity_bin_mps();
                let q = d.bistatic_range / cfg.range_bin_m() + 1.0;
                (p.round() as i64, q.round() as i64)
            })
            .collect();
        receivers.push(ReceiverTrace {
            rx_index: k,
            rx_position: rx_pos,
            truth,
            mean_grid_power_mw,
            aoa_peaks_rad,
            rd_peak_bins,
            detections: dets.clone(),
        });
        detections.extend(dets);
    }

    let track = estimate_track(mode, &detections, &scene, &cfg);
    let position_error_m = track.as_ref().map(|t| t.position.distance_to(object.position));
    let velocity_error_mps = track
        .as_ref()
        .and_then(|t| t.velocity)
        .map(|v| (v - object.velocity).norm());
    Ok(SingleShotTrace {
        schema_version: crate::harness::config::SCHEMA_VERSION,
        mode,
        seed,
        noiseless: config.noiseless,
        object,
        receivers,
        track,
        position_error_m,
        velocity_error_mps,
    })
}
