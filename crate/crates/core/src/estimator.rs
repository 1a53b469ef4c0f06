//! Receiver-side parameter extraction.
//!
//! The pipeline per receiver: sweep a steering beam over the sector and sum
//! |a_R^H y| across all resource elements (AoA spectrum), pick spectrum
//! peaks, then for each AoA peak beamform, divide by each known transmit
//! stream, take a centered 2-D DFT and read range/Doppler off the peak bins.
//!
//! Conventions fixed here: the Doppler axis is centered (row Ns/2 is 0 Hz),
//! the range axis is 0-based internally and 1-based in `peak_to_params`
//! (q_hat = 1 means zero delay), and no sub-bin interpolation happens unless
//! explicitly enabled, so nearest-bin quantization statistics hold.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::channel::SymbolGrid;
use crate::error::{Result, SensingError};
use crate::scene::{steering_vector, ArrayConfig, OfdmConfig, SPEED_OF_LIGHT};

/// Beam-sweep output: Bartlett power per steering angle.
#[derive(Debug, Clone, PartialEq)]
pub struct AoaSpectrum {
    pub phi_grid: Vec<f64>,
    pub power: Vec<f64>,
}

/// Averaged range-Doppler magnitude map with physical axes.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerMap {
    /// Ns x Nc nonnegative magnitudes, streams averaged.
    pub values: Array2<f64>,
    /// Doppler in Hz per row; row Ns/2 is 0 Hz.
    pub doppler_axis_hz: Vec<f64>,
    /// Bistatic range in m per column; column 0 is 0 m.
    pub range_axis_m: Vec<f64>,
}

/// One resolved reflection at one receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub aoa: f64,
    pub bistatic_range: f64,
    pub range_rate: f64,
    pub peak_power: f64,
    pub rx_index: usize,
}

/// How per-stream range-Doppler evidence is combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakAggregation {
    /// Average the per-stream magnitude maps, then find peaks. Robust when a
    /// single stream misdetects at low SNR.
    AverageMaps,
    /// Find each stream's strongest cell and average the indices. Tracks only
    /// the dominant reflection per beam; kept as the classical alternative.
    AverageIndices,
}

/// Detector thresholds and grid settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorParams {
    /// AoA grid step in radians.
    pub aoa_step_rad: f64,
    /// Swept sector width in radians, centered on the array boresight.
    pub sector_width_rad: f64,
    /// AoA peaks must exceed this multiple of the spectrum median.
    pub aoa_threshold_factor: f64,
    /// AoA peaks must also exceed this fraction of the spectrum maximum;
    /// rejects array sidelobes (first ULA sidelobe is ~0.05 of the main
    /// beam in Bartlett power) that survive the median gate in noiseless
    /// runs.
    pub aoa_min_rel: f64,
    /// Range-Doppler peaks must exceed this multiple of the map median.
    pub map_threshold_factor: f64,
    /// Range-Doppler peaks must also exceed this fraction of the map
    /// maximum; suppresses numerical dust in noiseless maps where the
    /// median is itself dust.
    pub map_min_rel: f64,
    pub aggregation: PeakAggregation,
    /// Parabolic sub-bin refinement of peak locations. Off by default so
    /// error statistics follow nearest-bin quantization.
    pub interpolate: bool,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            aoa_step_rad: 0.5f64.to_radians(),
            sector_width_rad: 120f64.to_radians(),
            aoa_threshold_factor: 2.5,
            aoa_min_rel: 0.35,
            map_threshold_factor: 10.0,
            map_min_rel: 1e-6,
            aggregation: PeakAggregation::AverageMaps,
            interpolate: false,
        }
    }
}

/// Symmetric angle grid: `center + k * step` for k in -K..=K covering
/// `width`.
pub fn sector_grid(center: f64, width: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && width > 0.0, "sector grid needs positive width and step");
    let half = (width / (2.0 * step) + 1e-9).floor() as i64;
    (-half..=half).map(|k| center + k as f64 * step).collect()
}

/// Bartlett angular power spectrum: P(phi) = a(phi)^H R a(phi), where R
/// is the spatial sample covariance summed over every (symbol,
/// subcarrier) cell.
///
/// Folding the grid into R first makes the sweep O(cells n^2 + angles
/// n^2) instead of O(cells n angles), which dominates the detector's
/// runtime.
pub fn aoa_spectrum(rx: &SymbolGrid, array: &ArrayConfig, phi_grid: &[f64]) -> AoaSpectrum {
    let n = rx.cfg.num_antennas;
    assert_eq!(n, array.num_elements, "array size must match grid antennas");
    assert!(!phi_grid.is_empty(), "angle grid must be nonempty");
    let data = rx.data.as_slice().expect("rx grid is contiguous");

    // Upper triangle of the Hermitian covariance R_ij = sum y_i conj(y_j).
    let mut cov = vec![Complex64::new(0.0, 0.0); n * n];
    for cell in data.chunks_exact(n) {
        for i in 0..n {
            let yi = cell[i];
            for j in i..n {
                cov[i * n + j] += yi * cell[j].conj();
            }
        }
    }

    let power = phi_grid
        .iter()
        .map(|&phi| {
            let a = steering_vector(array, phi);
            // Steering entries have unit modulus, so the diagonal terms
            // reduce to trace contributions.
            let mut acc: f64 = (0..n).map(|i| cov[i * n + i].re).sum();
            for i in 0..n {
                for j in i + 1..n {
                    acc += 2.0 * (a[i].conj() * cov[i * n + j] * a[j]).re;
                }
            }
            acc.max(0.0)
        })
        .collect();
    AoaSpectrum { phi_grid: phi_grid.to_vec(), power }
}

/// Strict interior local maxima above `threshold_factor` x median and
/// `min_rel` x max, returned as angles sorted by descending power.
pub fn find_peaks_1d(
    spec: &AoaSpectrum,
    threshold_factor: f64,
    min_rel: f64,
) -> Result<Vec<f64>> {
    assert!(threshold_factor > 1.0, "threshold factor must exceed 1");
    let p = &spec.power;
    if p.len() < 3 {
        return Err(SensingError::NoPeaks);
    }
    let gate = peak_gate(p, threshold_factor, min_rel);
    let mut idx: Vec<usize> = (1..p.len() - 1)
        .filter(|&i| p[i] > p[i - 1] && p[i] > p[i + 1] && p[i] > gate)
        .collect();
    if idx.is_empty() {
        return Err(SensingError::NoPeaks);
    }
    idx.sort_by(|&a, &b| p[b].total_cmp(&p[a]));
    Ok(idx.into_iter().map(|i| spec.phi_grid[i]).collect())
}

fn peak_gate(values: &[f64], threshold_factor: f64, min_rel: f64) -> f64 {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let max = *sorted.last().expect("nonempty");
    (threshold_factor * median).max(min_rel * max)
}

/// Strict local maxima of a 2-D map over the wraparound 8-neighborhood
/// (both axes are DFT bins, hence periodic), gated like `find_peaks_1d`,
/// sorted by descending value.
pub fn find_peaks_2d(
    map: &Array2<f64>,
    threshold_factor: f64,
    min_rel: f64,
) -> Vec<(usize, usize)> {
    let (rows, cols) = map.dim();
    let flat = map.as_slice().expect("map is contiguous");
    let gate = peak_gate(flat, threshold_factor, min_rel);
    let mut peaks = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = map[(r, c)];
            if v <= gate {
                continue;
            }
            let mut is_peak = true;
            'nb: for dr in [rows - 1, 0, 1] {
                for dc in [cols - 1, 0, 1] {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    if v <= map[((r + dr) % rows, (c + dc) % cols)] {
                        is_peak = false;
                        break 'nb;
                    }
                }
            }
            if is_peak {
                peaks.push((r, c));
            }
        }
    }
    peaks.sort_by(|a, b| map[*b].total_cmp(&map[*a]));
    peaks
}

/// Beamformed grid a_R(phi)^H y per (symbol, subcarrier) cell.
pub fn beamform(rx: &SymbolGrid, array: &ArrayConfig, phi: f64) -> Array2<Complex64> {
    let (ns, nc, n) = (rx.cfg.num_symbols, rx.cfg.num_subcarriers, rx.cfg.num_antennas);
    assert_eq!(n, array.num_elements, "array size must match grid antennas");
    let a = steering_vector(array, phi);
    let data = rx.data.as_slice().expect("rx grid is contiguous");
    let mut out = Array2::zeros((ns, nc));
    let flat = out.as_slice_mut().expect("output is contiguous");
    for (cell, o) in data.chunks_exact(n).zip(flat.iter_mut()) {
        let mut s = Complex64::new(0.0, 0.0);
        for (ai, y) in a.iter().zip(cell) {
            s += ai.conj() * y;
        }
        *o = s;
    }
    out
}

/// Centered 2-D DFT: rows get the inverse kernel e^{+j 2 pi q nc / Nc}
/// (delay ramps land on column q), columns the forward kernel with an
/// fftshift (Doppler bin b lands on row Ns/2 + b), scaled by 1/(Ns Nc).
pub fn centered_dft_2d(g: &Array2<Complex64>) -> Array2<Complex64> {
    let (ns, nc) = g.dim();
    assert!(ns % 2 == 0, "centered Doppler axis needs an even row count");
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft_inverse(nc);
    let col_fft = planner.plan_fft_forward(ns);

    let mut work = g.clone();
    for mut row in work.rows_mut() {
        row_fft.process(row.as_slice_mut().expect("row is contiguous"));
    }
    let mut out = Array2::zeros((ns, nc));
    let scale = 1.0 / (ns * nc) as f64;
    let mut col = vec![Complex64::new(0.0, 0.0); ns];
    for c in 0..nc {
        for r in 0..ns {
            col[r] = work[(r, c)];
        }
        col_fft.process(&mut col);
        for p in 0..ns {
            out[(p, c)] = col[(p + ns / 2) % ns] * scale;
        }
    }
    out
}

/// Per-stream symbol division, DFT, and magnitude averaging at one steering
/// angle.
pub fn range_doppler_maps(
    rx: &SymbolGrid,
    tx: &SymbolGrid,
    phi_hat: f64,
    array: &ArrayConfig,
) -> RangeDopplerMap {
    assert_eq!(rx.cfg, tx.cfg, "grids must share one OFDM configuration");
    let z = beamform(rx, array, phi_hat);
    let n = tx.cfg.num_antennas;
    let mut values = Array2::zeros(z.dim());
    for stream in 0..n {
        let g = centered_dft_2d(&stream_quotient(&z, tx, stream));
        values.zip_mut_with(&g, |v, gi| *v += gi.norm());
    }
    values.mapv_inplace(|v| v / n as f64);
    RangeDopplerMap {
        values,
        doppler_axis_hz: doppler_axis(&tx.cfg),
        range_axis_m: range_axis(&tx.cfg),
    }
}

fn stream_quotient(z: &Array2<Complex64>, tx: &SymbolGrid, stream: usize) -> Array2<Complex64> {
    let (ns, nc) = z.dim();
    let mut out = Array2::zeros((ns, nc));
    for r in 0..ns {
        for c in 0..nc {
            out[(r, c)] = z[(r, c)] / tx.data[(r, c, stream)];
        }
    }
    out
}

fn doppler_axis(cfg: &OfdmConfig) -> Vec<f64> {
    let span = cfg.num_symbols as f64 * cfg.symbol_period_s;
    (0..cfg.num_symbols)
        .map(|p| (p as f64 - cfg.num_symbols as f64 / 2.0) / span)
        .collect()
}

fn range_axis(cfg: &OfdmConfig) -> Vec<f64> {
    let bin = cfg.range_bin_m();
    (0..cfg.num_subcarriers).map(|q| q as f64 * bin).collect()
}

/// Maps (fractional) peak bin indices to physical parameters. `p_hat` is the
/// 0-based Doppler row; `q_hat` is the 1-based range column, so `q_hat = 1`
/// means zero delay. Returns (range_rate m/s, bistatic_range m); the range
/// rate is positive when the path lengthens, hence the sign flip from
/// Doppler.
pub fn peak_to_params(p_hat: f64, q_hat: f64, cfg: &OfdmConfig) -> (f64, f64) {
    let doppler_hz =
        (p_hat - cfg.num_symbols as f64 / 2.0) / (cfg.num_symbols as f64 * cfg.symbol_period_s);
    let range_rate = -doppler_hz * SPEED_OF_LIGHT / cfg.carrier_hz;
    let bistatic_range =
        (q_hat - 1.0) * SPEED_OF_LIGHT / (cfg.num_subcarriers as f64 * cfg.subcarrier_spacing_hz);
    (range_rate, bistatic_range)
}

/// Parabolic vertex offset from three samples around a maximum, clamped to
/// half a bin.
fn parabolic_offset(left: f64, center: f64, right: f64) -> f64 {
    let denom = left - 2.0 * center + right;
    if denom.abs() < 1e-300 {
        return 0.0;
    }
    (0.5 * (left - right) / denom).clamp(-0.5, 0.5)
}

/// Full per-receiver detector: AoA sweep, AoA peaks, per-peak range-Doppler
/// maps, 2-D peaks, parameter conversion. An undetectable grid yields an
/// empty list rather than an error.
pub fn detect(
    rx: &SymbolGrid,
    tx: &SymbolGrid,
    array: &ArrayConfig,
    params: &DetectorParams,
    rx_index: usize,
) -> Vec<Detection> {
    assert_eq!(rx.cfg, tx.cfg, "grids must share one OFDM configuration");
    let grid = sector_grid(array.boresight_rad, params.sector_width_rad, params.aoa_step_rad);
    let spectrum = aoa_spectrum(rx, array, &grid);
    let aoa_peaks = match find_peaks_1d(&spectrum, params.aoa_threshold_factor, params.aoa_min_rel)
    {
        Ok(p) => p,
        Err(SensingError::NoPeaks) => return Vec::new(),
        Err(e) => unreachable!("find_peaks_1d only fails with NoPeaks: {e}"),
    };

    let mut detections = Vec::new();
    for aoa in aoa_peaks {
        let aoa = if params.interpolate {
            refine_aoa(&spectrum, aoa, params.aoa_step_rad)
        } else {
            aoa
        };
        let map = range_doppler_maps(rx, tx, aoa, array);
        let peaks = find_peaks_2d(&map.values, params.map_threshold_factor, params.map_min_rel);
        if peaks.is_empty() {
            continue;
        }
        match params.aggregation {
            PeakAggregation::AverageMaps => {
                for (p, q) in peaks {
                    let (pf, qf) = if params.interpolate {
                        refine_bin(&map.values, p, q)
                    } else {
                        (p as f64, q as f64)
                    };
                    detections.push(make_detection(aoa, pf, qf, map.values[(p, q)], rx_index, &tx.cfg));
                }
            }
            PeakAggregation::AverageIndices => {
                // Classical variant: each stream votes with its global
                // argmax; only the dominant reflection is produced.
                let z = beamform(rx, array, aoa);
                let n = tx.cfg.num_antennas;
                let (mut pf, mut qf) = (0.0, 0.0);
                for stream in 0..n {
                    let g = centered_dft_2d(&stream_quotient(&z, tx, stream));
                    let (p_i, q_i) = argmax_2d(&g);
                    pf += p_i as f64;
                    qf += q_i as f64;
                }
                let (p0, q0) = peaks[0];
                detections.push(make_detection(
                    aoa,
                    pf / n as f64,
                    qf / n as f64,
                    map.values[(p0, q0)],
                    rx_index,
                    &tx.cfg,
                ));
            }
        }
    }
    detections.sort_by(|a, b| b.peak_power.total_cmp(&a.peak_power));
    detections
}

fn make_detection(
    aoa: f64,
    p_hat: f64,
    q_hat_zero_based: f64,
    peak_power: f64,
    rx_index: usize,
    cfg: &OfdmConfig,
) -> Detection {
    let (range_rate, bistatic_range) = peak_to_params(p_hat, q_hat_zero_based + 1.0, cfg);
    Detection { aoa, bistatic_range, range_rate, peak_power, rx_index }
}

fn refine_aoa(spectrum: &AoaSpectrum, aoa: f64, step: f64) -> f64 {
    let i = spectrum
        .phi_grid
        .iter()
        .position(|&phi| (phi - aoa).abs() < step * 1e-6)
        .expect("peak angle came from the grid");
    if i == 0 || i + 1 == spectrum.power.len() {
        return aoa;
    }
    aoa + parabolic_offset(spectrum.power[i - 1], spectrum.power[i], spectrum.power[i + 1]) * step
}

fn refine_bin(map: &Array2<f64>, p: usize, q: usize) -> (f64, f64) {
    let (rows, cols) = map.dim();
    let dp = parabolic_offset(
        map[((p + rows - 1) % rows, q)],
        map[(p, q)],
        map[((p + 1) % rows, q)],
    );
    let dq = parabolic_offset(
        map[(p, (q + cols - 1) % cols)],
        map[(p, q)],
        map[(p, (q + 1) % cols)],
    );
    (p as f64 + dp, q as f64 + dq)
}

fn argmax_2d(g: &Array2<Complex64>) -> (usize, usize) {
    let mut best = (0, 0);
    let mut best_v = f64::NEG_INFINITY;
    for ((r, c), v) in g.indexed_iter() {
        let m = v.norm_sqr();
        if m > best_v {
            best_v = m;
            best = (r, c);
        }
    }
    best
}
