//! Frequency-domain channel synthesis.
//!
//! The received grid for receiver k is built per object l as
//!
//! ```text
//! y(ns, nc, :) += beta_l * e^{+j 2 pi Ts fD ns} * e^{-j 2 pi tau fDelta nc}
//!                 * a_R(aoa) * (a_T(aod)^T x(ns, nc, :))
//! ```
//!
//! with `fD = -range_rate * fc / c` (range rate positive when the path
//! lengthens) and `tau = bistatic_range / c`. Amplitudes are in sqrt(mW): the
//! per-path power |beta|^2 equals path_gain * tx power, and additive noise has
//! per-element power N0 + alpha * Pt in mW.

use std::f64::consts::TAU;

use ndarray::Array3;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SensingError};
use crate::rng::{stream_rng, tag};
use crate::scene::{propagation_truth, steering_vector, OfdmConfig, PropagationTruth, SceneConfig, SPEED_OF_LIGHT};

/// One OFDM frame of symbols: shape (num_symbols, num_subcarriers,
/// num_antennas), antenna axis contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    pub data: Array3<Complex64>,
    pub cfg: OfdmConfig,
}

impl SymbolGrid {
    pub fn zeros(cfg: OfdmConfig) -> Self {
        SymbolGrid {
            data: Array3::zeros((cfg.num_symbols, cfg.num_subcarriers, cfg.num_antennas)),
            cfg,
        }
    }
}

/// Transmit power, antenna gains and receiver noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub noise_figure_db: f64,
    /// Linear self-interference fraction alpha: monostatic leakage power is
    /// alpha * Pt. Zero for separated stations.
    pub self_interference: f64,
    /// Aperture efficiency eta in (0, 1].
    pub efficiency: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget {
            tx_power_dbm: 30.0,
            tx_gain_db: 12.0,
            rx_gain_db: 12.0,
            noise_figure_db: 10.0,
            self_interference: 0.0,
            efficiency: 1.0,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(SensingError::Config(format!(
                "efficiency must be in (0, 1], got {}",
                self.efficiency
            )));
        }
        if !(self.self_interference >= 0.0) {
            return Err(SensingError::Config("self-interference must be non-negative".into()));
        }
        Ok(())
    }
}

/// One propagation path as the receiver sees it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComplexGain {
    /// Complex amplitude in sqrt(mW); |gain|^2 = path_gain * Pt.
    pub gain: Complex64,
    /// Doppler shift in Hz, -range_rate * fc / c.
    pub doppler_hz: f64,
    /// Total path delay in seconds.
    pub delay_s: f64,
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Unit-power QPSK symbols {(+-1 +-j)/sqrt(2)} for every (symbol, subcarrier,
/// antenna) slot, drawn row-major from a stream derived from `seed`.
pub fn gen_tx_symbols(cfg: &OfdmConfig, seed: u64) -> SymbolGrid {
    const A: f64 = std::f64::consts::FRAC_1_SQRT_2;
    let mut rng = stream_rng(seed, &[tag::TX_SYMBOLS]);
    let mut grid = SymbolGrid::zeros(*cfg);
    for v in grid.data.iter_mut() {
        let bits: u8 = rng.random_range(0..4);
        let re = if bits & 1 == 0 { A } else { -A };
        let im = if bits & 2 == 0 { A } else { -A };
        *v = Complex64::new(re, im);
    }
    grid
}

/// Bistatic radar path gain
/// `eta * Gt * Gr * rcs * c^2 / ((4 pi)^3 d_T^2 d_R^2 fc^2)`.
///
/// Dimensionless ratio of received to transmitted power.
pub fn path_gain(
    link: &LinkBudget,
    rcs: f64,
    tx_distance: f64,
    rx_distance: f64,
    carrier_hz: f64,
) -> Result<f64> {
    if !(tx_distance > 0.0) || !(rx_distance > 0.0) {
        return Err(SensingError::DegenerateGeometry);
    }
    if !(rcs > 0.0) || !(carrier_hz > 0.0) {
        return Err(SensingError::Config("rcs and carrier frequency must be positive".into()));
    }
    let gt = dbm_to_mw(link.tx_gain_db); // same 10^(dB/10) conversion
    let gr = dbm_to_mw(link.rx_gain_db);
    let four_pi_cubed = (4.0 * std::f64::consts::PI).powi(3);
    let wavelength_sq = (SPEED_OF_LIGHT / carrier_hz).powi(2);
    Ok(link.efficiency * gt * gr * rcs * wavelength_sq
        / (four_pi_cubed * tx_distance.powi(2) * rx_distance.powi(2)))
}

/// Thermal noise power over `bandwidth_hz` in dBm:
/// -174 dBm/Hz + 10 log10(BW) + noise figure.
pub fn noise_power_dbm(link: &LinkBudget, bandwidth_hz: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10() + link.noise_figure_db
}

/// Same noise power on a linear milliwatt scale.
pub fn noise_power_mw(link: &LinkBudget, bandwidth_hz: f64) -> f64 {
    dbm_to_mw(noise_power_dbm(link, bandwidth_hz))
}

/// Complex path amplitude, Doppler and delay for one object/receiver pair.
/// `phase` is the bulk phase of the reflection (drawn uniformly by the
/// synthesizer).
pub fn path_complex_gain(
    link: &LinkBudget,
    truth: &PropagationTruth,
    rcs: f64,
    cfg: &OfdmConfig,
    phase: f64,
) -> Result<PathComplexGain> {
    let pg = path_gain(link, rcs, truth.tx_distance, truth.rx_distance, cfg.carrier_hz)?;
    let amp = (pg * dbm_to_mw(link.tx_power_dbm)).sqrt();
    Ok(PathComplexGain {
        gain: Complex64::from_polar(amp, phase),
        doppler_hz: -truth.range_rate * cfg.carrier_hz / SPEED_OF_LIGHT,
        delay_s: truth.bistatic_range / SPEED_OF_LIGHT,
    })
}

/// Synthesizes the received symbol grid at `rx_index`.
///
/// Path phases come from the (seed, receiver) stream and noise from a
/// separate stream, so the signal part of a noisy grid is bit-identical to
/// the `noiseless` run with the same seed. Noise per element is circular
/// Gaussian with power N0(bandwidth) + alpha * Pt.
pub fn synthesize_rx(
    scene: &SceneConfig,
    link: &LinkBudget,
    rx_index: usize,
    tx_symbols: &SymbolGrid,
    seed: u64,
    noiseless: bool,
) -> Result<SymbolGrid> {
    let cfg = &tx_symbols.cfg;
    cfg.validate()?;
    if rx_index >= scene.rx_positions.len() {
        return Err(SensingError::Config(format!(
            "receiver index {rx_index} out of range ({} receivers)",
            scene.rx_positions.len()
        )));
    }
    let rx = scene.rx_positions[rx_index];
    let (ns, nc, n) = (cfg.num_symbols, cfg.num_subcarriers, cfg.num_antennas);
    let pt_mw = dbm_to_mw(link.tx_power_dbm);

    let mut grid = SymbolGrid::zeros(*cfg);
    let mut phase_rng = stream_rng(seed, &[tag::PATH_PHASE, rx_index as u64]);

    for obj in &scene.objects {
        let truth = propagation_truth(scene.tx_position, rx, obj)?;
        let phase = phase_rng.random::<f64>() * TAU;
        let path = path_complex_gain(link, &truth, obj.rcs, cfg, phase)?;

        let a_r = steering_vector(&scene.rx_array_for(rx_index), truth.aoa);
        let a_t = steering_vector(&scene.tx_array, truth.aod);
        let sym_phase = TAU * cfg.symbol_period_s * path.doppler_hz;
        let sc_phase = -TAU * path.delay_s * cfg.subcarrier_spacing_hz;
        let sym_ramp: Vec<Complex64> =
            (0..ns).map(|i| Complex64::from_polar(1.0, sym_phase * i as f64)).collect();
        let sc_ramp: Vec<Complex64> =
            (0..nc).map(|i| Complex64::from_polar(1.0, sc_phase * i as f64)).collect();

        let tx_data = tx_symbols.data.as_slice().expect("tx grid is contiguous");
        let out = grid.data.as_slice_mut().expect("rx grid is contiguous");
        for (si, sym) in sym_ramp.iter().enumerate() {
            let row_gain = path.gain * sym;
            for (ci, sc) in sc_ramp.iter().enumerate() {
                let base = (si * nc + ci) * n;
                let cell = &tx_data[base..base + n];
                let mut s = Complex64::new(0.0, 0.0);
                for (ai, x) in a_t.iter().zip(cell) {
                    s += ai * x;
                }
                let c = row_gain * sc * s;
                for (o, ar) in out[base..base + n].iter_mut().zip(&a_r) {
                    *o += c * ar;
                }
            }
        }
    }

    if !noiseless {
        let sigma2 = noise_power_mw(link, cfg.bandwidth_hz()) + link.self_interference * pt_mw;
        let scale = (sigma2 / 2.0).sqrt();
        let mut noise_rng = stream_rng(seed, &[tag::NOISE, rx_index as u64]);
        for v in grid.data.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut noise_rng);
            let im: f64 = StandardNormal.sample(&mut noise_rng);
            *v += Complex64::new(re * scale, im * scale);
        }
    }

    Ok(grid)
}
