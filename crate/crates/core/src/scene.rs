//! Scene geometry: station layout, array response, per-path propagation truth.
//!
//! Conventions, used everywhere downstream:
//! * azimuths are measured counter-clockwise from the +x axis, in radians;
//! * range rate is d(d_T + d_R)/dt, positive when the total path lengthens;
//! * the speed of light is the exact SI value.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SensingError};

/// Exact SI speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Two stations closer than this are treated as co-located (monostatic).
pub const STATION_EPS_M: f64 = 1e-9;

/// 2-D point or vector in meters (or m/s for velocities).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn distance_to(self, other: Vec2) -> f64 {
        (other - self).norm()
    }

    /// Azimuth of `other` as seen from `self`.
    pub fn bearing_to(self, other: Vec2) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }

    /// Unit vector pointing from `self` toward `other`.
    pub fn direction_to(self, other: Vec2) -> Result<Vec2> {
        let d = other - self;
        let n = d.norm();
        if n < STATION_EPS_M {
            return Err(SensingError::DegenerateGeometry);
        }
        Ok(Vec2::new(d.x / n, d.y / n))
    }
}

impl From<(f64, f64)> for Vec2 {
    fn from((x, y): (f64, f64)) -> Self {
        Vec2 { x, y }
    }
}

impl From<Vec2> for (f64, f64) {
    fn from(v: Vec2) -> Self {
        (v.x, v.y)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a % TAU;
    if r > PI {
        r -= TAU;
    } else if r <= -PI {
        r += TAU;
    }
    r
}

/// Wrapped difference a - b in (-pi, pi].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

/// OFDM waveform dimensions shared by synthesis and estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OfdmConfig {
    /// Carrier frequency in Hz.
    pub carrier_hz: f64,
    /// Subcarrier spacing in Hz.
    pub subcarrier_spacing_hz: f64,
    /// OFDM symbol period in seconds (cyclic prefix included).
    pub symbol_period_s: f64,
    /// Number of subcarriers Nc.
    pub num_subcarriers: usize,
    /// Number of symbols Ns per sensing frame; must be even for the
    /// centered Doppler axis.
    pub num_symbols: usize,
    /// Number of antennas N on each of the tx and rx arrays.
    pub num_antennas: usize,
}

impl OfdmConfig {
    /// Occupied bandwidth Nc * subcarrier spacing.
    pub fn bandwidth_hz(&self) -> f64 {
        self.num_subcarriers as f64 * self.subcarrier_spacing_hz
    }

    /// Bistatic-range extent of one range bin, c / (Nc * subcarrier spacing).
    pub fn range_bin_m(&self) -> f64 {
        SPEED_OF_LIGHT / (self.num_subcarriers as f64 * self.subcarrier_spacing_hz)
    }

    /// Range-rate extent of one Doppler bin, c / (Ns * Ts * fc).
    pub fn velocity_bin_mps(&self) -> f64 {
        SPEED_OF_LIGHT / (self.num_symbols as f64 * self.symbol_period_s * self.carrier_hz)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz > 0.0)
            || !(self.subcarrier_spacing_hz > 0.0)
            || !(self.symbol_period_s > 0.0)
        {
            return Err(SensingError::Config(
                "carrier, subcarrier spacing and symbol period must be positive".into(),
            ));
        }
        if self.num_subcarriers == 0 || self.num_symbols == 0 || self.num_antennas == 0 {
            return Err(SensingError::Config(
                "subcarrier, symbol and antenna counts must be positive".into(),
            ));
        }
        if !self.num_symbols.is_multiple_of(2) {
            return Err(SensingError::Config(format!(
                "num_symbols must be even for the centered Doppler axis, got {}",
                self.num_symbols
            )));
        }
        Ok(())
    }
}

/// Uniform linear array: element n sits at n * spacing wavelengths along the
/// array axis, boresight perpendicular to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub num_elements: usize,
    /// Element spacing in carrier wavelengths; at most 0.5 to stay unambiguous.
    pub spacing_wavelengths: f64,
    /// Azimuth the array faces, radians.
    pub boresight_rad: f64,
}

impl ArrayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_elements == 0 {
            return Err(SensingError::Config("array needs at least one element".into()));
        }
        if !(self.spacing_wavelengths > 0.0 && self.spacing_wavelengths <= 0.5) {
            return Err(SensingError::Config(format!(
                "element spacing must be in (0, 0.5] wavelengths, got {}",
                self.spacing_wavelengths
            )));
        }
        Ok(())
    }
}

/// Far-field array response at azimuth `phi`:
/// element n = exp(+j 2 pi spacing n sin(phi - boresight)).
pub fn steering_vector(array: &ArrayConfig, phi: f64) -> Vec<Complex64> {
    let u = (phi - array.boresight_rad).sin();
    let step = TAU * array.spacing_wavelengths * u;
    (0..array.num_elements)
        .map(|n| Complex64::from_polar(1.0, step * n as f64))
        .collect()
}

/// Point scatterer with a constant velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingObject {
    pub position: Vec2,
    pub velocity: Vec2,
    /// Radar cross section scale factor (dimensionless here; folded into the
    /// path gain numerator).
    pub rcs: f64,
}

impl SensingObject {
    pub fn validate(&self) -> Result<()> {
        if !(self.rcs > 0.0) {
            return Err(SensingError::Config(format!("rcs must be positive, got {}", self.rcs)));
        }
        Ok(())
    }
}

/// Full scene: one transmitter, a ring of receivers, objects, array layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub tx_position: Vec2,
    pub rx_positions: Vec<Vec2>,
    /// Inter-site distance d0 (tx-to-rx ring radius), meters.
    pub inter_site_distance: f64,
    pub objects: Vec<SensingObject>,
    /// Transmit array; its boresight is the sensed sector center.
    pub tx_array: ArrayConfig,
    /// Receive array template; per-receiver boresights face the transmitter
    /// (see [`SceneConfig::rx_array_for`]).
    pub rx_array: ArrayConfig,
}

impl SceneConfig {
    /// Receive array at receiver `k`, boresight turned toward the
    /// transmitter. A receiver co-located with the transmitter (monostatic)
    /// keeps the transmit boresight instead.
    pub fn rx_array_for(&self, k: usize) -> ArrayConfig {
        let rx = self.rx_positions[k];
        let boresight = if rx.distance_to(self.tx_position) < STATION_EPS_M {
            self.tx_array.boresight_rad
        } else {
            rx.bearing_to(self.tx_position)
        };
        ArrayConfig { boresight_rad: boresight, ..self.rx_array }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rx_positions.is_empty() {
            return Err(SensingError::Config("scene needs at least one receiver".into()));
        }
        if !(self.inter_site_distance > 0.0) {
            return Err(SensingError::Config("inter-site distance must be positive".into()));
        }
        self.tx_array.validate()?;
        self.rx_array.validate()?;
        for obj in &self.objects {
            obj.validate()?;
        }
        Ok(())
    }
}

/// Exact per-path quantities for one (tx, rx, object) triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationTruth {
    /// Transmitter-to-object distance d_T, meters.
    pub tx_distance: f64,
    /// Object-to-receiver distance d_R, meters.
    pub rx_distance: f64,
    /// Total path d_T + d_R, meters.
    pub bistatic_range: f64,
    /// d(d_T + d_R)/dt, m/s; positive when the path lengthens.
    pub range_rate: f64,
    /// Azimuth of the object as seen from the receiver, radians.
    pub aoa: f64,
    /// Azimuth of the object as seen from the transmitter, radians.
    pub aod: f64,
}

/// Receiver ring of the hexagonal layout: receiver k (1-based) sits at
/// azimuth (2k - 1) pi / count and distance d0 from the transmitter.
pub fn hex_rx_positions(tx: Vec2, d0: f64, count: usize) -> Vec<Vec2> {
    (1..=count)
        .map(|k| {
            let az = (2 * k - 1) as f64 * PI / count as f64;
            Vec2::new(tx.x + d0 * az.cos(), tx.y + d0 * az.sin())
        })
        .collect()
}

/// Exact geometry for one propagation path.
///
/// The range rate is the sum of the object velocity projected on the unit
/// vectors pointing from each station toward the object, i.e. the time
/// derivative of d_T + d_R.
pub fn propagation_truth(tx: Vec2, rx: Vec2, obj: &SensingObject) -> Result<PropagationTruth> {
    let from_tx = obj.position - tx;
    let from_rx = obj.position - rx;
    let d_t = from_tx.norm();
    let d_r = from_rx.norm();
    if d_t < STATION_EPS_M || d_r < STATION_EPS_M {
        return Err(SensingError::ObjectAtStation);
    }
    let u_t = Vec2::new(from_tx.x / d_t, from_tx.y / d_t);
    let u_r = Vec2::new(from_rx.x / d_r, from_rx.y / d_r);
    Ok(PropagationTruth {
        tx_distance: d_t,
        rx_distance: d_r,
        bistatic_range: d_t + d_r,
        range_rate: obj.velocity.dot(u_t) + obj.velocity.dot(u_r),
        aoa: from_rx.y.atan2(from_rx.x),
        aod: from_tx.y.atan2(from_tx.x),
    })
}
