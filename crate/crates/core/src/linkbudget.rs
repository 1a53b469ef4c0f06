//! Link-budget evaluation over space and sensing modes.
//!
//! SNR = PG * Pt / (N0 + I0), with the bistatic radar path gain from the
//! channel module, thermal noise over the full OFDM bandwidth, and
//! self-interference I0 = alpha * Pt only when transmitter and receiver are
//! the same station. The multistatic mode serves each 120-degree
//! sub-sensing cell with the two receivers inside it and scores a point by
//! the better of the two.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::channel::{dbm_to_mw, mw_to_dbm, noise_power_mw, path_gain, LinkBudget};
use crate::error::Result;
use crate::scene::{OfdmConfig, SceneConfig, Vec2};

/// Which station topology is doing the sensing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensingMode {
    Monostatic,
    Bistatic,
    Multistatic,
}

impl SensingMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SensingMode::Monostatic => "monostatic",
            SensingMode::Bistatic => "bistatic",
            SensingMode::Multistatic => "multistatic",
        }
    }
}

/// A point SNR question: where is the object and how is it sensed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrQuery {
    pub mode: SensingMode,
    pub obj_position: Vec2,
    pub rcs: f64,
}

/// Rectangular dB lattice; `values[(row, col)]` sits at
/// `origin + (col*step, row*step)`. Cells outside the evaluated region and
/// cells on a station are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub origin: Vec2,
    pub step: f64,
    pub values: Array2<f64>,
}

impl Heatmap {
    pub fn coord(&self, row: usize, col: usize) -> Vec2 {
        self.origin + Vec2::new(col as f64 * self.step, row as f64 * self.step)
    }

    /// Row-major grid serialization with an origin/step header.
    pub fn grid_csv(&self) -> String {
        let (rows, cols) = self.values.dim();
        let mut out = String::new();
        out.push_str("origin_x_m,origin_y_m,step_m,rows,cols\n");
        out.push_str(&format!("{},{},{},{rows},{cols}\n", self.origin.x, self.origin.y, self.step));
        for row in self.values.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// One of the three 120-degree service regions: the triangle spanned by the
/// transmitter and its two scheduled receivers, dilated by a margin so the
/// region reaches past the station baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubSensingCell {
    pub vertices: [Vec2; 3],
    pub margin: f64,
}

impl SubSensingCell {
    pub fn contains(&self, p: Vec2) -> bool {
        distance_to_triangle(&self.vertices, p) <= self.margin
    }

    /// Axis-aligned bounds of the dilated region.
    pub fn bounds(&self) -> (Vec2, Vec2) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices[1..] {
            lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo - Vec2::new(self.margin, self.margin), hi + Vec2::new(self.margin, self.margin))
    }
}

fn distance_to_triangle(tri: &[Vec2; 3], p: Vec2) -> f64 {
    let cross = |a: Vec2, b: Vec2| a.x * b.y - a.y * b.x;
    let s0 = cross(tri[1] - tri[0], p - tri[0]);
    let s1 = cross(tri[2] - tri[1], p - tri[1]);
    let s2 = cross(tri[0] - tri[2], p - tri[2]);
    if (s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0) || (s0 <= 0.0 && s1 <= 0.0 && s2 <= 0.0) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..3 {
        best = best.min(segment_distance(tri[i], tri[(i + 1) % 3], p));
    }
    best
}

fn segment_distance(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    let ab = b - a;
    let len_sqr = ab.dot(ab);
    if len_sqr == 0.0 {
        return p.distance_to(a);
    }
    let t = ((p - a).dot(ab) / len_sqr).clamp(0.0, 1.0);
    p.distance_to(a + ab * t)
}

/// SNR of one tx/rx pair against an object, interference-free.
pub fn bistatic_snr_db(
    link: &LinkBudget,
    cfg: &OfdmConfig,
    tx: Vec2,
    rx: Vec2,
    obj_position: Vec2,
    rcs: f64,
) -> Result<f64> {
    let pg = path_gain(
        link,
        rcs,
        tx.distance_to(obj_position),
        rx.distance_to(obj_position),
        cfg.carrier_hz,
    )?;
    let n0 = noise_power_mw(link, cfg.bandwidth_hz());
    Ok(mw_to_dbm(pg * dbm_to_mw(link.tx_power_dbm) / n0))
}

/// Mode-dependent receive SNR at one object position.
///
/// Monostatic senses from the transmitter with I0 = alpha * Pt taken from
/// the link budget; bistatic uses the scene's first receiver; multistatic
/// takes the better of the two receivers scheduled for the object's
/// azimuth. The separated modes carry no self-interference.
pub fn snr_db(
    scene: &SceneConfig,
    link: &LinkBudget,
    cfg: &OfdmConfig,
    mode: SensingMode,
    obj_position: Vec2,
    rcs: f64,
) -> Result<f64> {
    match mode {
        SensingMode::Monostatic => {
            let d = scene.tx_position.distance_to(obj_position);
            let pg = path_gain(link, rcs, d, d, cfg.carrier_hz)?;
            let pt = dbm_to_mw(link.tx_power_dbm);
            let denom = noise_power_mw(link, cfg.bandwidth_hz()) + link.self_interference * pt;
            Ok(mw_to_dbm(pg * pt / denom))
        }
        SensingMode::Bistatic => {
            let rx = *scene.rx_positions.first().ok_or_else(|| {
                crate::error::SensingError::Config("bistatic sensing needs a receiver".into())
            })?;
            bistatic_snr_db(link, cfg, scene.tx_position, rx, obj_position, rcs)
        }
        SensingMode::Multistatic => {
            let azimuth = scene.tx_position.bearing_to(obj_position);
            let (a, b) = schedule_receivers(scene, azimuth);
            let sa =
                bistatic_snr_db(link, cfg, scene.tx_position, scene.rx_positions[a], obj_position, rcs)?;
            let sb =
                bistatic_snr_db(link, cfg, scene.tx_position, scene.rx_positions[b], obj_position, rcs)?;
            Ok(sa.max(sb))
        }
    }
}

/// Picks the receiver pair serving the sub-sensing cell that covers
/// `target_azimuth`. The ring of six receivers at bearings (2k+1)*30 deg
/// partitions into three cells centered at 0, 120 and 240 degrees, each
/// containing two adjacent receivers.
pub fn schedule_receivers(layout: &SceneConfig, target_azimuth: f64) -> (usize, usize) {
    assert_eq!(layout.rx_positions.len(), 6, "scheduling assumes the six-receiver ring");
    let sector = 120f64.to_radians();
    let shifted = (target_azimuth + sector / 2.0).rem_euclid(std::f64::consts::TAU);
    let s = ((shifted / sector).floor() as usize).min(2);
    [(0, 5), (1, 2), (3, 4)][s]
}

/// The service region for `target_azimuth`: the tx/rx_a/rx_b triangle
/// dilated by a quarter of the inter-site distance.
pub fn sub_sensing_cell(layout: &SceneConfig, target_azimuth: f64) -> SubSensingCell {
    let (a, b) = schedule_receivers(layout, target_azimuth);
    SubSensingCell {
        vertices: [layout.tx_position, layout.rx_positions[a], layout.rx_positions[b]],
        margin: layout.inter_site_distance / 4.0,
    }
}

/// Evaluates `snr_db` on a step lattice covering the cell. Lattice points
/// outside the cell or on a station are NaN.
pub fn snr_heatmap(
    scene: &SceneConfig,
    link: &LinkBudget,
    cfg: &OfdmConfig,
    mode: SensingMode,
    cell: &SubSensingCell,
    step: f64,
) -> Heatmap {
    assert!(step > 0.0, "heatmap step must be positive");
    let (lo, hi) = cell.bounds();
    let origin = Vec2::new((lo.x / step).floor() * step, (lo.y / step).floor() * step);
    let cols = ((hi.x - origin.x) / step).ceil() as usize + 1;
    let rows = ((hi.y - origin.y) / step).ceil() as usize + 1;
    let mut values = Array2::from_elem((rows, cols), f64::NAN);
    let mut stations = vec![scene.tx_position];
    stations.extend_from_slice(&scene.rx_positions);
    for r in 0..rows {
        for c in 0..cols {
            let p = origin + Vec2::new(c as f64 * step, r as f64 * step);
            if !cell.contains(p) {
                continue;
            }
            if stations.iter().any(|s| s.distance_to(p) < 1e-9) {
                continue;
            }
            if let Ok(db) = snr_db(scene, link, cfg, mode, p, 1.0) {
                values[(r, c)] = db;
            }
        }
    }
    Heatmap { origin, step, values }
}
