//! Scene construction for experiments: random trial draws inside the
//! served sub-sensing cell, per-mode station selection, and exact on-bin
//! scenes for estimator equivalence checks.

use rand::Rng;

use crate::channel::LinkBudget;
use crate::error::{Result, SensingError};
use crate::linkbudget::{schedule_receivers, SensingMode};
use crate::rng::{stream_rng, tag};
use crate::scene::{
    propagation_truth, OfdmConfig, SceneConfig, SensingObject, Vec2,
};

/// Monostatic runs model transmitter leakage with this self-interference
/// fraction; the separated modes run interference-free.
pub const MONO_SELF_INTERFERENCE: f64 = 1e-7;

/// One Monte Carlo draw: the object under test plus the seed that drives
/// its waveform, phases and noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialDraw {
    pub object: SensingObject,
    pub synth_seed: u64,
}

/// Signed distance of `p` to the line through `a` and `b`, normalized.
fn line_distance(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    let ab = b - a;
    let ap = p - a;
    (ab.x * ap.y - ab.y * ap.x).abs() / ab.norm()
}

fn inside_triangle(tri: &[Vec2; 3], p: Vec2) -> bool {
    let cross = |a: Vec2, b: Vec2| a.x * b.y - a.y * b.x;
    let s0 = cross(tri[1] - tri[0], p - tri[0]);
    let s1 = cross(tri[2] - tri[1], p - tri[1]);
    let s2 = cross(tri[0] - tri[2], p - tri[2]);
    (s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0) || (s0 <= 0.0 && s1 <= 0.0 && s2 <= 0.0)
}

/// Uniform draw over the triangle eroded by `margin`: rejection sampling on
/// a barycentric draw, accepting points at least `margin` from every edge.
/// Keeps objects off the station baselines, where ellipse inversion blows
/// quantization error up.
pub fn draw_position(rng: &mut impl Rng, tri: &[Vec2; 3], margin: f64) -> Vec2 {
    for _ in 0..10_000 {
        let r1: f64 = rng.random();
        let r2: f64 = rng.random();
        let s = r1.sqrt();
        let p = tri[0] * (1.0 - s) + tri[1] * (s * (1.0 - r2)) + tri[2] * (s * r2);
        let clear = inside_triangle(tri, p)
            && (0..3).all(|i| line_distance(tri[i], tri[(i + 1) % 3], p) >= margin);
        if clear {
            return p;
        }
    }
    panic!("margin {margin} leaves no room inside the cell triangle");
}

/// The object and synthesis seed for trial `trial`. A trial is a pure
/// function of (seed, trial), so any subset of trials reproduces exactly.
pub fn draw_trial(
    tri: &[Vec2; 3],
    margin: f64,
    velocity_max: f64,
    rcs: f64,
    seed: u64,
    trial: u64,
) -> TrialDraw {
    let mut rng = stream_rng(seed, &[tag::TRIAL, trial]);
    let position = draw_position(&mut rng, tri, margin);
    let speed: f64 = rng.random_range(0.0..=velocity_max);
    let heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    TrialDraw {
        object: SensingObject {
            position,
            velocity: Vec2::new(speed * heading.cos(), speed * heading.sin()),
            rcs,
        },
        synth_seed: rng.random(),
    }
}

/// Stations participating in one mode run, derived from the base ring:
/// monostatic senses from the transmitter itself (with leakage), bistatic
/// uses the first receiver of the scheduled pair, multistatic uses both.
pub fn scene_for_mode(
    base: &SceneConfig,
    mode: SensingMode,
    target_azimuth: f64,
    object: SensingObject,
    link: &LinkBudget,
) -> (SceneConfig, LinkBudget) {
    let mut scene = base.clone();
    scene.objects = vec![object];
    let mut link = *link;
    match mode {
        SensingMode::Monostatic => {
            scene.rx_positions = vec![base.tx_position];
            link.self_interference = MONO_SELF_INTERFERENCE;
        }
        SensingMode::Bistatic => {
            let (a, _) = schedule_receivers(base, target_azimuth);
            scene.rx_positions = vec![base.rx_positions[a]];
            link.self_interference = 0.0;
        }
        SensingMode::Multistatic => {
            let (a, b) = schedule_receivers(base, target_azimuth);
            scene.rx_positions = vec![base.rx_positions[a], base.rx_positions[b]];
            link.self_interference = 0.0;
        }
    }
    (scene, link)
}

/// A scene whose single object sits exactly on the estimator's sampling
/// lattice, plus the lattice-exact parameters a perfect detector must
/// report.
#[derive(Debug, Clone, PartialEq)]
pub struct OnBinTarget {
    pub scene: SceneConfig,
    pub aoa: f64,
    pub bistatic_range: f64,
    pub range_rate: f64,
}

/// Builds a single-receiver scene whose object lies on an AoA grid point
/// (`aoa_steps` grid steps off the receive boresight), at bistatic range
/// exactly `range_bin` range bins, moving so its range rate is exactly
/// `doppler_bin` Doppler bins. The receiver is ring station `rx_ring_index`
/// of `base`.
#[allow(clippy::too_many_arguments)] // each lattice axis is pinned independently
pub fn on_bin_scene(
    base: &SceneConfig,
    cfg: &OfdmConfig,
    rx_ring_index: usize,
    aoa_steps: i64,
    aoa_step_rad: f64,
    range_bin: usize,
    doppler_bin: i64,
    rcs: f64,
) -> Result<OnBinTarget> {
    let tx = base.tx_position;
    let rx = base.rx_positions[rx_ring_index];
    let boresight = rx.bearing_to(tx);
    // The sweep grid is boresight + k*step; reproduce that arithmetic
    // exactly so the detector's reported angle can match bit for bit.
    let aoa = boresight + aoa_steps as f64 * aoa_step_rad;

    let d_b = rx.distance_to(tx);
    let target_range = range_bin as f64 * cfg.range_bin_m();
    if target_range <= d_b + 1.0 {
        return Err(SensingError::Config(format!(
            "range bin {range_bin} ({target_range:.1} m) does not clear the {d_b:.1} m baseline"
        )));
    }
    if doppler_bin.unsigned_abs() as usize >= cfg.num_symbols / 2 {
        return Err(SensingError::Config(format!(
            "doppler bin {doppler_bin} is outside the unambiguous +-{} window",
            cfg.num_symbols / 2
        )));
    }

    // Bistatic range along the AoA ray grows monotonically with the
    // receiver leg; bisect for the leg length that hits the target bin.
    let u = Vec2::new(aoa.cos(), aoa.sin());
    let range_at = |d_r: f64| d_r + (rx + u * d_r).distance_to(tx);
    let (mut lo, mut hi) = (1e-3, target_range);
    debug_assert!(range_at(lo) < target_range && range_at(hi) > target_range);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if range_at(mid) < target_range {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let d_r = 0.5 * (lo + hi);
    let position = rx + u * d_r;

    // Velocity with the prescribed projection on the bistatic gradient and
    // nothing orthogonal to it.
    let stationary = SensingObject { position, velocity: Vec2::new(0.0, 0.0), rcs };
    let truth = propagation_truth(tx, rx, &stationary)?;
    let from_tx = position - tx;
    let coeff = Vec2::new(
        from_tx.x / truth.tx_distance + u.x,
        from_tx.y / truth.tx_distance + u.y,
    );
    let coeff_sq = coeff.dot(coeff);
    if coeff_sq < 1e-12 {
        return Err(SensingError::Config(
            "object sits on the baseline; its range rate is blind there".into(),
        ));
    }
    let target_rate = doppler_bin as f64 * cfg.velocity_bin_mps();
    let velocity = coeff * (target_rate / coeff_sq);

    let mut scene = base.clone();
    scene.rx_positions = vec![rx];
    scene.objects = vec![SensingObject { position, velocity, rcs }];
    Ok(OnBinTarget { scene, aoa, bistatic_range: target_range, range_rate: target_rate })
}
