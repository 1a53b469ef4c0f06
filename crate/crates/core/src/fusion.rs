//! Joint processing across receivers.
//!
//! Each receiver's (AoA, bistatic range) pair pins the object to one point
//! of an ellipse with tx and rx as foci; the law-of-cosines inversion
//! recovers the rx-to-object distance. Per-receiver positions are clustered,
//! averaged, and the cluster's range rates are solved jointly for the full
//! velocity vector. Monostatic and bistatic single-station estimates are
//! provided as benchmarking baselines.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SensingError};
use crate::estimator::Detection;
use crate::scene::{angle_diff, Vec2};

/// A group of per-receiver detections attributed to one object.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub members: Vec<(usize, Detection, Vec2)>,
    pub centroid: Vec2,
}

/// Fused object state. `velocity` is absent when the cluster geometry
/// cannot support a full-vector solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedTrack {
    pub position: Vec2,
    pub velocity: Option<Vec2>,
    pub aod: f64,
    pub members: Vec<(usize, Detection)>,
}

/// Strategy for recovering (vx, vy) from clustered range rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocitySolveMode {
    /// Uses the fused AoD directly; needs >= 2 members with distinct AoA.
    TwoRxWithAod,
    /// Differences member equations pairwise so the AoD terms cancel;
    /// needs >= 3 members.
    ThreeRxAodFree,
}

const COND_LIMIT: f64 = 1e8;

/// Distance from `rx` to the ellipse point at bearing `aoa` whose bistatic
/// range is `d_hat`: d_R = (d̂² - d_b²) / (2(d̂ - d_b·cos γ)) with γ the
/// angle between the AoA and the rx→tx bearing. Exact inverse of the
/// forward geometry; also covers the monostatic case d_b = 0.
pub fn ellipse_range(d_hat: f64, aoa: f64, rx: Vec2, tx: Vec2) -> Result<f64> {
    let d_b = rx.distance_to(tx);
    if d_hat <= d_b * (1.0 + 1e-9) {
        return Err(SensingError::InsideBaseline { range: d_hat, baseline: d_b });
    }
    let gamma = if d_b > 0.0 { angle_diff(aoa, rx.bearing_to(tx)) } else { 0.0 };
    Ok((d_hat * d_hat - d_b * d_b) / (2.0 * (d_hat - d_b * gamma.cos())))
}

/// Per-receiver position: rx + d_R·(cos aoa, sin aoa).
pub fn position_from_detection(det: &Detection, rx: Vec2, tx: Vec2) -> Result<Vec2> {
    let d_r = ellipse_range(det.bistatic_range, det.aoa, rx, tx)?;
    Ok(rx + Vec2::new(det.aoa.cos(), det.aoa.sin()) * d_r)
}

/// Greedy centroid clustering. Each item joins the nearest existing cluster
/// centroid within `radius`, else founds its own. A cluster holds at most
/// one member per receiver: on conflict the member closer to the centroid
/// stays and the loser founds a new cluster.
pub fn cluster_positions(items: &[(usize, Detection, Vec2)], radius: f64) -> Vec<Cluster> {
    assert!(radius > 0.0, "cluster radius must be positive");
    let mut clusters: Vec<Cluster> = Vec::new();
    for &(rx_index, det, pos) in items {
        let nearest = clusters
            .iter_mut()
            .map(|c| (c.centroid.distance_to(pos), c))
            .filter(|(d, _)| *d <= radius)
            .min_by(|a, b| a.0.total_cmp(&b.0));
        let Some((dist, cluster)) = nearest else {
            clusters.push(Cluster { members: vec![(rx_index, det, pos)], centroid: pos });
            continue;
        };
        if let Some(slot) = cluster.members.iter().position(|(k, _, _)| *k == rx_index) {
            let incumbent = cluster.members[slot];
            if dist < cluster.centroid.distance_to(incumbent.2) {
                cluster.members[slot] = (rx_index, det, pos);
                recompute_centroid(cluster);
                // The displaced member starts over; it may not rejoin a
                // cluster that already holds its receiver, so it founds a
                // fresh singleton.
                clusters.push(Cluster { members: vec![incumbent], centroid: incumbent.2 });
            } else {
                clusters.push(Cluster { members: vec![(rx_index, det, pos)], centroid: pos });
            }
        } else {
            cluster.members.push((rx_index, det, pos));
            recompute_centroid(cluster);
        }
    }
    clusters
}

fn recompute_centroid(cluster: &mut Cluster) {
    let mut sum = Vec2::new(0.0, 0.0);
    for (_, _, p) in &cluster.members {
        sum = sum + *p;
    }
    cluster.centroid = sum * (1.0 / cluster.members.len() as f64);
}

/// Mean member position and the departure bearing from the transmitter.
pub fn fuse_position(cluster: &Cluster, tx: Vec2) -> (Vec2, f64) {
    assert!(!cluster.members.is_empty(), "cluster must be nonempty");
    let mut sum = Vec2::new(0.0, 0.0);
    for (_, _, p) in &cluster.members {
        sum = sum + *p;
    }
    let position = sum * (1.0 / cluster.members.len() as f64);
    (position, tx.bearing_to(position))
}

/// Recovers (vx, vy) from the cluster's range rates. Each member k
/// contributes one equation
/// (cos aoa_k + cos aod)·vx + (sin aoa_k + sin aod)·vy = range_rate_k;
/// solved by least squares, or differenced against the first member to
/// eliminate the aod terms in `ThreeRxAodFree` mode.
pub fn velocity_solve(
    cluster: &Cluster,
    mode: VelocitySolveMode,
    aod: f64,
) -> Result<Vec2> {
    let m = &cluster.members;
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    match mode {
        VelocitySolveMode::TwoRxWithAod => {
            if m.len() < 2 {
                return Err(SensingError::Config(
                    "velocity solve with AoD needs at least two receivers".into(),
                ));
            }
            for (_, det, _) in m {
                rows.push((det.aoa.cos() + aod.cos(), det.aoa.sin() + aod.sin(), det.range_rate));
            }
        }
        VelocitySolveMode::ThreeRxAodFree => {
            if m.len() < 3 {
                return Err(SensingError::Config(
                    "AoD-free velocity solve needs at least three receivers".into(),
                ));
            }
            let (_, d0, _) = &m[0];
            for (_, det, _) in &m[1..] {
                rows.push((
                    det.aoa.cos() - d0.aoa.cos(),
                    det.aoa.sin() - d0.aoa.sin(),
                    det.range_rate - d0.range_rate,
                ));
            }
        }
    }
    least_squares_2(&rows)
}

/// Least-squares solve of rows (a, b | y) for (vx, vy) via normal
/// equations, with a condition-number gate on the stacked matrix.
fn least_squares_2(rows: &[(f64, f64, f64)]) -> Result<Vec2> {
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(a, b, y) in rows {
        s11 += a * a;
        s12 += a * b;
        s22 += b * b;
        t1 += a * y;
        t2 += b * y;
    }
    // Eigenvalues of the 2x2 Gram matrix give the squared singular values.
    let mean = 0.5 * (s11 + s22);
    let disc = (0.25 * (s11 - s22) * (s11 - s22) + s12 * s12).sqrt();
    let (l_max, l_min) = (mean + disc, mean - disc);
    let cond = if l_min > 0.0 { (l_max / l_min).sqrt() } else { f64::INFINITY };
    if !(cond <= COND_LIMIT) {
        return Err(SensingError::SingularGeometry(cond));
    }
    let det = s11 * s22 - s12 * s12;
    Ok(Vec2::new((s22 * t1 - s12 * t2) / det, (s11 * t2 - s12 * t1) / det))
}

/// Single-station baseline: the station sees the round trip, so range and
/// range rate are halved and only the radial velocity component is
/// observable.
pub fn monostatic_estimate(det: &Detection, station: Vec2) -> FusedTrack {
    let dir = Vec2::new(det.aoa.cos(), det.aoa.sin());
    FusedTrack {
        position: station + dir * (det.bistatic_range / 2.0),
        velocity: Some(dir * (det.range_rate / 2.0)),
        aod: det.aoa,
        members: vec![(det.rx_index, *det)],
    }
}

/// Two-station baseline: position from the ellipse inversion; velocity is
/// the minimum-norm solution of the single range-rate equation, (0,0) when
/// the coefficient vector degenerates.
pub fn bistatic_estimate(det: &Detection, rx: Vec2, tx: Vec2) -> Result<FusedTrack> {
    let position = position_from_detection(det, rx, tx)?;
    let aod = tx.bearing_to(position);
    let coeff = Vec2::new(det.aoa.cos() + aod.cos(), det.aoa.sin() + aod.sin());
    let norm_sqr = coeff.dot(coeff);
    let velocity = if norm_sqr < 1e-12 {
        Vec2::new(0.0, 0.0)
    } else {
        coeff * (det.range_rate / norm_sqr)
    };
    Ok(FusedTrack {
        position,
        velocity: Some(velocity),
        aod,
        members: vec![(det.rx_index, *det)],
    })
}

/// Full multistatic fusion: per-receiver positions, clustering, mean
/// position, AoD, and a joint velocity solve per cluster. Detections whose
/// range falls inside the baseline are dropped as corrupt. Tracks are
/// ordered by member count (ties by summed peak power).
pub fn fuse_multistatic(
    detections: &[Detection],
    rx_positions: &[Vec2],
    tx: Vec2,
    cluster_radius: f64,
    mode: VelocitySolveMode,
) -> Vec<FusedTrack> {
    let mut items = Vec::new();
    for det in detections {
        let rx = rx_positions[det.rx_index];
        if let Ok(pos) = position_from_detection(det, rx, tx) {
            items.push((det.rx_index, *det, pos));
        }
    }
    let mut tracks: Vec<FusedTrack> = cluster_positions(&items, cluster_radius)
        .into_iter()
        .map(|cluster| {
            let (position, aod) = fuse_position(&cluster, tx);
            let velocity = velocity_solve(&cluster, mode, aod).ok();
            FusedTrack {
                position,
                velocity,
                aod,
                members: cluster.members.into_iter().map(|(k, d, _)| (k, d)).collect(),
            }
        })
        .collect();
    tracks.sort_by(|a, b| {
        let power = |t: &FusedTrack| t.members.iter().map(|(_, d)| d.peak_power).sum::<f64>();
        b.members.len().cmp(&a.members.len()).then(power(b).total_cmp(&power(a)))
    });
    tracks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::scene::{hex_rx_positions, propagation_truth, SensingObject};
    use proptest::prelude::*;
    use rand::Rng;

    /// Exact detection synthesized from geometry, bypassing the estimator.
    fn exact_detection(tx: Vec2, rx: Vec2, obj: &SensingObject, rx_index: usize) -> Detection {
        let t = propagation_truth(tx, rx, obj).unwrap();
        Detection {
            aoa: t.aoa,
            bistatic_range: t.bistatic_range,
            range_rate: t.range_rate,
            peak_power: 1.0,
            rx_index,
        }
    }

    fn still(position: Vec2) -> SensingObject {
        SensingObject { position, velocity: Vec2::new(0.0, 0.0), rcs: 1.0 }
    }

    #[test]
    fn ellipse_range_reference_geometry() {
        let tx = Vec2::new(0.0, 0.0);
        let rx = Vec2::new(260.0, 150.0);
        let obj = still(Vec2::new(150.0, 0.0));
        let t = propagation_truth(tx, rx, &obj).unwrap();
        let d_r = ellipse_range(t.bistatic_range, t.aoa, rx, tx).unwrap();
        assert!((d_r / t.rx_distance - 1.0).abs() < 1e-12, "{d_r} vs {}", t.rx_distance);
        assert!((t.rx_distance - 186.011).abs() < 1e-3, "fixture sanity");
    }

    #[test]
    fn ellipse_range_collinear_hand_value() {
        // Object on the tx-rx axis beyond the rx: gamma = pi, so
        // d_R = (500^2 - 300^2) / (2*(500 + 300)) = 100.
        let d_r = ellipse_range(500.0, 0.0, Vec2::new(300.0, 0.0), Vec2::new(0.0, 0.0)).unwrap();
        assert!((d_r - 100.0).abs() < 1e-12);
    }

    #[test]
    fn ellipse_range_rejects_inside_baseline() {
        let tx = Vec2::new(0.0, 0.0);
        let rx = Vec2::new(300.0, 0.0);
        for d in [300.0, 299.0, 150.0] {
            let err = ellipse_range(d, 1.0, rx, tx).unwrap_err();
            assert!(matches!(err, SensingError::InsideBaseline { .. }), "{d} -> {err}");
        }
    }

    #[test]
    fn ellipse_range_monostatic_halves() {
        let p = Vec2::new(50.0, -20.0);
        let d_r = ellipse_range(240.0, 0.3, p, p).unwrap();
        assert!((d_r - 120.0).abs() < 1e-12, "zero baseline degenerates to d/2");
    }

    #[test]
    fn position_round_trips_through_geometry() {
        let tx = Vec2::new(0.0, 0.0);
        let rxs = hex_rx_positions(tx, 300.0, 6);
        let mut rng = stream_rng(31, &[7]);
        for _ in 0..2000 {
            let pos = Vec2::new(rng.random_range(-400.0..400.0), rng.random_range(-400.0..400.0));
            let obj = still(pos);
            for (k, rx) in rxs.iter().enumerate() {
                // Skip near-baseline geometries; the inversion is exact but
                // the acceptance draw region also excludes them.
                if pos.distance_to(tx) < 5.0 || pos.distance_to(*rx) < 5.0 {
                    continue;
                }
                let t = propagation_truth(tx, *rx, &obj).unwrap();
                if t.bistatic_range < tx.distance_to(*rx) + 1.0 {
                    continue;
                }
                let det = exact_detection(tx, *rx, &obj, k);
                let got = position_from_detection(&det, *rx, tx).unwrap();
                assert!(got.distance_to(pos) < 1e-9, "rx {k}: {got:?} vs {pos:?}");
            }
        }
    }

    #[test]
    fn two_receivers_agree_on_exact_truth() {
        let tx = Vec2::new(0.0, 0.0);
        let rxs = hex_rx_positions(tx, 300.0, 6);
        let obj = still(Vec2::new(120.0, 40.0));
        let p0 = position_from_detection(&exact_detection(tx, rxs[0], &obj, 0), rxs[0], tx).unwrap();
        let p5 = position_from_detection(&exact_detection(tx, rxs[5], &obj, 5), rxs[5], tx).unwrap();
        assert!(p0.distance_to(p5) < 1e-6);
    }

    #[test]
    fn velocity_solve_hand_checked_system() {
        // phi_R = +-30 deg, phi_T = 0, v = (10, 5):
        // v_par_1 = (cos30+1)*10 + (sin30)*5 = 21.16
        // v_par_2 = (cos30+1)*10 - (sin30)*5 = 16.16
        let a30 = 30f64.to_radians();
        let mk = |aoa: f64, rate: f64, k: usize| Detection {
            aoa,
            bistatic_range: 400.0,
            range_rate: rate,
            peak_power: 1.0,
            rx_index: k,
        };
        let r1 = (a30.cos() + 1.0) * 10.0 + a30.sin() * 5.0;
        let r2 = (a30.cos() + 1.0) * 10.0 - a30.sin() * 5.0;
        assert!((r1 - 21.160).abs() < 1e-3);
        assert!((r2 - 16.160).abs() < 1e-3);
        let cluster = Cluster {
            members: vec![
                (0, mk(a30, r1, 0), Vec2::new(0.0, 0.0)),
                (1, mk(-a30, r2, 1), Vec2::new(0.0, 0.0)),
            ],
            centroid: Vec2::new(0.0, 0.0),
        };
        let v = velocity_solve(&cluster, VelocitySolveMode::TwoRxWithAod, 0.0).unwrap();
        assert!((v.x - 10.0).abs() < 1e-9 && (v.y - 5.0).abs() < 1e-9, "{v:?}");
    }

    #[test]
    fn velocity_solve_zero_rates_gives_zero() {
        let mk = |aoa: f64, k: usize| Detection {
            aoa,
            bistatic_range: 400.0,
            range_rate: 0.0,
            peak_power: 1.0,
            rx_index: k,
        };
        let cluster = Cluster {
            members: vec![
                (0, mk(0.5, 0), Vec2::new(0.0, 0.0)),
                (1, mk(-0.4, 1), Vec2::new(0.0, 0.0)),
                (2, mk(1.2, 2), Vec2::new(0.0, 0.0)),
            ],
            centroid: Vec2::new(0.0, 0.0),
        };
        for mode in [VelocitySolveMode::TwoRxWithAod, VelocitySolveMode::ThreeRxAodFree] {
            let v = velocity_solve(&cluster, mode, 0.1).unwrap();
            assert!(v.norm() < 1e-12, "{mode:?} -> {v:?}");
        }
    }

    #[test]
    fn velocity_solve_rejects_collinear_bearings() {
        let mk = |k: usize| Detection {
            aoa: 0.7,
            bistatic_range: 400.0,
            range_rate: 3.0,
            peak_power: 1.0,
            rx_index: k,
        };
        let cluster = Cluster {
            members: (0..3).map(|k| (k, mk(k), Vec2::new(0.0, 0.0))).collect(),
            centroid: Vec2::new(0.0, 0.0),
        };
        for mode in [VelocitySolveMode::TwoRxWithAod, VelocitySolveMode::ThreeRxAodFree] {
            let err = velocity_solve(&cluster, mode, 0.7).unwrap_err();
            assert!(matches!(err, SensingError::SingularGeometry(_)), "{mode:?} -> {err}");
        }
    }

    /// Builds a cluster of exact detections of one moving object.
    fn exact_cluster(tx: Vec2, rxs: &[Vec2], obj: &SensingObject) -> Cluster {
        let members: Vec<(usize, Detection, Vec2)> = rxs
            .iter()
            .enumerate()
            .map(|(k, rx)| {
                let det = exact_detection(tx, *rx, obj, k);
                let pos = position_from_detection(&det, *rx, tx).unwrap();
                (k, det, pos)
            })
            .collect();
        let mut c = Cluster { members, centroid: Vec2::new(0.0, 0.0) };
        recompute_centroid(&mut c);
        c
    }

    #[test]
    fn velocity_modes_agree_on_exact_inputs() {
        let tx = Vec2::new(0.0, 0.0);
        let rxs = hex_rx_positions(tx, 300.0, 6);
        let mut rng = stream_rng(77, &[3]);
        for _ in 0..500 {
            let obj = SensingObject {
                position: Vec2::new(rng.random_range(50.0..250.0), rng.random_range(-120.0..120.0)),
                velocity: Vec2::new(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0)),
                rcs: 1.0,
            };
            let cluster = exact_cluster(tx, &rxs[..3], &obj);
            let (_, aod) = fuse_position(&cluster, tx);
            let v2 = velocity_solve(&cluster, VelocitySolveMode::TwoRxWithAod, aod).unwrap();
            let v3 = velocity_solve(&cluster, VelocitySolveMode::ThreeRxAodFree, aod).unwrap();
            assert!((v2 - obj.velocity).norm() < 1e-9, "two-rx {v2:?} vs {:?}", obj.velocity);
            assert!((v3 - obj.velocity).norm() < 1e-9, "aod-free {v3:?} vs {:?}", obj.velocity);
        }
    }

    #[test]
    fn clustering_separates_distant_objects() {
        let tx = Vec2::new(0.0, 0.0);
        let rxs = hex_rx_positions(tx, 300.0, 6);
        let a = Vec2::new(100.0, 20.0);
        let b = Vec2::new(280.0, -60.0); // ~200 m from a
        let mut items = Vec::new();
        for (k, _) in rxs.iter().enumerate() {
            // Deterministic per-receiver scatter below 15 m.
            let jitter = Vec2::new(((k * 7 % 5) as f64 - 2.0) * 3.0, ((k * 3 % 5) as f64 - 2.0) * 2.5);
            let d = Detection { aoa: 0.0, bistatic_range: 500.0, range_rate: 0.0, peak_power: 1.0, rx_index: k };
            items.push((k, d, a + jitter));
            items.push((k, d, b + jitter));
        }
        let clusters = cluster_positions(&items, 30.0);
        assert_eq!(clusters.len(), 2, "{clusters:?}");
        for c in &clusters {
            assert_eq!(c.members.len(), 6);
            let near_a = c.centroid.distance_to(a) < 15.0;
            let near_b = c.centroid.distance_to(b) < 15.0;
            assert!(near_a != near_b, "cluster belongs to exactly one object");
        }
        assert!(cluster_positions(&[], 30.0).is_empty());
    }

    #[test]
    fn clustering_keeps_nearest_member_per_receiver() {
        let d = |k: usize| Detection {
            aoa: 0.0,
            bistatic_range: 500.0,
            range_rate: 0.0,
            peak_power: 1.0,
            rx_index: k,
        };
        // Receiver 0 contributes twice; the closer-to-centroid sample wins
        // and the displaced one founds a singleton.
        let items = vec![
            (0, d(0), Vec2::new(0.0, 0.0)),
            (1, d(1), Vec2::new(2.0, 0.0)),
            (0, d(0), Vec2::new(1.2, 0.0)),
        ];
        let clusters = cluster_positions(&items, 10.0);
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].members.len(), 2);
        let rx0 = clusters[0].members.iter().find(|(k, _, _)| *k == 0).unwrap();
        assert_eq!(rx0.2, Vec2::new(1.2, 0.0), "nearer rx0 sample replaced the original");
        assert_eq!(clusters[1].members, vec![(0, d(0), Vec2::new(0.0, 0.0))]);
    }

    #[test]
    fn fuse_position_mean_and_quadrant_safe_aod() {
        let d = Detection { aoa: 0.0, bistatic_range: 0.0, range_rate: 0.0, peak_power: 1.0, rx_index: 0 };
        let cluster = Cluster {
            members: vec![(0, d, Vec2::new(100.0, 0.0)), (1, d, Vec2::new(102.0, 0.0))],
            centroid: Vec2::new(101.0, 0.0),
        };
        let (p, aod) = fuse_position(&cluster, Vec2::new(0.0, 0.0));
        assert_eq!(p, Vec2::new(101.0, 0.0));
        assert_eq!(aod, 0.0);
        let west = Cluster {
            members: vec![(0, d, Vec2::new(-100.0, 0.0))],
            centroid: Vec2::new(-100.0, 0.0),
        };
        let (_, aod_west) = fuse_position(&west, Vec2::new(0.0, 0.0));
        assert!((aod_west - std::f64::consts::PI).abs() < 1e-12, "behind the tx is pi, not 0");
    }

    #[test]
    fn monostatic_estimate_radial_projection() {
        let det = Detection { aoa: 0.0, bistatic_range: 200.0, range_rate: 20.0, peak_power: 1.0, rx_index: 0 };
        let track = monostatic_estimate(&det, Vec2::new(0.0, 0.0));
        assert_eq!(track.position, Vec2::new(100.0, 0.0));
        assert_eq!(track.velocity.unwrap(), Vec2::new(10.0, 0.0));
        // Tangential motion is invisible: rate 0 -> velocity 0, error |v|.
        let tangential = Detection { range_rate: 0.0, ..det };
        assert_eq!(monostatic_estimate(&tangential, Vec2::new(0.0, 0.0)).velocity.unwrap(), Vec2::new(0.0, 0.0));
    }

    #[test]
    fn bistatic_estimate_minimum_norm_velocity() {
        let tx = Vec2::new(0.0, 0.0);
        let rx = Vec2::new(260.0, 150.0);
        let pos = Vec2::new(150.0, 0.0);
        // Coefficient direction at the true position.
        let t0 = propagation_truth(tx, rx, &still(pos)).unwrap();
        let coeff = Vec2::new(t0.aoa.cos() + t0.aod.cos(), t0.aoa.sin() + t0.aod.sin());
        // Velocity along the coefficient vector is fully observable.
        let v_along = coeff * 3.0;
        let obj = SensingObject { position: pos, velocity: v_along, rcs: 1.0 };
        let track = bistatic_estimate(&exact_detection(tx, rx, &obj, 0), rx, tx).unwrap();
        assert!(track.position.distance_to(pos) < 1e-9);
        assert!((track.velocity.unwrap() - v_along).norm() < 1e-9, "{:?}", track.velocity);
        // Velocity orthogonal to it is annihilated.
        let v_perp = Vec2::new(-coeff.y, coeff.x) * 4.0;
        let obj_perp = SensingObject { position: pos, velocity: v_perp, rcs: 1.0 };
        let track_perp = bistatic_estimate(&exact_detection(tx, rx, &obj_perp, 0), rx, tx).unwrap();
        assert!(track_perp.velocity.unwrap().norm() < 1e-9);
    }

    #[test]
    fn fuse_multistatic_exact_two_receiver_scene() {
        let tx = Vec2::new(0.0, 0.0);
        let rxs = hex_rx_positions(tx, 300.0, 6);
        let obj = SensingObject {
            position: Vec2::new(170.0, 30.0),
            velocity: Vec2::new(12.0, -7.0),
            rcs: 1.0,
        };
        let dets: Vec<Detection> = [0usize, 5]
            .iter()
            .map(|&k| exact_detection(tx, rxs[k], &obj, k))
            .collect();
        let tracks = fuse_multistatic(&dets, &rxs, tx, 30.0, VelocitySolveMode::TwoRxWithAod);
        assert_eq!(tracks.len(), 1);
        let t = &tracks[0];
        assert_eq!(t.members.len(), 2);
        assert!(t.position.distance_to(obj.position) < 1e-9);
        assert!((t.velocity.unwrap() - obj.velocity).norm() < 1e-9);
        let true_aod = tx.bearing_to(obj.position);
        assert!((t.aod - true_aod).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fused_position_is_translation_equivariant(
            tx_x in -100.0f64..100.0, tx_y in -100.0f64..100.0,
            dx in -500.0f64..500.0, dy in -500.0f64..500.0,
            seed in 0u64..1000,
        ) {
            let t = Vec2::new(dx, dy);
            let tx = Vec2::new(tx_x, tx_y);
            let mut rng = stream_rng(seed, &[11]);
            let d = Detection { aoa: 0.0, bistatic_range: 1.0, range_rate: 0.0, peak_power: 1.0, rx_index: 0 };
            let items: Vec<(usize, Detection, Vec2)> = (0..5)
                .map(|k| {
                    (k, d, Vec2::new(rng.random_range(-200.0..200.0), rng.random_range(-200.0..200.0)))
                })
                .collect();
            let shifted: Vec<(usize, Detection, Vec2)> =
                items.iter().map(|(k, d, p)| (*k, *d, *p + t)).collect();
            let base = cluster_positions(&items, 50.0);
            let moved = cluster_positions(&shifted, 50.0);
            prop_assert_eq!(base.len(), moved.len());
            for (a, b) in base.iter().zip(&moved) {
                prop_assert_eq!(a.members.len(), b.members.len());
                let (pa, _) = fuse_position(a, tx);
                let (pb, _) = fuse_position(b, tx + t);
                prop_assert!((pb - pa - t).norm() < 1e-9);
            }
        }

        #[test]
        fn clustering_partition_survives_rotation(seed in 0u64..1000, angle in 0.0f64..std::f64::consts::TAU) {
            let mut rng = stream_rng(seed, &[13]);
            let d = Detection { aoa: 0.0, bistatic_range: 1.0, range_rate: 0.0, peak_power: 1.0, rx_index: 0 };
            let items: Vec<(usize, Detection, Vec2)> = (0..6)
                .map(|k| {
                    (k, d, Vec2::new(rng.random_range(-200.0..200.0), rng.random_range(-200.0..200.0)))
                })
                .collect();
            let rot = |p: Vec2| {
                Vec2::new(p.x * angle.cos() - p.y * angle.sin(), p.x * angle.sin() + p.y * angle.cos())
            };
            let rotated: Vec<(usize, Detection, Vec2)> =
                items.iter().map(|(k, d, p)| (*k, *d, rot(*p))).collect();
            let base = cluster_positions(&items, 60.0);
            let moved = cluster_positions(&rotated, 60.0);
            prop_assert_eq!(base.len(), moved.len());
            for (a, b) in base.iter().zip(&moved) {
                let mut ka: Vec<usize> = a.members.iter().map(|(k, _, _)| *k).collect();
                let mut kb: Vec<usize> = b.members.iter().map(|(k, _, _)| *k).collect();
                ka.sort_unstable();
                kb.sort_unstable();
                prop_assert_eq!(ka, kb, "same membership partition");
            }
        }
    }
}
