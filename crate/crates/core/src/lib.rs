//! Simulation of multistatic OFDM radar sensing in a cellular layout.
//!
//! The pipeline mirrors a sensing frame end to end:
//!
//! ```text
//! scene geometry ──► channel synthesis ──► per-receiver estimation ──► fusion
//!      │                                        (AoA sweep, 2-D            │
//!      └──► link budget / scheduling             range-Doppler map)        ▼
//!                                                                   position + velocity
//! ```
//!
//! * [`scene`] — station layout, array response, per-path propagation truth.
//! * [`channel`] — transmit symbols, path gains, received symbol grids.
//! * [`estimator`] — AoA spectrum, range-Doppler maps, peak detection.
//! * [`fusion`] — ellipse inversion, clustering, position/velocity solves.
//! * [`linkbudget`] — SNR evaluation, receiver scheduling, coverage heatmaps.
//! * [`harness`] — seeded Monte Carlo experiments and file outputs.
//!
//! All randomness flows through [`rng::stream_rng`], so every experiment is
//! reproducible from a single seed.

// Validation code uses `!(x > 0.0)` deliberately: unlike `x <= 0.0`, it
// also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod estimator;
pub mod fusion;
pub mod harness;
pub mod linkbudget;
pub mod rng;
pub mod scene;

pub use error::{Result, SensingError};
