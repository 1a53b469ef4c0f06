//! Python bindings for the multistatic OFDM sensing simulator.
//!
//! The surface mirrors the CLI: experiment configs travel as JSON strings
//! (see `default_config` for a template), results come back as plain
//! Python dicts/lists or as the exact CSV/JSON artifact text.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde_json::Value;

use isacsim_core::harness::{self, ExperimentConfig};
use isacsim_core::linkbudget::{self, SensingMode};
use isacsim_core::scene::{self, SensingObject, Vec2};
use isacsim_core::SensingError;

fn to_py_err(e: SensingError) -> PyErr {
    match e {
        SensingError::Config(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_config(text: &str) -> PyResult<ExperimentConfig> {
    ExperimentConfig::from_json_str(text).map_err(to_py_err)
}

fn parse_mode(mode: &str) -> PyResult<SensingMode> {
    match mode {
        "monostatic" => Ok(SensingMode::Monostatic),
        "bistatic" => Ok(SensingMode::Bistatic),
        "multistatic" => Ok(SensingMode::Multistatic),
        other => Err(PyValueError::new_err(format!(
            "unknown mode {other:?}; expected monostatic, bistatic or multistatic"
        ))),
    }
}

fn json_to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    match v {
        Value::Null => Ok(py.None()),
        Value::Bool(b) => b.into_py_any(py),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py_any(py)
            } else if let Some(u) = n.as_u64() {
                u.into_py_any(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_py_any(py)
            }
        }
        Value::String(s) => s.into_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_py_any(py)
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (key, val) in map {
                dict.set_item(key, json_to_py(py, val)?)?;
            }
            dict.into_py_any(py)
        }
    }
}

fn serialize_to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let json = serde_json::to_value(value)
        .map_err(|e| PyRuntimeError::new_err(format!("serialization failed: {e}")))?;
    json_to_py(py, &json)
}

/// The built-in desk-scale experiment configuration as a JSON string.
#[pyfunction]
fn default_config() -> PyResult<String> {
    serde_json::to_string_pretty(&ExperimentConfig::default())
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Parses and validates a config document, raising ValueError on the first
/// problem.
#[pyfunction]
fn validate_config(config_json: &str) -> PyResult<()> {
    parse_config(config_json).map(|_| ())
}

/// Exact path geometry for one (tx, rx, object) triple: distances,
/// bistatic range, range rate, AoA and AoD.
#[pyfunction]
fn propagation_truth(
    py: Python<'_>,
    tx: (f64, f64),
    rx: (f64, f64),
    position: (f64, f64),
    velocity: (f64, f64),
) -> PyResult<Py<PyAny>> {
    let obj = SensingObject { position: position.into(), velocity: velocity.into(), rcs: 1.0 };
    let truth =
        scene::propagation_truth(tx.into(), rx.into(), &obj).map_err(to_py_err)?;
    serialize_to_py(py, &truth)
}

/// Receiver-leg distance of the ellipse point at bearing `aoa` with
/// bistatic range `d_hat`.
#[pyfunction]
fn ellipse_range(d_hat: f64, aoa: f64, rx: (f64, f64), tx: (f64, f64)) -> PyResult<f64> {
    isacsim_core::fusion::ellipse_range(d_hat, aoa, rx.into(), tx.into()).map_err(to_py_err)
}

/// Mode-dependent SNR (dB) at one object position in the configured scene.
#[pyfunction]
#[pyo3(signature = (config_json, mode, x, y, rcs = 1.0))]
fn snr_db(config_json: &str, mode: &str, x: f64, y: f64, rcs: f64) -> PyResult<f64> {
    let config = parse_config(config_json)?;
    let scene = config.base_scene();
    linkbudget::snr_db(
        &scene,
        &config.link,
        &config.ofdm,
        parse_mode(mode)?,
        Vec2::new(x, y),
        rcs,
    )
    .map_err(to_py_err)
}

/// The receiver pair scheduled for a target azimuth (radians).
#[pyfunction]
fn schedule_receivers(config_json: &str, target_azimuth: f64) -> PyResult<(usize, usize)> {
    let config = parse_config(config_json)?;
    Ok(linkbudget::schedule_receivers(&config.base_scene(), target_azimuth))
}

/// Converts a range-Doppler lattice index (centered Doppler row `p_hat`,
/// 1-based range column `q_hat`) to (range_rate m/s, bistatic_range m).
#[pyfunction]
fn peak_to_params(config_json: &str, p_hat: f64, q_hat: f64) -> PyResult<(f64, f64)> {
    let config = parse_config(config_json)?;
    Ok(isacsim_core::estimator::peak_to_params(p_hat, q_hat, &config.ofdm))
}

/// Monte Carlo RMSE sweep; returns a list of record dicts.
#[pyfunction]
fn run_rmse_sweep(py: Python<'_>, config_json: &str) -> PyResult<Py<PyAny>> {
    let config = parse_config(config_json)?;
    let records = harness::run_rmse_sweep(&config).map_err(to_py_err)?;
    serialize_to_py(py, &records)
}

/// Monte Carlo RMSE sweep as the CSV artifact text.
#[pyfunction]
fn rmse_csv(config_json: &str) -> PyResult<String> {
    let config = parse_config(config_json)?;
    let records = harness::run_rmse_sweep(&config).map_err(to_py_err)?;
    Ok(harness::rmse_csv(&records))
}

/// Quantization-error statistics from a noiseless single-receiver run.
#[pyfunction]
fn quantization_stats(py: Python<'_>, config_json: &str) -> PyResult<Py<PyAny>> {
    let config = parse_config(config_json)?;
    let stats = harness::run_quantization_stats(&config).map_err(to_py_err)?;
    serialize_to_py(py, &stats)
}

/// SNR heatmap over the served sub-sensing cell as CSV text
/// (x_m,y_m,snr_db).
#[pyfunction]
fn snr_map_csv(config_json: &str, mode: &str) -> PyResult<String> {
    let config = parse_config(config_json)?;
    let map = harness::run_snr_map(&config, parse_mode(mode)?).map_err(to_py_err)?;
    Ok(harness::snr_map_csv(&map))
}

/// One traced pipeline pass as a dict.
#[pyfunction]
fn run_single_shot(
    py: Python<'_>,
    config_json: &str,
    mode: &str,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let config = parse_config(config_json)?;
    let trace =
        harness::run_single_shot(&config, parse_mode(mode)?, seed).map_err(to_py_err)?;
    serialize_to_py(py, &trace)
}

/// One traced pipeline pass as the exact JSON artifact text.
#[pyfunction]
fn single_shot_json(config_json: &str, mode: &str, seed: u64) -> PyResult<String> {
    let config = parse_config(config_json)?;
    let trace =
        harness::run_single_shot(&config, parse_mode(mode)?, seed).map_err(to_py_err)?;
    harness::trace_json(&trace).map_err(to_py_err)
}

#[pymodule]
fn isacsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(validate_config, m)?)?;
    m.add_function(wrap_pyfunction!(propagation_truth, m)?)?;
    m.add_function(wrap_pyfunction!(ellipse_range, m)?)?;
    m.add_function(wrap_pyfunction!(snr_db, m)?)?;
    m.add_function(wrap_pyfunction!(schedule_receivers, m)?)?;
    m.add_function(wrap_pyfunction!(peak_to_params, m)?)?;
    m.add_function(wrap_pyfunction!(run_rmse_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(rmse_csv, m)?)?;
    m.add_function(wrap_pyfunction!(quantization_stats, m)?)?;
    m.add_function(wrap_pyfunction!(snr_map_csv, m)?)?;
    m.add_function(wrap_pyfunction!(run_single_shot, m)?)?;
    m.add_function(wrap_pyfunction!(single_shot_json, m)?)?;
    Ok(())
}
