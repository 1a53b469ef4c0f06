//! Result emission: fixed-schema CSV tables and pretty JSON traces.
//!
//! Column names and order are part of the external contract; downstream
//! plotting reads these files by header. All numbers are formatted with
//! fixed rules so identical results serialize to identical bytes.

use std::path::Path;

use crate::error::{Result, SensingError};
use crate::harness::experiments::{RmseRecord, SingleShotTrace};
use crate::linkbudget::Heatmap;

pub const RMSE_CSV_HEADER: &str =
    "mode,sweep,position_rmse_m,velocity_rmse_mps,detection_rate,trials";
pub const SNR_MAP_CSV_HEADER: &str = "x_m,y_m,snr_db";

/// Integer-valued floats print without a decimal point; everything else
/// keeps full shortest-roundtrip precision.
fn fmt_number(v: f64) -> String {
    if v.is_finite() && v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// RMSE sweep rows, one line per (sweep point, mode), in run order.
pub fn rmse_csv(records: &[RmseRecord]) -> String {
    let mut out = String::from(RMSE_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.4},{}\n",
            r.mode.as_str(),
            fmt_number(r.sweep),
            r.position_rmse_m,
            r.velocity_rmse_mps,
            r.detection_rate,
            r.trials
        ));
    }
    out
}

/// Long-format heatmap: one `x,y,value` line per finite lattice cell.
pub fn snr_map_csv(map: &Heatmap) -> String {
    let mut out = String::from(SNR_MAP_CSV_HEADER);
    out.push('\n');
    let (rows, cols) = map.values.dim();
    for r in 0..rows {
        for c in 0..cols {
            let v = map.values[(r, c)];
            if !v.is_finite() {
                continue;
            }
            let p = map.coord(r, c);
            out.push_str(&format!("{:.3},{:.3},{v:.6}\n", p.x, p.y));
        }
    }
    out
}

/// Pretty-printed trace with a trailing newline.
pub fn trace_json(trace: &SingleShotTrace) -> Result<String> {
    let mut text = serde_json::to_string_pretty(trace)
        .map_err(|e| SensingError::Io(format!("trace serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| SensingError::Io(format!("creating {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, text)
        .map_err(|e| SensingError::Io(format!("writing {}: {e}", path.display())))
}
