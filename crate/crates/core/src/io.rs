//! Result serialization: trace and map CSV, plateau-report JSON and the
//! band-profile outputs. Numeric columns print with full round-trip
//! precision, so rereading a file reproduces the values bit for bit.

use crate::band::BandProfile;
use crate::error::{Error, Result};
use crate::sweep::{FieldMap, Model, PlateauReport, Trace, TraceMeta};
use std::fmt::Write as _;
use std::path::Path;

const TRACE_HEADER: &str = "V_g[V],G[2e^2/h]";
const MAP_HEADER: &str = "B[T],V_g[V],G[2e^2/h]";

fn meta_comment(trace: &Trace) -> String {
    let device = match trace.meta.device_index {
        Some(i) => i.to_string(),
        None => "custom".to_string(),
    };
    format!(
        "# model={} B[T]={} delta0[meV]={} Z={} T[K]={} device={}",
        trace.model, trace.b, trace.meta.delta_0, trace.meta.z, trace.meta.temperature, device
    )
}

/// Renders a trace as CSV with `#` metadata comments.
pub fn trace_to_csv(trace: &Trace) -> String {
    let mut out = String::new();
    out.push_str(&meta_comment(trace));
    out.push('\n');
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for (v, g) in trace.v_g.iter().zip(&trace.g) {
        let _ = writeln!(out, "{v},{g}");
    }
    out
}

pub fn write_trace(trace: &Trace, path: &Path) -> Result<()> {
    std::fs::write(path, trace_to_csv(trace))?;
    Ok(())
}

/// Reads a trace from the CSV format written by `write_trace`. External
/// measurement data in the same column format is accepted; metadata
/// comments are optional.
pub fn read_trace(path: &Path) -> Result<Trace> {
    let text = std::fs::read_to_string(path)?;
    trace_from_csv(&text)
}

pub fn trace_from_csv(text: &str) -> Result<Trace> {
    let mut v_g = Vec::new();
    let mut g = Vec::new();
    let mut meta = TraceMeta { device_index: None, delta_0: 0.0, z: 0.0, temperature: 0.0 };
    let mut model = Model::Analytic;
    let mut b = 0.0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for token in rest.split_whitespace() {
                if let Some((key, value)) = token.split_once('=') {
                    match key {
                        "model" => {
                            model = match value {
                                "bdg" => Model::Bdg,
                                "series" => Model::Series,
                                _ => Model::Analytic,
                            }
                        }
                        "B[T]" => b = value.parse().unwrap_or(0.0),
                        "delta0[meV]" => meta.delta_0 = value.parse().unwrap_or(0.0),
                        "Z" => meta.z = value.parse().unwrap_or(0.0),
                        "T[K]" => meta.temperature = value.parse().unwrap_or(0.0),
                        "device" => meta.device_index = value.parse().ok(),
                        _ => {}
                    }
                }
            }
            continue;
        }
        if line.starts_with("V_g") {
            continue;
        }
        let mut fields = line.split(',');
        let (a, c) = (fields.next(), fields.next());
        match (a, c) {
            (Some(a), Some(c)) => {
                let v: f64 = a.trim().parse().map_err(|_| {
                    Error::Parse(format!("line {}: bad V_g value {a:?}", lineno + 1))
                })?;
                let gg: f64 = c.trim().parse().map_err(|_| {
                    Error::Parse(format!("line {}: bad G value {c:?}", lineno + 1))
                })?;
                v_g.push(v);
                g.push(gg);
            }
            _ => {
                return Err(Error::Parse(format!("line {}: expected V_g,G", lineno + 1)));
            }
        }
    }
    let trace = Trace { v_g, g, b, model, meta };
    trace.validate()?;
    Ok(trace)
}

/// Long-format field map CSV: one row per (B, V_g) point, row-major over B.
pub fn map_to_csv(map: &FieldMap) -> String {
    let mut out = String::new();
    if let Some(first) = map.traces.first() {
        out.push_str(&meta_comment(first));
        out.push('\n');
    }
    out.push_str(MAP_HEADER);
    out.push('\n');
    for trace in &map.traces {
        for (v, g) in trace.v_g.iter().zip(&trace.g) {
            let _ = writeln!(out, "{},{v},{g}", trace.b);
        }
    }
    out
}

pub fn write_map(map: &FieldMap, path: &Path) -> Result<()> {
    std::fs::write(path, map_to_csv(map))?;
    Ok(())
}

/// Plateau metrics as JSON with exactly the fields
/// {plateaus, V_p1, V_p2, H1, H2, G_off}.
pub fn report_to_json(report: &PlateauReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn write_report(report: &PlateauReport, path: &Path) -> Result<()> {
    std::fs::write(path, report_to_json(report))?;
    Ok(())
}

/// Band-profile outputs: (position, cb_edge) CSV, (position, density) CSV
/// and a JSON summary with the sheet density and subband energies.
pub fn band_edge_csv(band: &BandProfile) -> String {
    let mut out = String::from("x[nm],cb_edge[meV]\n");
    for (x, e) in band.grid.positions.iter().zip(&band.cb_edge) {
        let _ = writeln!(out, "{x},{e}");
    }
    out
}

pub fn band_density_csv(band: &BandProfile) -> String {
    let mut out = String::from("x[nm],density[m^-3]\n");
    for (x, d) in band.grid.positions.iter().zip(&band.density) {
        let _ = writeln!(out, "{x},{d}");
    }
    out
}

pub fn band_summary_json(band: &BandProfile) -> String {
    let energies: Vec<f64> = band.eigenstates.iter().map(|p| p.energy).collect();
    serde_json::json!({
        "sheet_density_per_m2": band.sheet_density,
        "sheet_density_per_cm2": band.sheet_density * 1e-4,
        "subband_energies_mev": energies,
    })
    .to_string()
}
