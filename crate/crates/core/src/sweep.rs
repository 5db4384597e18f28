//! Sweep orchestration and plateau metrics.
//!
//! A gate sweep runs the per-point pipeline gate potential -> transport
//! model -> conductance; a field map repeats it per field value with the
//! pair potential suppressed as Delta(B) and Peierls phases applied in the
//! lattice model. Plateau analysis extracts the quantities used to
//! characterize a device: plateau intervals and heights, per-plateau
//! pinch-off voltages and the off-state conductance.
//!
//! Two-interface devices default to the incoherent series composition of
//! two single-interface solves (the junctions are far longer than the
//! coherence length); the phase-coherent two-interface lattice remains
//! available behind an explicit option.

use crate::analytic::{
    beenakker_ns_conductance, compose_with_barrier, normal_conductance, saddle_transmissions,
    series_nsn, subgap_weight, thermal_broaden, TransmissionSet,
};
use crate::bdg::lattice::{build_bdg_lattice, delta_vs_field, BdgLattice, LatticeOptions};
use crate::bdg::rgf::solve_with;
use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::gates::{constriction_profile, saddle_fit, Grid2d};
use crate::material::{estimate_mode_count, Interfaces};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Transport model of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Saddle-point transmissions plus BTK/NS closed forms.
    Analytic,
    /// Tight-binding BdG scattering solve.
    Bdg,
    /// Incoherent series of two analytic single-interface junctions.
    Series,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Model::Analytic => write!(f, "analytic"),
            Model::Bdg => write!(f, "bdg"),
            Model::Series => write!(f, "series"),
        }
    }
}

/// Inclusive sweep range with a fixed step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepRange {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) {
            return Err(Error::domain("step", format!("step must be > 0, got {}", self.step)));
        }
        let span = self.stop - self.start;
        let n = (span.abs() / self.step).round() as usize + 1;
        let dir = if span >= 0.0 { 1.0 } else { -1.0 };
        Ok((0..n).map(|i| self.start + dir * self.step * i as f64).collect())
    }
}

/// Metadata attached to every trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub device_index: Option<usize>,
    pub delta_0: f64,
    pub z: f64,
    pub temperature: f64,
}

/// Conductance versus gate voltage at a fixed field, in G0 = 2e^2/h units.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub v_g: Vec<f64>,
    pub g: Vec<f64>,
    pub b: f64,
    pub model: Model,
    pub meta: TraceMeta,
}

impl Trace {
    pub fn validate(&self) -> Result<()> {
        if self.v_g.len() != self.g.len() || self.v_g.len() < 2 {
            return Err(Error::domain("trace", "need >= 2 matching samples"));
        }
        let ascending = self.v_g[1] > self.v_g[0];
        for w in self.v_g.windows(2) {
            if (ascending && w[1] <= w[0]) || (!ascending && w[1] >= w[0]) {
                return Err(Error::domain("trace", "V_g must be strictly monotone"));
            }
        }
        Ok(())
    }
}

/// A gate trace per field value on a shared V_g grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub b: Vec<f64>,
    pub traces: Vec<Trace>,
}

/// One detected plateau: V_g interval and mean height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub v_start: f64,
    pub v_end: f64,
    pub height: f64,
}

/// Plateau metrics of one trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauReport {
    pub plateaus: Vec<Plateau>,
    #[serde(rename = "V_p1")]
    pub v_p1: Option<f64>,
    #[serde(rename = "V_p2")]
    pub v_p2: Option<f64>,
    #[serde(rename = "H1")]
    pub h1: Option<f64>,
    #[serde(rename = "H2")]
    pub h2: Option<f64>,
    #[serde(rename = "G_off")]
    pub g_off: Option<f64>,
}

/// Plateau-extraction thresholds. Defaults segment the synthetic staircase
/// suite and simulated doubled staircases cleanly; all overridable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    /// Plateau slope bound (G0 per volt).
    pub slope_eps: f64,
    /// Minimum plateau width (V).
    pub min_width_v: f64,
    /// Off-state threshold (G0).
    pub pinch_threshold: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { slope_eps: 0.5, min_width_v: 0.03, pinch_threshold: 0.05 }
    }
}

/// Analytic single-interface conductance at one gate point.
fn analytic_ns_point(config: &SimulationConfig, v_g: f64, delta_eff: f64) -> Result<f64> {
    let derived = config.derived()?;
    let e_f = derived.e_f;
    let fit = saddle_fit(&config.device, v_g, config.m_eff)?;
    let transmissions = match fit {
        Some(s) => {
            // enough modes that the highest is fully closed
            let open = ((e_f - s.v0).max(0.0) / s.hbar_omega_y).ceil() as usize;
            let n_modes = (open + 8).min(512);
            saddle_transmissions(e_f, s.v0, s.hbar_omega_x, s.hbar_omega_y, n_modes)?
        }
        None => {
            // no barrier: the constriction mouth is fully open
            let n = estimate_mode_count(config.device.w_c_nm, derived.lambda_f)?.max(1);
            TransmissionSet::new(vec![1.0; n as usize])?
        }
    };
    let t_with_barrier: Vec<f64> =
        transmissions.t_n.iter().map(|&t| compose_with_barrier(t, config.device.z)).collect();
    let t_set = TransmissionSet::new(t_with_barrier)?;
    if delta_eff > 0.0 {
        let w = subgap_weight(delta_eff, config.temperature);
        Ok(w * beenakker_ns_conductance(&t_set) + (1.0 - w) * normal_conductance(&t_set))
    } else {
        Ok(normal_conductance(&t_set))
    }
}

/// Builds the BdG lattice of a single-interface (or coherent two-interface)
/// device at one gate point.
pub fn build_device_lattice(
    config: &SimulationConfig,
    v_g: f64,
    b: f64,
    interfaces: Interfaces,
) -> Result<BdgLattice> {
    let derived = config.derived()?;
    let a = config.lattice_a;
    let n_y = (config.strip_width_nm / a).round().max(4.0) as usize;
    let span = config.device.l_c_nm + 2.0 * config.pad_nm;
    let n_x = (span / a).round().max(8.0) as usize;
    let grid = Grid2d::centered(n_x, n_y, a);
    let mut field = constriction_profile(&config.device, v_g, &grid)?;
    // Taper the potential to zero over the outer columns so the attached
    // leads see an unperturbed strip.
    let x_lo = grid.xs[0];
    let x_hi = grid.xs[n_x - 1];
    for (ix, &x) in grid.xs.iter().enumerate() {
        let d_edge = (x - x_lo).min(x_hi - x).max(0.0);
        if d_edge < config.taper_nm {
            let w = (std::f64::consts::FRAC_PI_2 * d_edge / config.taper_nm).sin().powi(2);
            for iy in 0..n_y {
                field.energy_mev[ix * n_y + iy] *= w;
            }
        }
    }
    let delta_eff = delta_vs_field(b, config.delta_0, config.b_c) * config.delta_scale;
    let mut geometry = config.device.clone();
    geometry.interfaces = interfaces;
    let opts = LatticeOptions {
        m_eff: config.m_eff,
        e_f: derived.e_f,
        gauge_y0: config.gauge_y0,
        s_length_cap_nm: config.s_cap_nm,
        disorder: config.disorder,
    };
    build_bdg_lattice(&geometry, &field, delta_eff, b, a, &opts)
}

/// BdG conductance at one gate point (single-interface geometry).
fn bdg_ns_point(config: &SimulationConfig, v_g: f64, b: f64) -> Result<f64> {
    let lattice = build_device_lattice(config, v_g, b, Interfaces::One)?;
    let sol = solve_with(&lattice, 0.0, false)?;
    if config.thermal_smearing && config.temperature > 0.0 {
        let kt = crate::units::thermal_energy(config.temperature);
        let n = 13;
        let es: Vec<f64> =
            (0..n).map(|i| -10.5 * kt + 21.0 * kt * i as f64 / (n - 1) as f64).collect();
        let mut gs = Vec::with_capacity(n);
        for &e in &es {
            gs.push(solve_with(&lattice, e, false)?.ns_conductance());
        }
        thermal_broaden(&es, &gs, config.temperature)
    } else {
        Ok(sol.ns_conductance())
    }
}

/// Conductance of the configured device at one (V_g, B) point.
pub fn conductance_point(config: &SimulationConfig, model: Model, v_g: f64, b: f64) -> Result<f64> {
    let delta_eff = delta_vs_field(b, config.delta_0, config.b_c) * config.delta_scale;
    match model {
        Model::Analytic => {
            let g_ns = analytic_ns_point(config, v_g, delta_eff)?;
            match config.device.interfaces {
                Interfaces::One => Ok(g_ns),
                Interfaces::Two => Ok(series_nsn(g_ns, g_ns)),
            }
        }
        Model::Series => {
            let g_ns = analytic_ns_point(config, v_g, delta_eff)?;
            Ok(series_nsn(g_ns, g_ns))
        }
        Model::Bdg => match (config.device.interfaces, config.coherent_two_interface) {
            (Interfaces::One, _) => bdg_ns_point(config, v_g, b),
            (Interfaces::Two, false) => {
                let g_ns = bdg_ns_point(config, v_g, b)?;
                Ok(series_nsn(g_ns, g_ns))
            }
            (Interfaces::Two, true) => {
                let lattice = build_device_lattice(config, v_g, b, Interfaces::Two)?;
                Ok(solve_with(&lattice, 0.0, false)?.ns_conductance())
            }
        },
    }
}

/// Runs a gate sweep at fixed field.
pub fn gate_sweep(
    config: &SimulationConfig,
    model: Model,
    b: f64,
    range: &SweepRange,
) -> Result<Trace> {
    config.validate()?;
    let v_values = range.values()?;
    if v_values.len() < 2 {
        return Err(Error::domain("sweep", "need at least two gate points"));
    }
    let g: Result<Vec<f64>> = v_values
        .par_iter()
        .map(|&v| {
            conductance_point(config, model, v, b).map_err(|e| match e {
                Error::Domain { field, message } => Error::Domain {
                    field,
                    message: format!("{message} (at V_g = {v} V)"),
                },
                other => Error::Config(format!("{other} (at V_g = {v} V)")),
            })
        })
        .collect();
    Ok(Trace {
        v_g: v_values,
        g: g?,
        b,
        model,
        meta: TraceMeta {
            device_index: config.device_index,
            delta_0: config.delta_0,
            z: config.device.z,
            temperature: config.temperature,
        },
    })
}

/// Runs a gate sweep per field value; every trace shares the V_g grid.
pub fn field_gate_map(
    config: &SimulationConfig,
    model: Model,
    b_range: &SweepRange,
    v_range: &SweepRange,
) -> Result<FieldMap> {
    let b_values = b_range.values()?;
    let traces: Result<Vec<Trace>> =
        b_values.iter().map(|&b| gate_sweep(config, model, b, v_range)).collect();
    Ok(FieldMap { b: b_values, traces: traces? })
}

/// Detects maximal flat intervals: |dG/dV| below `slope_eps` (on a
/// boxcar-smoothed trace) over at least `min_width` volts. Heights average
/// the raw conductance.
pub fn detect_plateaus(trace: &Trace, slope_eps: f64, min_width: f64) -> Result<Vec<Plateau>> {
    trace.validate()?;
    let n = trace.v_g.len();
    let mean_step =
        (trace.v_g[n - 1] - trace.v_g[0]).abs() / (n as f64 - 1.0);
    let half = ((min_width / mean_step / 2.0).floor() as usize).min(n / 4);
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            trace.g[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let mut flat = vec![false; n];
    for i in 0..n {
        let (lo, hi) = if i == 0 { (0, 1) } else if i == n - 1 { (n - 2, n - 1) } else { (i - 1, i + 1) };
        let slope = (smooth[hi] - smooth[lo]) / (trace.v_g[hi] - trace.v_g[lo]);
        flat[i] = slope.abs() < slope_eps;
    }
    let mut plateaus = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..=n {
        let on = i < n && flat[i];
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                let e = i - 1;
                let width = (trace.v_g[e] - trace.v_g[s]).abs();
                if width >= min_width && e > s {
                    let height = trace.g[s..=e].iter().sum::<f64>() / (e - s + 1) as f64;
                    let (v_start, v_end) = if trace.v_g[s] < trace.v_g[e] {
                        (trace.v_g[s], trace.v_g[e])
                    } else {
                        (trace.v_g[e], trace.v_g[s])
                    };
                    plateaus.push(Plateau { v_start, v_end, height });
                }
                start = None;
            }
            _ => {}
        }
    }
    plateaus.sort_by(|a, b| a.v_start.partial_cmp(&b.v_start).unwrap());
    Ok(plateaus)
}

/// Gate voltage where G first crosses `threshold` moving from the open
/// (less negative) side toward the off state, linearly interpolated.
pub fn pinch_off(trace: &Trace, threshold: f64) -> Result<f64> {
    trace.validate()?;
    let n = trace.v_g.len();
    // scan from the largest V_g downward
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| trace.v_g[b].partial_cmp(&trace.v_g[a]).unwrap());
    let mut above = false;
    for w in order.windows(2) {
        let (i, j) = (w[0], w[1]);
        if trace.g[i] >= threshold {
            above = true;
        }
        if above && trace.g[i] >= threshold && trace.g[j] < threshold {
            let frac = (trace.g[i] - threshold) / (trace.g[i] - trace.g[j]);
            return Ok(trace.v_g[i] + frac * (trace.v_g[j] - trace.v_g[i]));
        }
    }
    Err(Error::NotFound(format!("trace never crosses G = {threshold} from above")))
}

/// Mean conductance over a gate-voltage window.
pub fn off_conductance(trace: &Trace, window: (f64, f64)) -> Result<f64> {
    trace.validate()?;
    let (lo, hi) = (window.0.min(window.1), window.0.max(window.1));
    let mut sum = 0.0;
    let mut count = 0usize;
    for (v, g) in trace.v_g.iter().zip(&trace.g) {
        if *v >= lo && *v <= hi {
            sum += g;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::domain("window", format!("no samples inside [{lo}, {hi}]")));
    }
    Ok(sum / count as f64)
}

/// Full plateau metrics of a trace: detected plateaus, the heights H1/H2 of
/// the first two non-off plateaus ordered upward from pinch-off, their
/// pinch-off voltages (crossings half a step below each height) and the
/// off-state conductance.
pub fn plateau_report(trace: &Trace, opts: &AnalysisOptions) -> Result<PlateauReport> {
    let plateaus = detect_plateaus(trace, opts.slope_eps, opts.min_width_v)?;
    let off_height = plateaus
        .iter()
        .filter(|p| p.height < opts.pinch_threshold)
        .map(|p| p.height)
        .fold(None, |acc: Option<f64>, h| Some(acc.map_or(h, |a| a.min(h))));
    let g_off = off_height.or_else(|| {
        // fall back to averaging the fully pinched-off region if present
        let below: Vec<f64> = trace
            .g
            .iter()
            .copied()
            .filter(|&g| g < opts.pinch_threshold)
            .collect();
        if below.is_empty() {
            None
        } else {
            Some(below.iter().sum::<f64>() / below.len() as f64)
        }
    });

    let mut non_off: Vec<&Plateau> =
        plateaus.iter().filter(|p| p.height >= opts.pinch_threshold).collect();
    non_off.sort_by(|a, b| a.height.partial_cmp(&b.height).unwrap());

    let h1 = non_off.first().map(|p| p.height);
    let h2 = non_off.get(1).map(|p| p.height);
    let base = g_off.unwrap_or(0.0);
    let v_p1 = match h1 {
        Some(h) => pinch_off(trace, h - 0.5 * (h - base)).ok(),
        None => None,
    };
    let v_p2 = match (h1, h2) {
        (Some(a), Some(b)) => pinch_off(trace, b - 0.5 * (b - a)).ok(),
        _ => None,
    };
    Ok(PlateauReport { plateaus, v_p1, v_p2, h1, h2, g_off })
}
