//! Simulation configuration: the validated in-memory form and the strict
//! TOML file format (unknown keys rejected, physical invariants checked at
//! load time).

use crate::bdg::lattice::Disorder;
use crate::error::{require_positive, Error, Result};
use crate::material::{
    default_wafer, derive_2deg_parameters, DeviceGeometry, Derived2deg, Interfaces, Layer,
    MaterialParams, WaferStack, DEFAULT_BC, DEFAULT_DELTA0, DEFAULT_MOBILITY, DEFAULT_M_EFF,
    DEFAULT_SHEET_DENSITY, DEFAULT_TEMPERATURE,
};
use crate::sweep::{AnalysisOptions, Model, SweepRange};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Fully validated simulation inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub device: DeviceGeometry,
    pub device_index: Option<usize>,
    pub wafer: WaferStack,
    /// Pair potential scale of the Nb contacts (meV); 0 turns the device
    /// into a normal QPC.
    pub delta_0: f64,
    /// Effective critical field of Delta(B) (T).
    pub b_c: f64,
    /// Induced-gap reduction factor applied on top of Delta(B).
    pub delta_scale: f64,
    pub temperature: f64,
    /// BdG lattice spacing (nm).
    pub lattice_a: f64,
    pub m_eff: f64,
    /// Sheet density (m^-2).
    pub n_s: f64,
    pub mobility: Option<f64>,
    pub gate_range: SweepRange,
    pub field_range: SweepRange,
    pub model: Model,
    /// Transverse width of the BdG strip (nm).
    pub strip_width_nm: f64,
    /// Normal padding between the gated region and the leads / S onset (nm).
    pub pad_nm: f64,
    /// Cosine taper length forcing the gate potential to zero at the lead
    /// columns (nm).
    pub taper_nm: f64,
    /// Cap on the superconducting termination length (nm).
    pub s_cap_nm: f64,
    pub gauge_y0: f64,
    pub coherent_two_interface: bool,
    pub thermal_smearing: bool,
    pub disorder: Option<Disorder>,
    pub analysis: AnalysisOptions,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            device: DeviceGeometry::table_device(5).expect("preset 5"),
            device_index: Some(5),
            wafer: default_wafer(),
            delta_0: DEFAULT_DELTA0,
            b_c: DEFAULT_BC,
            delta_scale: 1.0,
            temperature: DEFAULT_TEMPERATURE,
            lattice_a: 5.0,
            m_eff: DEFAULT_M_EFF,
            n_s: DEFAULT_SHEET_DENSITY,
            mobility: Some(DEFAULT_MOBILITY),
            gate_range: SweepRange { start: 0.0, stop: -1.0, step: 0.0025 },
            field_range: SweepRange { start: 0.0, stop: 0.0, step: 0.1 },
            model: Model::Analytic,
            strip_width_nm: 200.0,
            pad_nm: 100.0,
            taper_nm: 80.0,
            s_cap_nm: 750.0,
            gauge_y0: 0.0,
            coherent_two_interface: false,
            thermal_smearing: false,
            disorder: None,
            analysis: AnalysisOptions::default(),
        }
    }
}

impl SimulationConfig {
    /// 2DEG quantities implied by the configured sheet density and mass.
    pub fn derived(&self) -> Result<Derived2deg> {
        let mut d =
            derive_2deg_parameters(self.n_s, self.m_eff, self.delta_0.max(f64::MIN_POSITIVE))?;
        d.mu_e = self.mobility;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        self.wafer.validate()?;
        if self.delta_0 < 0.0 {
            return Err(Error::domain("delta_0", "pair potential must be >= 0"));
        }
        require_positive("B_c", self.b_c)?;
        if self.delta_scale < 0.0 {
            return Err(Error::domain("delta_scale", "scale must be >= 0"));
        }
        if self.temperature < 0.0 {
            return Err(Error::domain("temperature", "temperature must be >= 0"));
        }
        require_positive("lattice_a", self.lattice_a)?;
        require_positive("m_eff", self.m_eff)?;
        require_positive("n_s", self.n_s)?;
        require_positive("strip_width", self.strip_width_nm)?;
        require_positive("pad", self.pad_nm)?;
        if self.taper_nm < 0.0 || self.taper_nm > self.pad_nm {
            return Err(Error::domain("taper", "taper must lie within the pad length"));
        }
        let derived = self.derived()?;
        if self.lattice_a > derived.lambda_f / 8.0 {
            return Err(Error::Config(format!(
                "lattice_a = {} nm violates the resolution guard lambda_F/8 = {:.2} nm",
                self.lattice_a,
                derived.lambda_f / 8.0
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DeviceSection {
    /// Table preset 1-8; explicit fields below override individual values.
    preset: Option<usize>,
    l_c_nm: Option<f64>,
    w_c_nm: Option<f64>,
    l_j_um: Option<f64>,
    w_j_um: Option<f64>,
    depth_nm: Option<f64>,
    interfaces: Option<Interfaces>,
    z: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerSection {
    material: String,
    m_eff: f64,
    cb_offset_mev: f64,
    eps_r: f64,
    thickness_nm: f64,
    #[serde(default)]
    doping_per_nm3: f64,
    #[serde(default)]
    grade_to_offset_mev: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaferSection {
    surface_pinning_mev: f64,
    layers: Vec<LayerSection>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PhysicsSection {
    delta_0_mev: Option<f64>,
    b_c_tesla: Option<f64>,
    delta_scale: Option<f64>,
    temperature_k: Option<f64>,
    m_eff: Option<f64>,
    n_s_per_cm2: Option<f64>,
    mobility_cm2: Option<f64>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LatticeSection {
    a_nm: Option<f64>,
    strip_width_nm: Option<f64>,
    pad_nm: Option<f64>,
    taper_nm: Option<f64>,
    s_cap_nm: Option<f64>,
    gauge_y0: Option<f64>,
    coherent_two_interface: Option<bool>,
    disorder_amplitude_mev: Option<f64>,
    disorder_seed: Option<u64>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SweepSection {
    model: Option<Model>,
    v_start: Option<f64>,
    v_stop: Option<f64>,
    v_step: Option<f64>,
    b_start: Option<f64>,
    b_stop: Option<f64>,
    b_step: Option<f64>,
    thermal_smearing: Option<bool>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
}

/// On-disk configuration. Every section is optional; built-in defaults
/// describe the chip wafer and table device 5.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    device: DeviceSection,
    wafer: Option<WaferSection>,
    physics: PhysicsSection,
    lattice: LatticeSection,
    sweep: SweepSection,
    #[serde(rename = "analysis")]
    analysis: Option<AnalysisOptions>,
    pub output: OutputSection,
}

impl ConfigFile {
    pub fn into_simulation_config(self) -> Result<SimulationConfig> {
        let mut cfg = SimulationConfig::default();

        let d = &self.device;
        if let Some(preset) = d.preset {
            cfg.device = DeviceGeometry::table_device(preset)?;
            cfg.device_index = Some(preset);
        }
        if d.preset.is_none()
            && (d.l_c_nm.is_some() || d.w_c_nm.is_some() || d.l_j_um.is_some())
        {
            cfg.device_index = None;
        }
        if let Some(v) = d.l_c_nm {
            cfg.device.l_c_nm = v;
        }
        if let Some(v) = d.w_c_nm {
            cfg.device.w_c_nm = v;
        }
        if let Some(v) = d.l_j_um {
            cfg.device.l_j_um = v;
        }
        if let Some(v) = d.w_j_um {
            cfg.device.w_j_um = v;
        }
        if let Some(v) = d.depth_nm {
            cfg.device.depth_nm = v;
        }
        if let Some(v) = d.interfaces {
            cfg.device.interfaces = v;
        }
        if let Some(v) = d.z {
            cfg.device.z = v;
        }

        if let Some(w) = self.wafer {
            let layers: Result<Vec<Layer>> = w
                .layers
                .into_iter()
                .map(|l| {
                    Ok(Layer {
                        material: MaterialParams::new(
                            &l.material,
                            l.m_eff,
                            l.cb_offset_mev,
                            l.eps_r,
                        )?,
                        thickness_nm: l.thickness_nm,
                        doping_per_nm3: l.doping_per_nm3,
                        grade_to_offset: l.grade_to_offset_mev,
                    })
                })
                .collect();
            cfg.wafer = WaferStack { layers: layers?, surface_pinning_mev: w.surface_pinning_mev };
        }

        let p = &self.physics;
        if let Some(v) = p.delta_0_mev {
            cfg.delta_0 = v;
        }
        if let Some(v) = p.b_c_tesla {
            cfg.b_c = v;
        }
        if let Some(v) = p.delta_scale {
            cfg.delta_scale = v;
        }
        if let Some(v) = p.temperature_k {
            cfg.temperature = v;
        }
        if let Some(v) = p.m_eff {
            cfg.m_eff = v;
        }
        if let Some(v) = p.n_s_per_cm2 {
            cfg.n_s = v * 1e4; // cm^-2 -> m^-2
        }
        if let Some(v) = p.mobility_cm2 {
            cfg.mobility = Some(v);
        }

        let l = &self.lattice;
        if let Some(v) = l.a_nm {
            cfg.lattice_a = v;
        }
        if let Some(v) = l.strip_width_nm {
            cfg.strip_width_nm = v;
        }
        if let Some(v) = l.pad_nm {
            cfg.pad_nm = v;
        }
        if let Some(v) = l.taper_nm {
            cfg.taper_nm = v;
        }
        if let Some(v) = l.s_cap_nm {
            cfg.s_cap_nm = v;
        }
        if let Some(v) = l.gauge_y0 {
            cfg.gauge_y0 = v;
        }
        if let Some(v) = l.coherent_two_interface {
            cfg.coherent_two_interface = v;
        }
        if let Some(amp) = l.disorder_amplitude_mev {
            if amp > 0.0 {
                cfg.disorder =
                    Some(Disorder { amplitude: amp, seed: l.disorder_seed.unwrap_or(1) });
            }
        }

        let s = &self.sweep;
        if let Some(v) = s.model {
            cfg.model = v;
        }
        if let Some(v) = s.v_start {
            cfg.gate_range.start = v;
        }
        if let Some(v) = s.v_stop {
            cfg.gate_range.stop = v;
        }
        if let Some(v) = s.v_step {
            cfg.gate_range.step = v;
        }
        if let Some(v) = s.b_start {
            cfg.field_range.start = v;
        }
        if let Some(v) = s.b_stop {
            cfg.field_range.stop = v;
        }
        if let Some(v) = s.b_step {
            cfg.field_range.step = v;
        }
        if let Some(v) = s.thermal_smearing {
            cfg.thermal_smearing = v;
        }

        if let Some(a) = self.analysis {
            cfg.analysis = a;
        }

        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses and validates a config file (TOML, strict keys).
pub fn parse_config(path: &Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<SimulationConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_simulation_config()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_five_geometry() {
        let cfg = parse_config_str("[device]\npreset = 5\n").unwrap();
        assert_eq!(cfg.device.l_c_nm, 400.0);
        assert_eq!(cfg.device.w_c_nm, 100.0);
        assert_eq!(cfg.device.l_j_um, 1.4);
        assert_eq!(cfg.device.w_j_um, 5.0);
        assert_eq!(cfg.device_index, Some(5));
    }

    #[test]
    fn missing_delta0_gets_the_default() {
        let cfg = parse_config_str("[device]\npreset = 3\n").unwrap();
        assert_eq!(cfg.delta_0, 1.4);
        assert_eq!(cfg.b_c, 1.7);
        assert_eq!(cfg.temperature, 0.28);
    }

    #[test]
    fn invalid_geometry_names_the_invariant() {
        let err = parse_config_str("[device]\npreset = 5\nw_c_nm = -10.0\n").unwrap_err();
        assert!(err.to_string().contains("W_c"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = parse_config_str("[device]\npreset = 5\nbogus_knob = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus_knob"), "{msg}");
        assert!(msg.contains("line"), "location missing in: {msg}");
    }

    #[test]
    fn sweep_and_physics_overrides() {
        let cfg = parse_config_str(
            "[physics]\ndelta_0_mev = 0.0\nn_s_per_cm2 = 2.24e11\n[sweep]\nmodel = \"bdg\"\nv_start = -0.05\nv_stop = 0.0\nv_step = 0.005\n",
        )
        .unwrap();
        assert_eq!(cfg.delta_0, 0.0);
        assert_eq!(cfg.model, Model::Bdg);
        assert!((cfg.n_s - 2.24e15).abs() < 1.0);
        assert_eq!(cfg.gate_range.values().unwrap().len(), 11);
    }

    #[test]
    fn resolution_guard_is_enforced() {
        let err = parse_config_str("[lattice]\na_nm = 9.0\n").unwrap_err();
        assert!(err.to_string().contains("lambda_F"), "{err}");
    }

    #[test]
    fn explicit_wafer_round_trips() {
        let text = r#"
[wafer]
surface_pinning_mev = 150.0

[[wafer.layers]]
material = "cap"
m_eff = 0.04
cb_offset_mev = 0.0
eps_r = 14.0
thickness_nm = 10.0

[[wafer.layers]]
material = "barrier"
m_eff = 0.08
cb_offset_mev = 500.0
eps_r = 12.0
thickness_nm = 100.0
doping_per_nm3 = 1e-4
"#;
        let cfg = parse_config_str(text).unwrap();
        assert_eq!(cfg.wafer.layers.len(), 2);
        assert_eq!(cfg.wafer.surface_pinning_mev, 150.0);
        assert_eq!(cfg.wafer.layers[1].doping_per_nm3, 1e-4);
    }
}
