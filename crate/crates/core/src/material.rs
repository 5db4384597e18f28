//! Material parameters, wafer stack, device geometry and derived 2DEG
//! quantities shared by every solver.
//!
//! The built-in defaults describe an InGaAs/InAlAs heterostructure with a
//! 30 nm In0.75Ga0.25As quantum well roughly 120 nm below the surface, and
//! the eight split-gate junction geometries etched on a single chip
//! (selectable by index 1-8).

use crate::error::{require_positive, Error, Result};
use crate::units;
use serde::{Deserialize, Serialize};

/// Band-structure parameters of one layer material.
///
/// `cb_offset` is the conduction-band edge relative to the
/// In0.75Ga0.25As well material, in meV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub name: String,
    /// Effective mass in units of the free-electron mass.
    pub m_eff: f64,
    /// Conduction-band offset relative to the well material (meV).
    pub cb_offset: f64,
    /// Relative permittivity.
    pub eps_r: f64,
}

impl MaterialParams {
    pub fn new(name: &str, m_eff: f64, cb_offset: f64, eps_r: f64) -> Result<Self> {
        require_positive("m_eff", m_eff)?;
        if eps_r < 1.0 {
            return Err(Error::domain("eps_r", format!("eps_r must be >= 1, got {eps_r}")));
        }
        Ok(MaterialParams { name: name.to_string(), m_eff, cb_offset, eps_r })
    }
}

/// One epitaxial layer: material, thickness and donor doping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub material: MaterialParams,
    pub thickness_nm: f64,
    /// Fully-ionized donor volume density in nm^-3 (0 for undoped layers).
    pub doping_per_nm3: f64,
    /// Compositionally graded layers: the band offset runs linearly from
    /// `material.cb_offset` at the top of the layer to this value at the
    /// bottom.
    #[serde(default)]
    pub grade_to_offset: Option<f64>,
}

/// Layered heterostructure, ordered surface-first (index 0 touches vacuum,
/// the last layer sits toward the substrate). This ordering is the config
/// file convention as well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaferStack {
    pub layers: Vec<Layer>,
    /// Conduction-band edge at the exposed surface relative to the Fermi
    /// level (meV); models Schottky pinning of the cap.
    pub surface_pinning_mev: f64,
}

impl WaferStack {
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Config("wafer stack has no layers".into()));
        }
        for layer in &self.layers {
            require_positive("thickness_nm", layer.thickness_nm)?;
            require_positive("m_eff", layer.material.m_eff)?;
            if layer.material.eps_r < 1.0 {
                return Err(Error::domain("eps_r", "relative permittivity below 1"));
            }
            if layer.doping_per_nm3 < 0.0 {
                return Err(Error::domain("doping_per_nm3", "doping must be >= 0"));
            }
        }
        Ok(())
    }

    /// Total thickness of the stack (nm).
    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness_nm).sum()
    }

    /// Depth interval [start, stop) of layer `idx`, measured from the surface.
    pub fn layer_span(&self, idx: usize) -> (f64, f64) {
        let start: f64 = self.layers[..idx].iter().map(|l| l.thickness_nm).sum();
        (start, start + self.layers[idx].thickness_nm)
    }

    /// Layer index at depth x (nm below the surface).
    pub fn layer_at(&self, x: f64) -> &Layer {
        let mut acc = 0.0;
        for layer in &self.layers {
            acc += layer.thickness_nm;
            if x < acc {
                return layer;
            }
        }
        self.layers.last().expect("non-empty stack")
    }
}

/// Number of superconducting interfaces of a device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interfaces {
    One,
    Two,
}

/// Junction and constriction dimensions of one split-gate device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceGeometry {
    /// Constriction (gate) length along transport (nm).
    pub l_c_nm: f64,
    /// Constriction width = split-gate gap (nm).
    pub w_c_nm: f64,
    /// Junction length between the contacts (um).
    pub l_j_um: f64,
    /// Junction width (um).
    pub w_j_um: f64,
    /// Depth of the 2DEG below the gate plane (nm).
    pub depth_nm: f64,
    pub interfaces: Interfaces,
    /// Dimensionless interface barrier strength.
    pub z: f64,
}

impl DeviceGeometry {
    pub fn validate(&self) -> Result<()> {
        require_positive("L_c", self.l_c_nm)?;
        require_positive("W_c", self.w_c_nm)?;
        require_positive("L_J", self.l_j_um)?;
        require_positive("W_J", self.w_j_um)?;
        require_positive("depth_d", self.depth_nm)?;
        if self.z < 0.0 {
            return Err(Error::domain("Z", format!("Z must be >= 0, got {}", self.z)));
        }
        Ok(())
    }

    /// One of the eight chip devices (index 1-8). All share L_c = 400 nm and
    /// W_J = 5 um; the gap narrows from 400 nm down to 100 nm and device 8
    /// has the longer 3.2 um junction.
    pub fn table_device(index: usize) -> Result<DeviceGeometry> {
        const W_C: [f64; 8] = [400.0, 300.0, 200.0, 100.0, 100.0, 100.0, 100.0, 100.0];
        if !(1..=8).contains(&index) {
            return Err(Error::Config(format!("device index must be 1-8, got {index}")));
        }
        Ok(DeviceGeometry {
            l_c_nm: 400.0,
            w_c_nm: W_C[index - 1],
            l_j_um: if index == 8 { 3.2 } else { 1.4 },
            w_j_um: 5.0,
            depth_nm: 120.0,
            interfaces: Interfaces::Two,
            z: 0.0,
        })
    }
}

/// 2DEG quantities derived from the sheet density and effective mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derived2deg {
    /// Sheet density (m^-2).
    pub n_s: f64,
    /// Mobility (cm^2 V^-1 s^-1); provenance only, unused by the ballistic
    /// solvers.
    pub mu_e: Option<f64>,
    /// Fermi wavevector (m^-1).
    pub k_f: f64,
    /// Fermi wavelength (nm).
    pub lambda_f: f64,
    /// Fermi velocity (m/s).
    pub v_f: f64,
    /// Fermi energy above the subband bottom (meV).
    pub e_f: f64,
    /// Superconducting coherence length hbar v_F / (2 pi Delta_0) (nm).
    pub xi_0: f64,
}

/// Derives Fermi-surface quantities of a spin-degenerate 2DEG.
///
/// `n_s` in m^-2, `m_eff` in units of m_e, `delta_0` in meV.
pub fn derive_2deg_parameters(n_s: f64, m_eff: f64, delta_0: f64) -> Result<Derived2deg> {
    require_positive("n_s", n_s)?;
    require_positive("m_eff", m_eff)?;
    require_positive("delta_0", delta_0)?;

    let k_f = (2.0 * std::f64::consts::PI * n_s).sqrt(); // m^-1
    let k_f_nm = k_f * 1e-9; // nm^-1
    let lambda_f = 2.0 * std::f64::consts::PI / k_f_nm; // nm
    let e_f = units::HBAR2_OVER_2ME / m_eff * k_f_nm * k_f_nm; // meV
    let v_f = units::HBAR_OVER_ME / m_eff * k_f; // m/s
    // hbar v_F in meV nm, then the clean-limit coherence length.
    let hbar_v_f = 2.0 * units::HBAR2_OVER_2ME / m_eff * k_f_nm;
    let xi_0 = hbar_v_f / (2.0 * std::f64::consts::PI * delta_0);

    Ok(Derived2deg { n_s, mu_e: None, k_f, lambda_f, v_f, e_f, xi_0 })
}

/// Rough subband count of a constriction of the given width: floor(2 w / lambda_F).
pub fn estimate_mode_count(width_nm: f64, lambda_f_nm: f64) -> Result<u32> {
    require_positive("width", width_nm)?;
    require_positive("lambda_F", lambda_f_nm)?;
    Ok((2.0 * width_nm / lambda_f_nm).floor() as u32)
}

/// The MBE-grown wafer used by the chip, surface-first. Donor density of the
/// Si-doped layer is a calibration parameter: it is tuned once so that the
/// self-consistent solver reproduces the measured sheet density (see the
/// band module tests), not a growth-sheet value.
pub fn default_wafer() -> WaferStack {
    let ingaas = MaterialParams {
        name: "In0.75Ga0.25As".into(),
        m_eff: 0.037,
        cb_offset: 0.0,
        eps_r: 14.1,
    };
    let inalas = MaterialParams {
        name: "In0.75Al0.25As".into(),
        m_eff: 0.075,
        cb_offset: 520.0,
        eps_r: 13.2,
    };
    let inalas_graded = MaterialParams {
        name: "InAlAs graded buffer".into(),
        m_eff: 0.075,
        cb_offset: 560.0,
        eps_r: 13.0,
    };
    let layer = |material: &MaterialParams, thickness_nm: f64, doping: f64| Layer {
        material: material.clone(),
        thickness_nm,
        doping_per_nm3: doping,
        grade_to_offset: None,
    };
    let mut graded = layer(&inalas_graded, 1300.0, 0.0);
    graded.material.cb_offset = 520.0;
    graded.grade_to_offset = Some(700.0);
    WaferStack {
        layers: vec![
            layer(&ingaas, 2.0, 0.0),                    // cap
            layer(&inalas, 45.0, 0.0),                   // spacer
            layer(&inalas, 15.0, DEFAULT_DONOR_DENSITY), // Si-doped supply
            layer(&inalas, 60.0, 0.0),                   // spacer
            layer(&ingaas, 30.0, 0.0),                   // quantum well (2DEG)
            layer(&inalas, 250.0, 0.0),                  // buffer
            graded,                                      // graded buffer
        ],
        surface_pinning_mev: 200.0,
    }
}

/// Calibrated donor volume density of the 15 nm supply layer (nm^-3);
/// reproduces a converged sheet density near 2.1e11 cm^-2.
pub const DEFAULT_DONOR_DENSITY: f64 = 5.35e-4;

/// Default sheet density measured in the dark, 2.24e11 cm^-2, in m^-2.
pub const DEFAULT_SHEET_DENSITY: f64 = 2.24e15;

/// Default effective mass of the In0.75Ga0.25As well.
pub const DEFAULT_M_EFF: f64 = 0.037;

/// Default mobility (cm^2/Vs), stored for provenance.
pub const DEFAULT_MOBILITY: f64 = 2.5e5;

/// Default Nb gap scale (meV) and effective critical field (T).
pub const DEFAULT_DELTA0: f64 = 1.4;
pub const DEFAULT_BC: f64 = 1.7;

/// Base temperature of the cryostat (K).
pub const DEFAULT_TEMPERATURE: f64 = 0.28;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities_match_direct_formulas() {
        let d = derive_2deg_parameters(DEFAULT_SHEET_DENSITY, 0.037, 1.4).unwrap();
        assert!((d.lambda_f - 53.0).abs() < 0.1, "lambda_F {}", d.lambda_f);
        assert!((d.e_f - 14.5).abs() < 0.1, "E_F {}", d.e_f);
        assert!((d.v_f - 3.71e5).abs() / 3.71e5 < 5e-3, "v_F {}", d.v_f);
        assert!((d.xi_0 - 27.8).abs() < 0.1, "xi_0 {}", d.xi_0);
    }

    #[test]
    fn identities_hold_to_machine_precision() {
        let d = derive_2deg_parameters(3.3e15, 0.05, 0.9).unwrap();
        let pi2 = 2.0 * std::f64::consts::PI;
        assert!((d.k_f - (pi2 * d.n_s).sqrt()).abs() / d.k_f < 1e-12);
        assert!((d.lambda_f - pi2 / (d.k_f * 1e-9)).abs() / d.lambda_f < 1e-12);
        let e_f = units::HBAR2_OVER_2ME / 0.05 * (d.k_f * 1e-9).powi(2);
        assert!((d.e_f - e_f).abs() / e_f < 1e-12);
        let xi = 2.0 * units::HBAR2_OVER_2ME / 0.05 * (d.k_f * 1e-9) / (pi2 * 0.9);
        assert!((d.xi_0 - xi).abs() / xi < 1e-12);
    }

    #[test]
    fn sheet_density_round_trips_through_k_f() {
        let d = derive_2deg_parameters(2.24e15, 0.037, 1.4).unwrap();
        let n_back = d.k_f * d.k_f / (2.0 * std::f64::consts::PI);
        assert!((n_back - 2.24e15).abs() / 2.24e15 < 1e-12);
    }

    #[test]
    fn mode_count_examples() {
        assert_eq!(estimate_mode_count(100.0, 53.0).unwrap(), 3);
        assert_eq!(estimate_mode_count(400.0, 53.0).unwrap(), 15);
        // width = lambda_F / 2 sits exactly at one mode
        assert_eq!(estimate_mode_count(26.5, 53.0).unwrap(), 1);
    }

    #[test]
    fn invalid_inputs_name_the_field() {
        let err = derive_2deg_parameters(-1.0, 0.037, 1.4).unwrap_err();
        assert!(err.to_string().contains("n_s"), "{err}");
        let err = derive_2deg_parameters(1e15, 0.0, 1.4).unwrap_err();
        assert!(err.to_string().contains("m_eff"), "{err}");
        let err = estimate_mode_count(0.0, 53.0).unwrap_err();
        assert!(err.to_string().contains("width"), "{err}");
    }

    #[test]
    fn table_devices() {
        let d5 = DeviceGeometry::table_device(5).unwrap();
        assert_eq!(d5.l_c_nm, 400.0);
        assert_eq!(d5.w_c_nm, 100.0);
        assert_eq!(d5.l_j_um, 1.4);
        assert_eq!(d5.w_j_um, 5.0);
        let d8 = DeviceGeometry::table_device(8).unwrap();
        assert_eq!(d8.l_j_um, 3.2);
        assert!(DeviceGeometry::table_device(0).is_err());
        assert!(DeviceGeometry::table_device(9).is_err());
    }

    #[test]
    fn wafer_depth_to_well_is_near_120nm() {
        let wafer = default_wafer();
        let (well_top, _) = wafer.layer_span(4);
        assert!((well_top - 122.0).abs() < 1e-9, "well top at {well_top}");
    }
}
