//! Electrostatic potential of patterned surface gates at the 2DEG plane.
//!
//! The exposed surface is treated as an equipotential (Fermi-level pinning),
//! so each rectangular gate patch contributes the standard pinned-surface
//! kernel evaluated at depth d. Summing patches gives the split-gate saddle
//! landscape with zero mesh cost; the field is exactly linear in the gate
//! voltages.

use crate::error::{require_positive, Error, Result};
use crate::material::DeviceGeometry;
use crate::units::{HBAR2_OVER_2ME, MEV_PER_EV};
use serde::{Deserialize, Serialize};

/// Which control gate drives a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateSource {
    Gate1,
    Gate2,
}

/// A rectangular gate patch in the surface plane (nm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub source: GateSource,
}

impl GateRect {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_min < self.x_max) || !(self.y_min < self.y_max) {
            return Err(Error::Config(format!(
                "degenerate gate rectangle [{}, {}] x [{}, {}]",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        Ok(())
    }

    fn overlaps(&self, other: &GateRect) -> bool {
        self.x_min < other.x_max
            && other.x_min < self.x_max
            && self.y_min < other.y_max
            && other.y_min < self.y_max
    }

    /// Fraction of this rectangle's gate voltage felt at (x, y) a depth d
    /// below the surface: the four-corner kernel sum.
    pub fn fraction_at(&self, x: f64, y: f64, depth: f64) -> Result<f64> {
        let g = |u: f64, v: f64| rect_gate_kernel(u, v, depth);
        Ok(g(self.x_max - x, self.y_max - y)?
            - g(self.x_min - x, self.y_max - y)?
            - g(self.x_max - x, self.y_min - y)?
            + g(self.x_min - x, self.y_min - y)?)
    }
}

/// Corner kernel of the pinned-surface gate model:
/// g(u, v) = (1/2 pi) arctan(u v / (d R)), R = sqrt(u^2 + v^2 + d^2).
///
/// A rectangle's potential fraction is the signed sum of four corner
/// kernels; a gate covering the whole plane sums to 1.
pub fn rect_gate_kernel(u: f64, v: f64, d: f64) -> Result<f64> {
    require_positive("d", d)?;
    let r = (u * u + v * v + d * d).sqrt();
    Ok((u * v / (d * r)).atan() / (2.0 * std::f64::consts::PI))
}

/// Regular 2D evaluation grid at the 2DEG depth (site centers, nm).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2d {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Grid2d {
    /// A grid of n_x by n_y points with spacing a, centered on the origin.
    pub fn centered(n_x: usize, n_y: usize, a: f64) -> Self {
        let axis = |n: usize| -> Vec<f64> {
            (0..n).map(|i| (i as f64 - (n as f64 - 1.0) / 2.0) * a).collect()
        };
        Grid2d { xs: axis(n_x), ys: axis(n_y) }
    }
}

/// Electron energy shift -e phi(x, y) at the 2DEG plane, in meV, sampled on
/// a grid. Linear in each gate voltage; a negative gate voltage raises the
/// electron energy.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub grid: Grid2d,
    /// Row-major over x: index = ix * n_y + iy.
    pub energy_mev: Vec<f64>,
}

impl PotentialField {
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.energy_mev[ix * self.grid.ys.len() + iy]
    }
}

/// Evaluates the energy shift of a gate layout at a single point (meV).
pub fn energy_shift_at(
    layout: &[GateRect],
    v_g1: f64,
    v_g2: f64,
    depth: f64,
    x: f64,
    y: f64,
) -> Result<f64> {
    let mut phi = 0.0;
    for rect in layout {
        let v = match rect.source {
            GateSource::Gate1 => v_g1,
            GateSource::Gate2 => v_g2,
        };
        phi += v * rect.fraction_at(x, y, depth)?;
    }
    Ok(-MEV_PER_EV * phi)
}

/// Superposes the per-rectangle kernels over the grid.
pub fn split_gate_potential(
    layout: &[GateRect],
    v_g1: f64,
    v_g2: f64,
    depth: f64,
    grid: &Grid2d,
) -> Result<PotentialField> {
    if layout.is_empty() {
        return Err(Error::Config("gate layout is empty".into()));
    }
    for rect in layout {
        rect.validate()?;
    }
    for (i, a) in layout.iter().enumerate() {
        for b in &layout[i + 1..] {
            if a.source != b.source && a.overlaps(b) {
                return Err(Error::Config(
                    "overlapping gate rectangles driven by different sources".into(),
                ));
            }
        }
    }
    require_positive("depth", depth)?;
    let n_y = grid.ys.len();
    let mut energy = vec![0.0; grid.xs.len() * n_y];
    for (ix, &x) in grid.xs.iter().enumerate() {
        for (iy, &y) in grid.ys.iter().enumerate() {
            energy[ix * n_y + iy] = energy_shift_at(layout, v_g1, v_g2, depth, x, y)?;
        }
    }
    Ok(PotentialField { grid: grid.clone(), energy_mev: energy })
}

/// Two-rectangle split-gate layout of a device: gap W_c, gate length L_c,
/// each finger reaching out to the junction width.
pub fn split_gate_layout(geometry: &DeviceGeometry) -> Vec<GateRect> {
    let half_gap = geometry.w_c_nm / 2.0;
    let half_len = geometry.l_c_nm / 2.0;
    let reach = (geometry.w_j_um * 1000.0 - geometry.w_c_nm) / 2.0;
    vec![
        GateRect {
            x_min: -half_len,
            x_max: half_len,
            y_min: half_gap,
            y_max: half_gap + reach,
            source: GateSource::Gate1,
        },
        GateRect {
            x_min: -half_len,
            x_max: half_len,
            y_min: -half_gap - reach,
            y_max: -half_gap,
            source: GateSource::Gate2,
        },
    ]
}

/// Potential of a device's split gates with both fingers tied to V_g.
pub fn constriction_profile(
    geometry: &DeviceGeometry,
    v_g: f64,
    grid: &Grid2d,
) -> Result<PotentialField> {
    geometry.validate()?;
    let layout = split_gate_layout(geometry);
    split_gate_potential(&layout, v_g, v_g, geometry.depth_nm, grid)
}

/// Parabolic fit of the constriction saddle: barrier top V0 and the two
/// curvature energies (meV).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleFit {
    /// Barrier height at the saddle point (meV).
    pub v0: f64,
    /// hbar omega_x along transport (meV).
    pub hbar_omega_x: f64,
    /// hbar omega_y across the channel (meV).
    pub hbar_omega_y: f64,
}

/// Fits the saddle of a symmetric split-gate layout at the constriction
/// center via central differences of the analytic kernel. Returns None when
/// no barrier has formed (V0 <= 0 or wrong curvature signs), i.e. the
/// constriction is fully open.
pub fn saddle_fit(geometry: &DeviceGeometry, v_g: f64, m_eff: f64) -> Result<Option<SaddleFit>> {
    geometry.validate()?;
    require_positive("m_eff", m_eff)?;
    let layout = split_gate_layout(geometry);
    let d = geometry.depth_nm;
    let f = |x: f64, y: f64| energy_shift_at(&layout, v_g, v_g, d, x, y);
    let h = 2.0;
    let v0 = f(0.0, 0.0)?;
    if v0 <= 0.0 {
        return Ok(None);
    }
    let vxx = (f(h, 0.0)? - 2.0 * v0 + f(-h, 0.0)?) / (h * h);
    let vyy = (f(0.0, h)? - 2.0 * v0 + f(0.0, -h)?) / (h * h);
    if vxx >= 0.0 || vyy <= 0.0 {
        return Ok(None);
    }
    let omega = |curv: f64| (2.0 * HBAR2_OVER_2ME / m_eff * curv.abs()).sqrt();
    Ok(Some(SaddleFit { v0, hbar_omega_x: omega(vxx), hbar_omega_y: omega(vyy) }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::DeviceGeometry;

    fn big_rect(source: GateSource) -> GateRect {
        GateRect { x_min: -1e9, x_max: 1e9, y_min: -1e9, y_max: 1e9, source }
    }

    #[test]
    fn whole_plane_gate_transfers_its_full_voltage() {
        let f = big_rect(GateSource::Gate1).fraction_at(12.0, -7.0, 120.0).unwrap();
        assert!((f - 1.0).abs() < 1e-6, "{f}");
    }

    #[test]
    fn half_plane_edge_sees_half() {
        let rect = GateRect { x_min: 0.0, x_max: 1e9, y_min: -1e9, y_max: 1e9, source: GateSource::Gate1 };
        let f = rect.fraction_at(0.0, 0.0, 120.0).unwrap();
        assert!((f - 0.5).abs() < 1e-6, "{f}");
    }

    #[test]
    fn square_gate_center_fraction() {
        let rect = GateRect { x_min: -100.0, x_max: 100.0, y_min: -100.0, y_max: 100.0, source: GateSource::Gate1 };
        let f = rect.fraction_at(0.0, 0.0, 120.0).unwrap();
        assert!((f - 0.269).abs() < 5e-4, "{f}");
    }

    #[test]
    fn kernel_rejects_bad_depth() {
        assert!(rect_gate_kernel(1.0, 1.0, 0.0).is_err());
        assert!(rect_gate_kernel(1.0, 1.0, -3.0).is_err());
    }

    #[test]
    fn superposition_is_exact() {
        let geometry = DeviceGeometry::table_device(5).unwrap();
        let layout = split_gate_layout(&geometry);
        let grid = Grid2d::centered(9, 7, 25.0);
        let both = split_gate_potential(&layout, -0.3, -0.7, 120.0, &grid).unwrap();
        let g1 = split_gate_potential(&layout, -0.3, 0.0, 120.0, &grid).unwrap();
        let g2 = split_gate_potential(&layout, 0.0, -0.7, 120.0, &grid).unwrap();
        for i in 0..both.energy_mev.len() {
            let sum = g1.energy_mev[i] + g2.energy_mev[i];
            assert!((both.energy_mev[i] - sum).abs() < 1e-12);
        }
        let zero = split_gate_potential(&layout, 0.0, 0.0, 120.0, &grid).unwrap();
        assert!(zero.energy_mev.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn mirror_symmetry_for_symmetric_layout() {
        let geometry = DeviceGeometry::table_device(5).unwrap();
        let grid = Grid2d::centered(11, 11, 20.0);
        let field = constriction_profile(&geometry, -0.5, &grid).unwrap();
        let ny = grid.ys.len();
        for ix in 0..grid.xs.len() {
            for iy in 0..ny {
                let a = field.energy_mev[ix * ny + iy];
                let b = field.energy_mev[ix * ny + (ny - 1 - iy)];
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn device5_pinches_off_before_minus_one_volt() {
        let geometry = DeviceGeometry::table_device(5).unwrap();
        let layout = split_gate_layout(&geometry);
        let barrier = energy_shift_at(&layout, -1.0, -1.0, 120.0, 0.0, 0.0).unwrap();
        assert!(barrier > 14.5, "barrier {barrier} meV must exceed E_F");
    }

    #[test]
    fn narrower_gap_confines_harder() {
        let narrow = DeviceGeometry::table_device(5).unwrap(); // W_c = 100
        let wide = DeviceGeometry::table_device(1).unwrap(); // W_c = 400
        let sn = saddle_fit(&narrow, -0.05, 0.037).unwrap().unwrap();
        let sw = saddle_fit(&wide, -0.05, 0.037).unwrap();
        if let Some(sw) = sw {
            assert!(sn.hbar_omega_y > sw.hbar_omega_y);
        }
        // V_g = 0 means no barrier at all.
        assert!(saddle_fit(&narrow, 0.0, 0.037).unwrap().is_none());
    }

    #[test]
    fn conflicting_overlaps_are_rejected() {
        let a = GateRect { x_min: -10.0, x_max: 10.0, y_min: -10.0, y_max: 10.0, source: GateSource::Gate1 };
        let b = GateRect { x_min: 0.0, x_max: 20.0, y_min: 0.0, y_max: 20.0, source: GateSource::Gate2 };
        let grid = Grid2d::centered(3, 3, 10.0);
        let err = split_gate_potential(&[a, b], -1.0, -1.0, 120.0, &grid).unwrap_err();
        assert!(err.to_string().contains("overlapping"));
    }
}
