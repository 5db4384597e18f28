//! Tight-binding Bogoliubov-de Gennes lattice for a gated two-terminal
//! device.
//!
//! Sites live on a square lattice of spacing `a`; each carries an electron
//! and a hole orbital. The hole block is the negated conjugate of the
//! electron block and an on-site pairing amplitude couples the two. A
//! perpendicular field enters through Peierls phases on the x hoppings in
//! the Landau gauge A = (-B (y - y0), 0, 0), which keeps both leads
//! translation invariant for any gauge offset y0.

use crate::error::{require_positive, Error, Result};
use crate::gates::PotentialField;
use crate::material::{DeviceGeometry, Interfaces};
use crate::units::{peierls_phase_per_plaquette, HBAR2_OVER_2ME};
use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex<f64>;

/// Per-site pair potential suppression with perpendicular field:
/// Delta(B) = Delta_0 max(0, 1 - (B/B_c)^2).
pub fn delta_vs_field(b_tesla: f64, delta_0: f64, b_c: f64) -> f64 {
    if b_tesla < 0.0 {
        return delta_0;
    }
    let x = b_tesla / b_c;
    delta_0 * (1.0 - x * x).max(0.0)
}

/// Optional seeded on-site disorder in the normal region.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Disorder {
    /// Uniform amplitude W: on-site shifts drawn from [-W/2, W/2] (meV).
    pub amplitude: f64,
    pub seed: u64,
}

/// Assembled BdG lattice plus lead bookkeeping.
#[derive(Debug, Clone)]
pub struct BdgLattice {
    pub n_x: usize,
    pub n_y: usize,
    /// Lattice spacing (nm).
    pub a: f64,
    /// Hopping energy hbar^2 / (2 m* a^2) (meV).
    pub t: f64,
    /// Fermi energy measured from the 2D band bottom (meV).
    pub e_f: f64,
    /// Electron on-site energies 4t + V(x,y) - E_F (+ barrier), x-major.
    pub onsite_e: Vec<f64>,
    /// On-site pair potential (meV), nonzero only in S regions.
    pub pairing: Vec<f64>,
    /// Peierls phase per plaquette (rad).
    pub phase_per_plaquette: f64,
    /// Gauge offset y0 in row units.
    pub gauge_y0: f64,
    /// Whether a normal lead is attached on the right; otherwise the last
    /// column ends on a hard wall (used to terminate superconducting
    /// regions after several coherence lengths).
    pub right_lead: bool,
}

impl BdgLattice {
    pub fn site(&self, ix: usize, iy: usize) -> usize {
        ix * self.n_y + iy
    }

    /// Peierls phase on the x hopping leaving row iy (electron sector).
    pub fn x_hop_phase(&self, iy: usize) -> f64 {
        -self.phase_per_plaquette * (iy as f64 - self.gauge_y0)
    }

    /// Diagonal of the inter-column hopping block H_{i,i+1} in the BdG
    /// basis (electron orbitals first, then holes). Identical for every
    /// column in the Landau gauge.
    pub fn hop_diagonal(&self) -> DVector<C64> {
        let mut v = DVector::from_element(2 * self.n_y, C64::new(0.0, 0.0));
        for iy in 0..self.n_y {
            let phase = self.x_hop_phase(iy);
            let e = C64::new(0.0, phase).exp() * C64::new(-self.t, 0.0);
            v[iy] = e;
            // hole block is -conj of the electron block
            v[self.n_y + iy] = -e.conj();
        }
        v
    }

    /// Dense BdG Hamiltonian block of column ix (2 n_y square).
    pub fn column_block(&self, ix: usize) -> DMatrix<C64> {
        let n = self.n_y;
        let mut h = DMatrix::from_element(2 * n, 2 * n, C64::new(0.0, 0.0));
        for iy in 0..n {
            let s = self.site(ix, iy);
            let eps = self.onsite_e[s];
            h[(iy, iy)] = C64::new(eps, 0.0);
            h[(n + iy, n + iy)] = C64::new(-eps, 0.0);
            let d = self.pairing[s];
            h[(iy, n + iy)] = C64::new(d, 0.0);
            h[(n + iy, iy)] = C64::new(d, 0.0);
            if iy + 1 < n {
                h[(iy, iy + 1)] = C64::new(-self.t, 0.0);
                h[(iy + 1, iy)] = C64::new(-self.t, 0.0);
                h[(n + iy, n + iy + 1)] = C64::new(self.t, 0.0);
                h[(n + iy + 1, n + iy)] = C64::new(self.t, 0.0);
            }
        }
        h
    }

    /// Column block of the (normal, ungated) leads.
    pub fn lead_block(&self) -> DMatrix<C64> {
        let n = self.n_y;
        let mut h = DMatrix::from_element(2 * n, 2 * n, C64::new(0.0, 0.0));
        let eps = 4.0 * self.t - self.e_f;
        for iy in 0..n {
            h[(iy, iy)] = C64::new(eps, 0.0);
            h[(n + iy, n + iy)] = C64::new(-eps, 0.0);
            if iy + 1 < n {
                h[(iy, iy + 1)] = C64::new(-self.t, 0.0);
                h[(iy + 1, iy)] = C64::new(-self.t, 0.0);
                h[(n + iy, n + iy + 1)] = C64::new(self.t, 0.0);
                h[(n + iy + 1, n + iy)] = C64::new(self.t, 0.0);
            }
        }
        h
    }

    /// Total number of BdG orbitals.
    pub fn orbitals(&self) -> usize {
        2 * self.n_x * self.n_y
    }
}

/// Build parameters beyond the spec-level geometry/potential inputs.
#[derive(Debug, Clone, Copy)]
pub struct LatticeOptions {
    pub m_eff: f64,
    /// Fermi energy of the 2DEG (meV).
    pub e_f: f64,
    /// Gauge offset y0 in row units.
    pub gauge_y0: f64,
    /// Cap on the superconducting termination length (nm).
    pub s_length_cap_nm: f64,
    pub disorder: Option<Disorder>,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        LatticeOptions {
            m_eff: crate::material::DEFAULT_M_EFF,
            e_f: 14.5,
            gauge_y0: 0.0,
            s_length_cap_nm: 750.0,
            disorder: None,
        }
    }
}

/// Assembles the device lattice from the gate potential sampled on the
/// normal region.
///
/// One interface: the potential columns are followed by an optional barrier
/// column and a superconducting region of length 5 xi(Delta) (capped),
/// terminated by a hard wall; the probe lead on the left stays normal. Two
/// interfaces: superconducting regions flank the potential columns on both
/// sides (the phase-coherent geometry; the incoherent series route is
/// handled by the sweep layer). With Delta = 0 no S region is added and a
/// normal lead is attached on the right instead.
pub fn build_bdg_lattice(
    geometry: &DeviceGeometry,
    potential: &PotentialField,
    delta: f64,
    b_tesla: f64,
    a: f64,
    opts: &LatticeOptions,
) -> Result<BdgLattice> {
    geometry.validate()?;
    require_positive("a", a)?;
    require_positive("m_eff", opts.m_eff)?;
    require_positive("E_F", opts.e_f)?;
    if delta < 0.0 {
        return Err(Error::domain("delta", "pair potential must be >= 0"));
    }

    let t = HBAR2_OVER_2ME / (opts.m_eff * a * a);
    // resolution guard: a <= lambda_F / 8
    let k_f = (opts.e_f * opts.m_eff / HBAR2_OVER_2ME).sqrt();
    let lambda_f = 2.0 * std::f64::consts::PI / k_f;
    if a > lambda_f / 8.0 {
        return Err(Error::Config(format!(
            "lattice spacing {a} nm too coarse: must be <= lambda_F/8 = {:.2} nm",
            lambda_f / 8.0
        )));
    }

    let n_y = potential.grid.ys.len();
    let n_gate = potential.grid.xs.len();
    if n_y < 2 || n_gate < 2 {
        return Err(Error::Config("potential grid too small for a lattice".into()));
    }

    // Superconducting termination: the zero-energy evanescent amplitude
    // decays as exp(-x Delta / hbar v_F), so eight decay lengths push the
    // probability leakage below 1e-6. Capped so nearly-closed gaps stay
    // tractable.
    let with_s = delta > 0.0;
    let n_s = if with_s {
        let hbar_v_f = 2.0 * HBAR2_OVER_2ME / opts.m_eff * k_f;
        let decay = hbar_v_f / delta;
        ((8.0 * decay).min(opts.s_length_cap_nm) / a).ceil().max(4.0) as usize
    } else {
        0
    };
    let barrier_cols = if with_s && geometry.z > 0.0 { 1 } else { 0 };
    let two = geometry.interfaces == Interfaces::Two && with_s;
    let reserve = (n_gate + 2 * (barrier_cols + n_s)) * n_y;
    let mut onsite = Vec::with_capacity(reserve);
    let mut pairing = Vec::with_capacity(reserve);

    // Z is defined against the 2D Fermi velocity: U_b = Z hbar v_F / a.
    let hbar_v_f = 2.0 * HBAR2_OVER_2ME / opts.m_eff * k_f;
    let u_barrier = geometry.z * hbar_v_f / a;

    let push_s_column = |onsite: &mut Vec<f64>, pairing: &mut Vec<f64>| {
        for _ in 0..n_y {
            onsite.push(4.0 * t - opts.e_f);
            pairing.push(delta);
        }
    };
    let push_barrier_column = |onsite: &mut Vec<f64>, pairing: &mut Vec<f64>| {
        for _ in 0..n_y {
            onsite.push(4.0 * t - opts.e_f + u_barrier);
            pairing.push(0.0);
        }
    };

    if two {
        for _ in 0..n_s {
            push_s_column(&mut onsite, &mut pairing);
        }
        if barrier_cols == 1 {
            push_barrier_column(&mut onsite, &mut pairing);
        }
    }
    for ix in 0..n_gate {
        for iy in 0..n_y {
            onsite.push(4.0 * t - opts.e_f + potential.at(ix, iy));
            pairing.push(0.0);
        }
    }
    if with_s {
        if barrier_cols == 1 {
            push_barrier_column(&mut onsite, &mut pairing);
        }
        for _ in 0..n_s {
            push_s_column(&mut onsite, &mut pairing);
        }
    }

    let n_x = onsite.len() / n_y;

    if let Some(d) = opts.disorder {
        let mut rng = ChaCha8Rng::seed_from_u64(d.seed);
        for (i, site) in onsite.iter_mut().enumerate() {
            if pairing[i] == 0.0 {
                *site += (rng.gen::<f64>() - 0.5) * d.amplitude;
            }
        }
    }

    let lattice = BdgLattice {
        n_x,
        n_y,
        a,
        t,
        e_f: opts.e_f,
        onsite_e: onsite,
        pairing,
        phase_per_plaquette: peierls_phase_per_plaquette(b_tesla, a),
        gauge_y0: opts.gauge_y0,
        // With a superconducting termination the device ends on a hard
        // wall; a normal device keeps its right lead. The coherent
        // two-interface layout is probed from the left through the first
        // S film, so it keeps the right lead as drain.
        right_lead: !with_s || two,
    };
    Ok(lattice)
}

/// A normal/superconducting strip built by hand: `n_n` normal columns, an
/// optional barrier column with on-site boost `u_barrier`, then `n_s`
/// superconducting columns ending on a hard wall. Probe lead on the left.
#[allow(clippy::too_many_arguments)]
pub fn ns_strip(
    n_y: usize,
    a: f64,
    m_eff: f64,
    e_f: f64,
    delta: f64,
    n_n: usize,
    n_s: usize,
    u_barrier: Option<f64>,
) -> BdgLattice {
    let t = HBAR2_OVER_2ME / (m_eff * a * a);
    let mut onsite = Vec::new();
    let mut pairing = Vec::new();
    for _ in 0..n_n {
        for _ in 0..n_y {
            onsite.push(4.0 * t - e_f);
            pairing.push(0.0);
        }
    }
    if let Some(u) = u_barrier {
        for _ in 0..n_y {
            onsite.push(4.0 * t - e_f + u);
            pairing.push(0.0);
        }
    }
    for _ in 0..n_s {
        for _ in 0..n_y {
            onsite.push(4.0 * t - e_f);
            pairing.push(delta);
        }
    }
    let n_x = onsite.len() / n_y;
    BdgLattice {
        n_x,
        n_y,
        a,
        t,
        e_f,
        onsite_e: onsite,
        pairing,
        phase_per_plaquette: 0.0,
        gauge_y0: 0.0,
        right_lead: n_s == 0,
    }
}

/// A plain normal strip (no gate, no pairing): both leads attached.
pub fn uniform_strip(
    n_x: usize,
    n_y: usize,
    a: f64,
    m_eff: f64,
    e_f: f64,
    b_tesla: f64,
) -> BdgLattice {
    let t = HBAR2_OVER_2ME / (m_eff * a * a);
    BdgLattice {
        n_x,
        n_y,
        a,
        t,
        e_f,
        onsite_e: vec![4.0 * t - e_f; n_x * n_y],
        pairing: vec![0.0; n_x * n_y],
        phase_per_plaquette: peierls_phase_per_plaquette(b_tesla, a),
        gauge_y0: 0.0,
        right_lead: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{constriction_profile, Grid2d};
    use crate::material::DeviceGeometry;

    #[test]
    fn hopping_energy_at_default_spacing() {
        let lat = uniform_strip(4, 4, 5.0, 0.037, 14.5, 0.0);
        assert!((lat.t - 41.2).abs() < 0.05, "t = {}", lat.t);
    }

    #[test]
    fn peierls_phase_magnitude() {
        let lat = uniform_strip(4, 4, 5.0, 0.037, 14.5, 1.0);
        assert!((lat.phase_per_plaquette - 0.0380).abs() < 1e-4);
        // hole hop is the negated conjugate of the electron hop
        let v = lat.hop_diagonal();
        for iy in 0..4 {
            let e = v[iy];
            let h = v[4 + iy];
            assert!((h + e.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_field_zero_gap_is_block_diagonal() {
        let lat = uniform_strip(3, 3, 5.0, 0.037, 14.5, 0.0);
        assert!(lat.pairing.iter().all(|&d| d == 0.0));
        let h = lat.column_block(1);
        for iy in 0..3 {
            for jy in 0..3 {
                assert_eq!(h[(iy, 3 + jy)], C64::new(0.0, 0.0));
                assert_eq!(h[(3 + iy, jy)], C64::new(0.0, 0.0));
            }
        }
        let v = lat.hop_diagonal();
        assert!(v.iter().take(3).all(|c| c.im == 0.0));
    }

    #[test]
    fn one_interface_layout_has_s_on_the_right_only() {
        let mut geometry = DeviceGeometry::table_device(5).unwrap();
        geometry.interfaces = Interfaces::One;
        let grid = Grid2d::centered(20, 10, 5.0);
        let field = constriction_profile(&geometry, -0.02, &grid).unwrap();
        let lat =
            build_bdg_lattice(&geometry, &field, 1.4, 0.0, 5.0, &LatticeOptions::default())
                .unwrap();
        assert!(!lat.right_lead);
        // pairing confined to trailing columns
        let first_paired = (0..lat.n_x)
            .find(|&ix| (0..lat.n_y).any(|iy| lat.pairing[lat.site(ix, iy)] > 0.0))
            .unwrap();
        assert!(first_paired >= 20);
        for ix in first_paired..lat.n_x {
            for iy in 0..lat.n_y {
                assert_eq!(lat.pairing[lat.site(ix, iy)], 1.4);
            }
        }
        // normal constriction region carries no pairing
        for ix in 0..20 {
            for iy in 0..lat.n_y {
                assert_eq!(lat.pairing[lat.site(ix, iy)], 0.0);
            }
        }
    }

    #[test]
    fn coarse_spacing_is_rejected() {
        let geometry = DeviceGeometry::table_device(5).unwrap();
        let grid = Grid2d::centered(10, 6, 8.0);
        let field = constriction_profile(&geometry, -0.02, &grid).unwrap();
        let err = build_bdg_lattice(&geometry, &field, 1.4, 0.0, 8.0, &LatticeOptions::default())
            .unwrap_err();
        assert!(err.to_string().contains("too coarse"), "{err}");
    }

    #[test]
    fn field_suppression_of_the_gap() {
        assert_eq!(delta_vs_field(0.0, 1.4, 1.7), 1.4);
        assert_eq!(delta_vs_field(1.7, 1.4, 1.7), 0.0);
        assert_eq!(delta_vs_field(6.0, 1.4, 1.7), 0.0);
        let d = delta_vs_field(0.6, 1.4, 1.7);
        assert!((d - 1.4 * (1.0 - (0.6f64 / 1.7).powi(2))).abs() < 1e-14);
        assert!((d / 1.4 - 0.875).abs() < 2e-3);
    }
}
