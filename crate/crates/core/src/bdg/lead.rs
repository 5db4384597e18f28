//! Semi-infinite normal leads: surface Green's functions, self-energies,
//! broadening matrices and propagating-channel bookkeeping.
//!
//! Leads are translation-invariant normal strips (no pairing), so the
//! electron and hole sectors decouple and each n_y-dimensional surface
//! problem is solved by Sancho-Rubio decimation. Broadening matrices
//! Gamma = i (Sigma - Sigma^dag) have rank equal to the number of
//! propagating channels; their spectral decomposition provides the
//! flux-normalized channel basis used for scattering amplitudes (at B = 0
//! this basis coincides with the hard-wall sine modes).

use super::lattice::{BdgLattice, C64};
use crate::error::{Error, Result};
use crate::units::HBAR_MEV_S;
use nalgebra::{DMatrix, DVector};

/// Which side of the device a lead hangs off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Particle sector of the BdG problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Electron,
    Hole,
}

/// Relative imaginary part added to the energy inside the decimation.
const ETA_REL: f64 = 1e-12;

/// Transverse (y) Hamiltonian of one lead cell in the given sector.
fn lead_cell(lattice: &BdgLattice, sector: Sector) -> DMatrix<C64> {
    let n = lattice.n_y;
    let eps = 4.0 * lattice.t - lattice.e_f;
    let (diag, hop) = match sector {
        Sector::Electron => (eps, -lattice.t),
        Sector::Hole => (-eps, lattice.t),
    };
    let mut h = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        h[(i, i)] = C64::new(diag, 0.0);
        if i + 1 < n {
            h[(i, i + 1)] = C64::new(hop, 0.0);
            h[(i + 1, i)] = C64::new(hop, 0.0);
        }
    }
    h
}

/// Inter-cell hopping of the lead in the +x direction for one sector
/// (diagonal in y thanks to the Landau gauge).
fn lead_hop(lattice: &BdgLattice, sector: Sector) -> DVector<C64> {
    let full = lattice.hop_diagonal();
    let n = lattice.n_y;
    match sector {
        Sector::Electron => full.rows(0, n).into_owned(),
        Sector::Hole => full.rows(n, n).into_owned(),
    }
}

fn scale_cols(m: &mut DMatrix<C64>, d: &DVector<C64>) {
    for j in 0..m.ncols() {
        let s = d[j];
        for i in 0..m.nrows() {
            m[(i, j)] *= s;
        }
    }
}

fn scale_rows(m: &mut DMatrix<C64>, d: &DVector<C64>) {
    for i in 0..m.nrows() {
        let s = d[i];
        for j in 0..m.ncols() {
            m[(i, j)] *= s;
        }
    }
}

/// Surface Green's function of a semi-infinite chain of cells `h00` coupled
/// by the diagonal hopping `hop_into_bulk` (surface cell -> next cell toward
/// the bulk), by Sancho-Rubio decimation at energy E + i eta.
fn surface_green(
    h00: &DMatrix<C64>,
    hop_into_bulk: &DVector<C64>,
    energy: f64,
    t_scale: f64,
) -> Result<DMatrix<C64>> {
    let n = h00.nrows();
    let w = C64::new(energy, ETA_REL * t_scale);
    let mut alpha = DMatrix::from_diagonal(hop_into_bulk);
    let mut beta = alpha.adjoint();
    let mut eps_s = h00.clone();
    let mut eps = h00.clone();
    let identity = DMatrix::<C64>::identity(n, n);

    for _ in 0..200 {
        let m = &identity * w - &eps;
        let g = m.lu().solve(&identity).ok_or_else(|| Error::Numeric {
            context: "singular bulk block in lead decimation".into(),
            residual: f64::NAN,
        })?;
        let agb = &alpha * &g * &beta;
        let bga = &beta * &g * &alpha;
        eps_s += &agb;
        eps += agb + bga;
        alpha = &alpha * &g * &alpha;
        beta = &beta * &g * &beta;
        let remaining = alpha.norm().max(beta.norm());
        if remaining < 1e-16 * t_scale {
            let m = &identity * w - &eps_s;
            return m.lu().solve(&identity).ok_or_else(|| Error::Numeric {
                context: "singular surface block in lead decimation".into(),
                residual: f64::NAN,
            });
        }
    }
    Err(Error::Numeric {
        context: "lead decimation did not converge in 200 sweeps".into(),
        residual: alpha.norm() / t_scale,
    })
}

/// Self-energy and broadening of one lead on the adjacent device column,
/// in the full BdG basis (electrons then holes).
#[derive(Debug, Clone)]
pub struct LeadSurface {
    pub sigma: DMatrix<C64>,
    /// Electron-sector broadening (n_y square).
    pub gamma_e: DMatrix<C64>,
    /// Hole-sector broadening (n_y square).
    pub gamma_h: DMatrix<C64>,
}

/// Computes the lead self-energy onto the neighboring device column.
///
/// For the left lead the chain extends toward -x, so the hop into the bulk
/// is the adjoint of the +x hopping; the self-energy is V^dag g V. Mirrored
/// for the right lead.
pub fn lead_self_energy(lattice: &BdgLattice, side: Side, energy: f64) -> Result<LeadSurface> {
    let n = lattice.n_y;
    let mut sigma = DMatrix::from_element(2 * n, 2 * n, C64::new(0.0, 0.0));
    let mut gammas = Vec::with_capacity(2);
    for (k, sector) in [Sector::Electron, Sector::Hole].into_iter().enumerate() {
        let h00 = lead_cell(lattice, sector);
        let v = lead_hop(lattice, sector); // hop in +x direction
        let v_conj = v.map(|c| c.conj());
        let g = match side {
            Side::Left => surface_green(&h00, &v_conj, energy, lattice.t)?,
            Side::Right => surface_green(&h00, &v, energy, lattice.t)?,
        };
        // Sigma = V^dag g V (left) or V g V^dag (right); V is diagonal.
        let mut s = g;
        match side {
            Side::Left => {
                scale_rows(&mut s, &v_conj);
                scale_cols(&mut s, &v);
            }
            Side::Right => {
                scale_rows(&mut s, &v);
                scale_cols(&mut s, &v_conj);
            }
        }
        let gamma = (&s - s.adjoint()).map(|c| c * C64::new(0.0, 1.0));
        // symmetrize to kill roundoff skew
        let gamma = (&gamma + gamma.adjoint()).map(|c| c * C64::new(0.5, 0.0));
        sigma.view_mut((k * n, k * n), (n, n)).copy_from(&s);
        gammas.push(gamma);
    }
    let gamma_h = gammas.pop().expect("two sectors");
    let gamma_e = gammas.pop().expect("two sectors");
    Ok(LeadSurface { sigma, gamma_e, gamma_h })
}

/// Flux-normalized open channels of one lead sector: W = Q sqrt(gamma)
/// restricted to eigenvalues above the propagation threshold.
#[derive(Debug, Clone)]
pub struct ChannelBasis {
    /// n_y x n_open matrix of weighted channel vectors.
    pub w: DMatrix<C64>,
    /// Gamma eigenvalues of the open channels (= hbar v_n / a).
    pub gamma: Vec<f64>,
}

impl ChannelBasis {
    pub fn n_open(&self) -> usize {
        self.gamma.len()
    }
}

/// Spectral channel basis of a broadening matrix.
pub fn channel_basis(gamma: &DMatrix<C64>, t_scale: f64) -> ChannelBasis {
    let n = gamma.nrows();
    let eig = nalgebra::SymmetricEigen::new(gamma.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let tol = 1e-7 * t_scale;
    let open: Vec<usize> = order.into_iter().filter(|&i| eig.eigenvalues[i] > tol).collect();
    let mut w = DMatrix::from_element(n, open.len(), C64::new(0.0, 0.0));
    let mut g = Vec::with_capacity(open.len());
    for (col, &i) in open.iter().enumerate() {
        let sqrt_g = eig.eigenvalues[i].sqrt();
        for r in 0..n {
            w[(r, col)] = eig.eigenvectors[(r, i)] * C64::new(sqrt_g, 0.0);
        }
        g.push(eig.eigenvalues[i]);
    }
    ChannelBasis { w, gamma: g }
}

/// Propagating channels of a translation-invariant strip whose cross
/// section carries the potential `v_col` (meV per row), evaluated at
/// quasiparticle energy E. Zero-field electron-sector dispersion:
/// E + E_F = eps_perp_m + 2t (1 - cos k a).
#[derive(Debug, Clone)]
pub struct LeadModes {
    /// Transverse eigenenergies of the open channels (meV).
    pub transverse_energies: Vec<f64>,
    /// Longitudinal momenta (nm^-1).
    pub momenta: Vec<f64>,
    /// Group velocities (m/s), positive for right-movers.
    pub velocities: Vec<f64>,
    /// Transverse wavefunctions (unit l2 norm), one per open channel.
    pub wavefunctions: Vec<Vec<f64>>,
}

impl LeadModes {
    pub fn count(&self) -> usize {
        self.momenta.len()
    }
}

/// Solves the zero-field transverse eigenproblem of a strip with hard
/// walls and the given cross-section potential, then keeps channels that
/// propagate at energy E above the Fermi sea.
pub fn lead_channels(
    v_col: &[f64],
    t: f64,
    e_f: f64,
    a: f64,
    energy: f64,
) -> Result<LeadModes> {
    let n = v_col.len();
    if n == 0 {
        return Err(Error::domain("lead", "empty cross section"));
    }
    // transverse part: 2t on the diagonal plus the potential
    let mut h = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = 2.0 * t + v_col[i];
        if i + 1 < n {
            h[(i, i + 1)] = -t;
            h[(i + 1, i)] = -t;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].partial_cmp(&eig.eigenvalues[y]).unwrap());

    let mut modes = LeadModes {
        transverse_energies: vec![],
        momenta: vec![],
        velocities: vec![],
        wavefunctions: vec![],
    };
    for &m in &order {
        let eps_perp = eig.eigenvalues[m];
        // longitudinal kinetic energy available to this subband
        let long = energy + e_f - eps_perp;
        if long <= 0.0 || long >= 4.0 * t {
            continue;
        }
        let cos_ka = 1.0 - long / (2.0 * t);
        let ka = cos_ka.acos();
        modes.transverse_energies.push(eps_perp);
        modes.momenta.push(ka / a);
        // v = dE/hbar dk = 2 t a sin(ka) / hbar, converted from nm/s to m/s
        modes.velocities.push(2.0 * t * a * ka.sin() / HBAR_MEV_S * 1e-9);
        modes.wavefunctions.push(eig.eigenvectors.column(m).iter().copied().collect());
    }
    Ok(modes)
}
