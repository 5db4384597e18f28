//! Two-terminal scattering solve by recursive Green's functions.
//!
//! The device is swept column by column: right- and left-connected Green's
//! functions give the retarded blocks touching each lead, and scattering
//! amplitudes follow from the generalized Fisher-Lee relation
//! S = -1 + i Gamma^{1/2} G Gamma^{1/2} evaluated in the spectral channel
//! basis of each lead's broadening matrix. That relation is exactly unitary
//! for any self-energy satisfying Gamma = i (Sigma - Sigma^dag), so S-matrix
//! unitarity is a genuine end-to-end check of the recursion, not a
//! construction artifact.

use super::lattice::{BdgLattice, C64};
use super::lead::{channel_basis, lead_self_energy, ChannelBasis, LeadSurface, Side};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Normal- and Andreev-reflection amplitude blocks at the probe lead, in
/// the flux-normalized channel basis of the lead broadening matrix (equal
/// to the hard-wall sine modes at zero field, up to degenerate rotations).
#[derive(Debug, Clone)]
pub struct ReflectionBlocks {
    pub r_ee: DMatrix<C64>,
    pub r_he: DMatrix<C64>,
}

/// Scattering amplitudes of the device, stacked per lead as
/// [electron channels, hole channels].
#[derive(Debug, Clone)]
pub struct ScatteringSolution {
    /// Open electron / hole channels in the left lead.
    pub n_e_left: usize,
    pub n_h_left: usize,
    /// Open channels in the right lead (zero without a right lead).
    pub n_e_right: usize,
    pub n_h_right: usize,
    /// Reflection at the left lead.
    pub s_ll: DMatrix<C64>,
    /// Transmission left -> right, reflection at the right lead, and
    /// transmission right -> left (empty when solved reflection-only).
    pub s_rl: DMatrix<C64>,
    pub s_rr: DMatrix<C64>,
    pub s_lr: DMatrix<C64>,
}

impl ScatteringSolution {
    fn block(m: &DMatrix<C64>, r0: usize, rn: usize, c0: usize, cn: usize) -> DMatrix<C64> {
        m.view((r0, c0), (rn, cn)).into_owned()
    }

    pub fn reflection(&self) -> ReflectionBlocks {
        let (ne, nh) = (self.n_e_left, self.n_h_left);
        ReflectionBlocks {
            r_ee: Self::block(&self.s_ll, 0, ne, 0, ne),
            r_he: Self::block(&self.s_ll, ne, nh, 0, ne),
        }
    }

    pub fn r_eh(&self) -> DMatrix<C64> {
        Self::block(&self.s_ll, 0, self.n_e_left, self.n_e_left, self.n_h_left)
    }

    pub fn r_hh(&self) -> DMatrix<C64> {
        Self::block(&self.s_ll, self.n_e_left, self.n_h_left, self.n_e_left, self.n_h_left)
    }

    /// Electron transmission block t_ee (right <- left).
    pub fn t_ee(&self) -> DMatrix<C64> {
        Self::block(&self.s_rl, 0, self.n_e_right, 0, self.n_e_left)
    }

    /// Landauer conductance sum(T_n) in G0 units (meaningful at Delta = 0).
    pub fn landauer(&self) -> f64 {
        self.t_ee().norm_squared()
    }

    /// Sub-gap conductance of the probe lead in G0 units:
    /// G = N_e - Tr(r_ee^dag r_ee) + Tr(r_he^dag r_he).
    pub fn ns_conductance(&self) -> f64 {
        let r = self.reflection();
        ns_conductance(self.n_e_left, &r)
    }

    /// Same conductance evaluated from the hole sector; equal to
    /// `ns_conductance` at E = 0 by particle-hole symmetry.
    pub fn ns_conductance_hole_sector(&self) -> f64 {
        self.n_h_left as f64 - self.r_hh().norm_squared() + self.r_eh().norm_squared()
    }

    /// Worst column-norm deviation of the stacked S-matrix from unitarity.
    pub fn unitarity_defect(&self) -> f64 {
        let n_l = self.n_e_left + self.n_h_left;
        let n_r = self.n_e_right + self.n_h_right;
        let mut worst: f64 = 0.0;
        for c in 0..n_l {
            let mut norm = 0.0;
            for r in 0..n_l {
                norm += self.s_ll[(r, c)].norm_sqr();
            }
            for r in 0..n_r {
                norm += self.s_rl[(r, c)].norm_sqr();
            }
            worst = worst.max((norm - 1.0).abs());
        }
        for c in 0..n_r {
            if self.s_rr.ncols() != n_r {
                break;
            }
            let mut norm = 0.0;
            for r in 0..n_l {
                norm += self.s_lr[(r, c)].norm_sqr();
            }
            for r in 0..n_r {
                norm += self.s_rr[(r, c)].norm_sqr();
            }
            worst = worst.max((norm - 1.0).abs());
        }
        worst
    }
}

/// G/G0 = N - Tr(r_ee^dag r_ee) + Tr(r_he^dag r_he).
pub fn ns_conductance(n_open: usize, blocks: &ReflectionBlocks) -> f64 {
    n_open as f64 - blocks.r_ee.norm_squared() + blocks.r_he.norm_squared()
}

/// In-place M <- diag(d) * M.
fn premul_diag(d: &DVector<C64>, m: &mut DMatrix<C64>) {
    for i in 0..m.nrows() {
        let s = d[i];
        for j in 0..m.ncols() {
            m[(i, j)] *= s;
        }
    }
}

/// diag(v) * M * diag(v)^dag for diagonal hoppings.
fn sandwich(v: &DVector<C64>, m: &DMatrix<C64>, conj_right: bool) -> DMatrix<C64> {
    let mut out = m.clone();
    for i in 0..out.nrows() {
        for j in 0..out.ncols() {
            let right = if conj_right { v[j].conj() } else { v[j] };
            out[(i, j)] *= v[i] * right;
        }
    }
    out
}

fn invert(m: DMatrix<C64>, context: &str) -> Result<DMatrix<C64>> {
    let n = m.nrows();
    m.lu().solve(&DMatrix::<C64>::identity(n, n)).ok_or_else(|| Error::Numeric {
        context: format!("singular linear solve in {context}"),
        residual: f64::NAN,
    })
}

/// Stacks the per-sector channel matrices into the BdG basis.
fn stacked_channels(basis_e: &ChannelBasis, basis_h: &ChannelBasis, n_y: usize) -> DMatrix<C64> {
    let (ne, nh) = (basis_e.n_open(), basis_h.n_open());
    let mut w = DMatrix::from_element(2 * n_y, ne + nh, C64::new(0.0, 0.0));
    w.view_mut((0, 0), (n_y, ne)).copy_from(&basis_e.w);
    w.view_mut((n_y, ne), (n_y, nh)).copy_from(&basis_h.w);
    w
}

/// Solves the scattering problem of the lattice at quasiparticle energy E.
///
/// `full` additionally computes the right-incidence blocks (s_rr, s_lr),
/// which doubles the sweep cost; conductance needs only the left-incidence
/// part.
pub fn solve_with(lattice: &BdgLattice, energy: f64, full: bool) -> Result<ScatteringSolution> {
    let n_y = lattice.n_y;
    let n_x = lattice.n_x;
    let dim = 2 * n_y;
    if n_x < 2 {
        return Err(Error::Config("lattice needs at least two columns".into()));
    }

    let surf_l = lead_self_energy(lattice, Side::Left, energy)?;
    let surf_r: Option<LeadSurface> = if lattice.right_lead {
        Some(lead_self_energy(lattice, Side::Right, energy)?)
    } else {
        None
    };

    let v = lattice.hop_diagonal();
    let v_conj = v.map(|c| c.conj());
    let w_id = DMatrix::<C64>::identity(dim, dim);
    let a_block = |ix: usize| -> DMatrix<C64> {
        &w_id * C64::new(energy, 0.0) - lattice.column_block(ix)
    };

    let basis_le = channel_basis(&surf_l.gamma_e, lattice.t);
    let basis_lh = channel_basis(&surf_l.gamma_h, lattice.t);
    let w_l = stacked_channels(&basis_le, &basis_lh, n_y);
    let (basis_re, basis_rh) = match &surf_r {
        Some(s) => (channel_basis(&s.gamma_e, lattice.t), channel_basis(&s.gamma_h, lattice.t)),
        None => (ChannelBasis { w: DMatrix::zeros(n_y, 0), gamma: vec![] }, ChannelBasis {
            w: DMatrix::zeros(n_y, 0),
            gamma: vec![],
        }),
    };
    let w_r = stacked_channels(&basis_re, &basis_rh, n_y);

    // Right-connected sweep, stored for the forward propagation.
    let mut g_right: Vec<DMatrix<C64>> = vec![DMatrix::zeros(0, 0); n_x];
    {
        let mut a = a_block(n_x - 1);
        if let Some(s) = &surf_r {
            a -= &s.sigma;
        }
        g_right[n_x - 1] = invert(a, "right sweep seed")?;
    }
    for j in (1..n_x - 1).rev() {
        let coupling = sandwich(&v, &g_right[j + 1], true);
        g_right[j] = invert(a_block(j) - coupling, "right sweep")?;
    }

    // Fully-connected block at the probe column.
    let g_00 = {
        let coupling = sandwich(&v, &g_right[1], true);
        invert(a_block(0) - &surf_l.sigma - coupling, "probe column")?
    };

    // Thin forward propagation of G_{j,0} W_L up to the last column.
    let mut p = &g_00 * &w_l;
    let p0 = p.clone();
    for g in g_right.iter().skip(1) {
        premul_diag(&v_conj, &mut p);
        p = g * p;
    }
    drop(g_right);

    let i_unit = C64::new(0.0, 1.0);
    let n_l = w_l.ncols();
    let s_ll = {
        let mut s = (w_l.adjoint() * &p0).map(|c| c * i_unit);
        for k in 0..n_l {
            s[(k, k)] -= C64::new(1.0, 0.0);
        }
        s
    };
    let s_rl = (w_r.adjoint() * &p).map(|c| c * i_unit);

    let (s_rr, s_lr) = if full && surf_r.is_some() {
        // Left-connected sweep for the right-incidence blocks.
        let mut g_left: Vec<DMatrix<C64>> = vec![DMatrix::zeros(0, 0); n_x];
        g_left[0] = invert(a_block(0) - &surf_l.sigma, "left sweep seed")?;
        for j in 1..n_x - 1 {
            let coupling = sandwich(&v_conj, &g_left[j - 1], true);
            g_left[j] = invert(a_block(j) - coupling, "left sweep")?;
        }
        let g_nn = {
            let coupling = sandwich(&v_conj, &g_left[n_x - 2], true);
            let mut a = a_block(n_x - 1) - coupling;
            if let Some(s) = &surf_r {
                a -= &s.sigma;
            }
            invert(a, "drain column")?
        };
        let mut q = &g_nn * &w_r;
        let qn = q.clone();
        for g in g_left.iter().rev().skip(1) {
            premul_diag(&v, &mut q);
            q = g * q;
        }
        let n_r = w_r.ncols();
        let mut s_rr = (w_r.adjoint() * &qn).map(|c| c * i_unit);
        for k in 0..n_r {
            s_rr[(k, k)] -= C64::new(1.0, 0.0);
        }
        let s_lr = (w_l.adjoint() * &q).map(|c| c * i_unit);
        (s_rr, s_lr)
    } else {
        (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
    };

    Ok(ScatteringSolution {
        n_e_left: basis_le.n_open(),
        n_h_left: basis_lh.n_open(),
        n_e_right: basis_re.n_open(),
        n_h_right: basis_rh.n_open(),
        s_ll,
        s_rl,
        s_rr,
        s_lr,
    })
}

/// Full scattering solve (all four lead blocks).
pub fn solve(lattice: &BdgLattice, energy: f64) -> Result<ScatteringSolution> {
    solve_with(lattice, energy, true)
}

/// Reflection blocks at the probe lead.
pub fn reflection_matrix(lattice: &BdgLattice, energy: f64) -> Result<ReflectionBlocks> {
    Ok(solve_with(lattice, energy, false)?.reflection())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdg::lattice::{ns_strip, uniform_strip, BdgLattice};
    use crate::bdg::lead::lead_channels;

    /// Dense-inverse oracle: the same S-matrix assembled from a full
    /// (E - H - Sigma)^-1 of the entire lattice.
    fn dense_solution(lattice: &BdgLattice, energy: f64) -> ScatteringSolution {
        let n_y = lattice.n_y;
        let dim = 2 * n_y;
        let n = lattice.n_x * dim;
        let mut h = DMatrix::<C64>::zeros(n, n);
        let v = lattice.hop_diagonal();
        for ix in 0..lattice.n_x {
            h.view_mut((ix * dim, ix * dim), (dim, dim)).copy_from(&lattice.column_block(ix));
            if ix + 1 < lattice.n_x {
                for p in 0..dim {
                    h[(ix * dim + p, (ix + 1) * dim + p)] = v[p];
                    h[((ix + 1) * dim + p, ix * dim + p)] = v[p].conj();
                }
            }
        }
        let surf_l = lead_self_energy(lattice, Side::Left, energy).unwrap();
        let mut m = DMatrix::<C64>::identity(n, n) * C64::new(energy, 0.0) - h;
        m.view_mut((0, 0), (dim, dim)).sub_assign_surface(&surf_l.sigma);
        let surf_r = if lattice.right_lead {
            let s = lead_self_energy(lattice, Side::Right, energy).unwrap();
            m.view_mut(((lattice.n_x - 1) * dim, (lattice.n_x - 1) * dim), (dim, dim))
                .sub_assign_surface(&s.sigma);
            Some(s)
        } else {
            None
        };
        let g = m.lu().solve(&DMatrix::identity(n, n)).unwrap();

        let basis_le = channel_basis(&surf_l.gamma_e, lattice.t);
        let basis_lh = channel_basis(&surf_l.gamma_h, lattice.t);
        let w_l = stacked_channels(&basis_le, &basis_lh, n_y);
        let (basis_re, basis_rh) = match &surf_r {
            Some(s) => {
                (channel_basis(&s.gamma_e, lattice.t), channel_basis(&s.gamma_h, lattice.t))
            }
            None => (
                ChannelBasis { w: DMatrix::zeros(n_y, 0), gamma: vec![] },
                ChannelBasis { w: DMatrix::zeros(n_y, 0), gamma: vec![] },
            ),
        };
        let w_r = stacked_channels(&basis_re, &basis_rh, n_y);

        let i_unit = C64::new(0.0, 1.0);
        let last = (lattice.n_x - 1) * dim;
        let g00 = g.view((0, 0), (dim, dim));
        let gn0 = g.view((last, 0), (dim, dim));
        let gnn = g.view((last, last), (dim, dim));
        let g0n = g.view((0, last), (dim, dim));
        let mut s_ll = (w_l.adjoint() * g00 * &w_l).map(|c| c * i_unit);
        for k in 0..w_l.ncols() {
            s_ll[(k, k)] -= C64::new(1.0, 0.0);
        }
        let s_rl = (w_r.adjoint() * gn0 * &w_l).map(|c| c * i_unit);
        let mut s_rr = (w_r.adjoint() * gnn * &w_r).map(|c| c * i_unit);
        for k in 0..w_r.ncols() {
            s_rr[(k, k)] -= C64::new(1.0, 0.0);
        }
        let s_lr = (w_l.adjoint() * g0n * &w_r).map(|c| c * i_unit);
        ScatteringSolution {
            n_e_left: basis_le.n_open(),
            n_h_left: basis_lh.n_open(),
            n_e_right: basis_re.n_open(),
            n_h_right: basis_rh.n_open(),
            s_ll,
            s_rl,
            s_rr,
            s_lr,
        }
    }

    trait SubAssignSurface {
        fn sub_assign_surface(&mut self, sigma: &DMatrix<C64>);
    }
    impl SubAssignSurface for nalgebra::DMatrixViewMut<'_, C64> {
        fn sub_assign_surface(&mut self, sigma: &DMatrix<C64>) {
            for i in 0..sigma.nrows() {
                for j in 0..sigma.ncols() {
                    self[(i, j)] -= sigma[(i, j)];
                }
            }
        }
    }

    fn gated_test_lattice(b: f64, delta: f64) -> BdgLattice {
        let mut lat = if delta > 0.0 {
            ns_strip(4, 5.0, 0.037, 14.5, delta, 5, 4, Some(20.0))
        } else {
            uniform_strip(9, 4, 5.0, 0.037, 14.5, 0.0)
        };
        lat.phase_per_plaquette = crate::units::peierls_phase_per_plaquette(b, 5.0);
        // a lumpy potential in the normal region
        for ix in 2..4 {
            for iy in 0..lat.n_y {
                let s = lat.site(ix, iy);
                if lat.pairing[s] == 0.0 {
                    lat.onsite_e[s] += 3.0 * ((ix + 2 * iy) as f64).sin().abs();
                }
            }
        }
        lat
    }

    #[test]
    fn rgf_matches_dense_inverse() {
        for (b, delta, e) in [(0.0, 0.0, 0.0), (0.7, 0.0, 0.4), (0.3, 1.1, 0.0), (0.0, 1.1, 0.35)]
        {
            let lat = gated_test_lattice(b, delta);
            let fast = solve(&lat, e).unwrap();
            let dense = dense_solution(&lat, e);
            assert_eq!(fast.n_e_left, dense.n_e_left);
            let d_ll = (&fast.s_ll - &dense.s_ll).norm();
            assert!(d_ll < 1e-9, "s_ll mismatch {d_ll} at B={b}, delta={delta}");
            let d_rl = (&fast.s_rl - &dense.s_rl).norm();
            assert!(d_rl < 1e-9, "s_rl mismatch {d_rl}");
            if lat.right_lead {
                let d_rr = (&fast.s_rr - &dense.s_rr).norm();
                let d_lr = (&fast.s_lr - &dense.s_lr).norm();
                assert!(d_rr < 1e-9 && d_lr < 1e-9, "right blocks {d_rr} {d_lr}");
            }
        }
    }

    #[test]
    fn clean_strip_transmits_every_channel() {
        let lat = uniform_strip(12, 10, 5.0, 0.037, 14.5, 0.0);
        let sol = solve(&lat, 0.0).unwrap();
        let modes = lead_channels(&vec![0.0; 10], lat.t, lat.e_f, lat.a, 0.0).unwrap();
        assert!(modes.count() > 0);
        // ballistic: no reflection, Andreev-free
        let r = sol.reflection();
        assert!(r.r_ee.norm() < 1e-8, "|r_ee| = {}", r.r_ee.norm());
        assert!(r.r_he.norm() < 1e-12);
        assert!((sol.landauer() - modes.count() as f64).abs() < 1e-8);
        assert!((sol.ns_conductance() - sol.landauer()).abs() < 1e-10);
        assert!(sol.unitarity_defect() < 1e-9);
    }

    #[test]
    fn transparent_ns_junction_retroreflects() {
        // single open mode: E_F between the first two strip subbands
        let n_y = 10;
        let a = 5.0;
        let t = crate::units::HBAR2_OVER_2ME / (0.037 * a * a);
        let eps = |m: usize| {
            2.0 * t * (1.0 - (m as f64 * std::f64::consts::PI / (n_y as f64 + 1.0)).cos())
        };
        let e_f = 0.5 * (eps(1) + eps(2));
        let mu1 = e_f - eps(1);
        let delta = 0.08 * mu1;
        // S region several zero-energy decay lengths deep
        let ka = (1.0 - mu1 / (2.0 * t)).acos();
        let n_s = (8.0 * 2.0 * t * ka.sin() / delta / 8.0).ceil() as usize * 8;
        let lat = ns_strip(n_y, a, 0.037, e_f, delta, 8, n_s, None);
        let sol = solve_with(&lat, 0.0, false).unwrap();
        assert_eq!(sol.n_e_left, 1);
        let r = sol.reflection();
        let a_prob = r.r_he.norm_squared();
        assert!(a_prob >= 0.95, "Andreev probability {a_prob}");
        let g = sol.ns_conductance();
        assert!((g - 2.0).abs() < 0.1, "doubled conductance, got {g}");
    }

    #[test]
    fn single_site_barrier_matches_btk() {
        // 3-row strip, one open mode; barrier tuned so the lattice
        // transmission is exactly 1/(1+Z^2) at the chosen energy.
        let n_y = 3;
        let a = 5.0;
        let t = crate::units::HBAR2_OVER_2ME / (0.037 * a * a);
        let eps1 = 2.0 * t * (1.0 - (std::f64::consts::PI / 4.0).cos());
        let e_f = eps1 + 0.45 * t;
        let ka = (1.0_f64 - 0.45 / 2.0).acos();
        for &z in &[0.0_f64, 0.5, 1.0, 2.0] {
            let u_b = z * 2.0 * t * ka.sin();
            // deep Andreev limit: corrections to BTK scale with Delta/mu,
            // and the S termination needs several e^{-x Delta/hbar v} decay
            // lengths
            let delta = 0.003 * t;
            let n_s = (8.0 * 2.0 * ka.sin() / 0.003).ceil() as usize;
            let lat = ns_strip(n_y, a, 0.037, e_f, delta, 10, n_s, Some(u_b));
            let sol = solve_with(&lat, 0.0, false).unwrap();
            assert_eq!(sol.n_e_left, 1);
            let g = sol.ns_conductance();
            let btk = 2.0 / (1.0 + 2.0 * z * z).powi(2);
            assert!(
                (g - btk).abs() / btk < 0.10,
                "Z={z}: lattice {g} vs BTK {btk}"
            );
        }
    }

    #[test]
    fn synthetic_reflection_blocks() {
        // N = 1, perfect Andreev: G = 2
        let blocks = ReflectionBlocks {
            r_ee: DMatrix::zeros(1, 1),
            r_he: DMatrix::from_element(1, 1, C64::new(1.0, 0.0)),
        };
        assert_eq!(ns_conductance(1, &blocks), 2.0);
        // unitary normal reflection: G = 0
        let blocks = ReflectionBlocks {
            r_ee: DMatrix::from_element(1, 1, C64::new(0.0, 1.0)),
            r_he: DMatrix::zeros(1, 1),
        };
        assert_eq!(ns_conductance(1, &blocks), 0.0);
        // two modes, perfect Andreev in both: G = 4
        let blocks = ReflectionBlocks {
            r_ee: DMatrix::zeros(2, 2),
            r_he: DMatrix::identity(2, 2),
        };
        assert_eq!(ns_conductance(2, &blocks), 4.0);
    }

    #[test]
    fn particle_hole_symmetric_at_zero_energy() {
        let lat = gated_test_lattice(0.4, 1.1);
        let sol = solve(&lat, 0.0).unwrap();
        let ge = sol.ns_conductance();
        let gh = sol.ns_conductance_hole_sector();
        assert!((ge - gh).abs() < 1e-10, "electron {ge} vs hole {gh}");
    }

    #[test]
    fn gauge_offset_leaves_conductance_invariant() {
        for delta in [0.0, 1.1] {
            let mut lat = gated_test_lattice(0.8, delta);
            let g0 = solve(&lat, 0.0).unwrap().ns_conductance();
            lat.gauge_y0 = 7.3;
            let g1 = solve(&lat, 0.0).unwrap().ns_conductance();
            assert!((g0 - g1).abs() < 1e-8, "gauge drift {g0} vs {g1}");
        }
    }

    #[test]
    fn zero_pairing_reduces_to_landauer() {
        let lat = gated_test_lattice(0.5, 0.0);
        let sol = solve(&lat, 0.0).unwrap();
        let diff = (sol.ns_conductance() - sol.landauer()).abs();
        assert!(diff < 1e-10, "NS formula vs Landauer differ by {diff}");
        let r = sol.reflection();
        assert!(r.r_he.norm() < 1e-13, "no Andreev without pairing");
    }
}
