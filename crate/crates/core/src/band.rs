//! 1D self-consistent conduction-band and carrier-density solver along the
//! growth direction.
//!
//! The electrostatic potential is evaluated through the Poisson equation and
//! fed to the effective-mass Schrodinger equation; the resulting density
//! redistribution updates the potential, and the loop runs to a fixed point
//! under linear mixing. The Fermi level is the energy zero throughout, and
//! only the Hartree term enters (no exchange-correlation).

use crate::error::{require_positive, Error, Result};
use crate::material::WaferStack;
use crate::units::{thermal_energy, EPS0, HBAR2_OVER_2ME, MEV_PER_EV};

/// Uniform growth-direction grid (nm below the surface).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1d {
    pub positions: Vec<f64>,
    pub spacing: f64,
}

impl Grid1d {
    /// Uniform grid from `start` to `stop` inclusive.
    pub fn uniform(start: f64, stop: f64, spacing: f64) -> Result<Grid1d> {
        require_positive("spacing", spacing)?;
        if stop <= start {
            return Err(Error::domain("grid", "stop must exceed start"));
        }
        let n = ((stop - start) / spacing).round() as usize + 1;
        let positions = (0..n).map(|i| start + spacing * i as f64).collect();
        Ok(Grid1d { positions, spacing })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// One bound state: energy (meV) and its envelope, normalized so that
/// sum(psi^2) * spacing = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub energy: f64,
    pub envelope: Vec<f64>,
}

/// Counts eigenvalues of the symmetric tridiagonal (diag, off) below x via
/// the Sturm sequence of the shifted LDL^T factorization.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let n = diag.len();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let denom = if q.abs() < 1e-300 { 1e-300_f64.copysign(q) } else { q };
        q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solves (T - sigma I) v = b for tridiagonal T by banded LU with partial
/// pivoting; row swaps populate a second superdiagonal.
fn shifted_tridiag_solve(diag: &[f64], off: &[f64], sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let safe = |x: f64| if x.abs() < 1e-300 { 1e-300_f64.copysign(x) } else { x };
    // row i holds entries (d, e, f) at columns (i, i+1, i+2)
    let mut d: Vec<f64> = diag.iter().map(|&v| v - sigma).collect();
    let mut e: Vec<f64> = {
        let mut e = off.to_vec();
        e.push(0.0);
        e
    };
    let mut f = vec![0.0; n];
    let mut rhs = b.to_vec();

    for i in 0..n - 1 {
        // entry at (i+1, i), untouched by earlier eliminations
        let mut low = off[i];
        if low.abs() > d[i].abs() {
            // swap rows i and i+1: row i+1 is (low, d[i+1], e[i+1])
            let (ri_d, ri_e) = (d[i], e[i]);
            d[i] = low;
            e[i] = d[i + 1];
            f[i] = e[i + 1];
            low = ri_d;
            d[i + 1] = ri_e;
            e[i + 1] = 0.0;
            rhs.swap(i, i + 1);
        }
        let m = low / safe(d[i]);
        d[i + 1] -= m * e[i];
        e[i + 1] -= m * f[i];
        rhs[i + 1] -= m * rhs[i];
    }

    let mut v = vec![0.0; n];
    v[n - 1] = rhs[n - 1] / safe(d[n - 1]);
    if n >= 2 {
        v[n - 2] = (rhs[n - 2] - e[n - 2] * v[n - 1]) / safe(d[n - 2]);
    }
    for i in (0..n.saturating_sub(2)).rev() {
        v[i] = (rhs[i] - e[i] * v[i + 1] - f[i] * v[i + 2]) / safe(d[i]);
    }
    v
}

/// Lowest `n_states` eigenpairs of a symmetric tridiagonal matrix by Sturm
/// bisection plus inverse iteration.
fn lowest_eigenpairs(diag: &[f64], off: &[f64], n_states: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = diag.len();
    if n_states == 0 || n_states > n {
        return Err(Error::domain("n_states", format!("need 1..={n} states, got {n_states}")));
    }
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = (if i > 0 { off[i - 1].abs() } else { 0.0 })
            + (if i < n - 1 { off[i].abs() } else { 0.0 });
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = hi.abs().max(lo.abs()).max(1.0);

    let mut pairs = Vec::with_capacity(n_states);
    let mut prev_vecs: Vec<Vec<f64>> = Vec::new();
    for k in 0..n_states {
        // bisect for the (k+1)-th eigenvalue
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if sturm_count(diag, off, mid) >= k + 1 {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= 1e-14 * scale {
                break;
            }
        }
        let lambda = 0.5 * (a + b);

        // inverse iteration with a slightly shifted pivot
        let sigma = lambda + 1e-11 * scale;
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.3 * ((i * 2654435761) % 97) as f64 / 97.0).collect();
        normalize(&mut v);
        for _ in 0..4 {
            let mut w = shifted_tridiag_solve(diag, off, sigma, &v);
            for p in &prev_vecs {
                let dot: f64 = w.iter().zip(p).map(|(a, b)| a * b).sum();
                for (wi, pi) in w.iter_mut().zip(p) {
                    *wi -= dot * pi;
                }
            }
            normalize(&mut w);
            v = w;
        }
        // residual check
        let mut res: f64 = 0.0;
        for i in 0..n {
            let mut hv = diag[i] * v[i];
            if i > 0 {
                hv += off[i - 1] * v[i - 1];
            }
            if i < n - 1 {
                hv += off[i] * v[i + 1];
            }
            res = res.max((hv - lambda * v[i]).abs());
        }
        if res > 1e-6 * scale {
            return Err(Error::Numeric {
                context: format!("inverse iteration for state {k} did not converge"),
                residual: res / scale,
            });
        }
        prev_vecs.push(v.clone());
        pairs.push((lambda, v));
    }
    Ok(pairs)
}

fn normalize(v: &mut [f64]) {
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Lowest eigenpairs of the 1D effective-mass Hamiltonian
/// -d/dx (hbar^2 / 2 m(x)) d/dx + V(x) with vanishing boundary conditions
/// one spacing outside the grid. Energies ascend; envelopes satisfy
/// sum(psi^2) dx = 1.
pub fn solve_schrodinger_1d(
    cb_edge: &[f64],
    mass: &[f64],
    grid: &Grid1d,
    n_states: usize,
) -> Result<Vec<Eigenpair>> {
    let n = grid.len();
    if cb_edge.len() != n || mass.len() != n {
        return Err(Error::domain("profiles", "cb_edge/mass must match the grid"));
    }
    if n_states < 1 {
        return Err(Error::domain("n_states", "need at least one state"));
    }
    let dx2 = grid.spacing * grid.spacing;
    // kinetic coefficients at half points, BenDaniel-Duke form
    let c_half = |m_a: f64, m_b: f64| HBAR2_OVER_2ME * 0.5 * (1.0 / m_a + 1.0 / m_b) / dx2;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for i in 0..n {
        let c_left = if i > 0 { c_half(mass[i - 1], mass[i]) } else { c_half(mass[0], mass[0]) };
        let c_right =
            if i < n - 1 { c_half(mass[i], mass[i + 1]) } else { c_half(mass[n - 1], mass[n - 1]) };
        diag[i] = c_left + c_right + cb_edge[i];
        if i < n - 1 {
            off[i] = -c_half(mass[i], mass[i + 1]);
        }
    }
    let pairs = lowest_eigenpairs(&diag, &off, n_states)?;
    Ok(pairs
        .into_iter()
        .map(|(energy, mut envelope)| {
            // l2-normalized -> integral-normalized
            let s = 1.0 / grid.spacing.sqrt();
            for x in envelope.iter_mut() {
                *x *= s;
            }
            Eigenpair { energy, envelope }
        })
        .collect())
}

/// Boundary condition of the Poisson solve at one end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoissonBc {
    /// Fixed potential energy value (meV).
    Dirichlet(f64),
    /// Zero-field (charge neutral) end.
    Neumann,
}

/// Solves d/dx (eps d/dx U) = MEV_PER_EV * rho / EPS0 for the electron
/// potential energy U = -e phi (meV). `charge` is the signed charge density
/// in e/nm^3 (donors positive, electrons negative).
pub fn solve_poisson_1d(
    charge: &[f64],
    eps_r: &[f64],
    grid: &Grid1d,
    surface: PoissonBc,
    deep: PoissonBc,
) -> Result<Vec<f64>> {
    let n = grid.len();
    if charge.len() != n || eps_r.len() != n {
        return Err(Error::domain("profiles", "charge/eps_r must match the grid"));
    }
    if matches!(surface, PoissonBc::Neumann) && matches!(deep, PoissonBc::Neumann) {
        return Err(Error::Config(
            "all-Neumann Poisson problem is singular; pin at least one boundary".into(),
        ));
    }
    let dx2 = grid.spacing * grid.spacing;
    let eps_half = |i: usize, j: usize| 0.5 * (eps_r[i] + eps_r[j]);

    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];

    for i in 0..n {
        rhs[i] = MEV_PER_EV * charge[i] / EPS0 * dx2;
        if i > 0 && i < n - 1 {
            let el = eps_half(i - 1, i);
            let er = eps_half(i, i + 1);
            sub[i] = el;
            diag[i] = -(el + er);
            sup[i] = er;
        }
    }
    match surface {
        PoissonBc::Dirichlet(u0) => {
            diag[0] = 1.0;
            sup[0] = 0.0;
            rhs[0] = u0;
        }
        PoissonBc::Neumann => {
            let er = eps_half(0, 1);
            diag[0] = -er;
            sup[0] = er;
            // rhs keeps the half-cell source
        }
    }
    match deep {
        PoissonBc::Dirichlet(u1) => {
            diag[n - 1] = 1.0;
            sub[n - 1] = 0.0;
            rhs[n - 1] = u1;
        }
        PoissonBc::Neumann => {
            let el = eps_half(n - 2, n - 1);
            sub[n - 1] = el;
            diag[n - 1] = -el;
        }
    }

    let u = thomas_solve(&sub, &diag, &sup, &rhs)?;

    // residual check against the assembled system
    let mut res: f64 = 0.0;
    let mut scale: f64 = 1e-300;
    for i in 0..n {
        let mut lhs = diag[i] * u[i];
        if i > 0 {
            lhs += sub[i] * u[i - 1];
        }
        if i < n - 1 {
            lhs += sup[i] * u[i + 1];
        }
        res = res.max((lhs - rhs[i]).abs());
        scale = scale.max(rhs[i].abs()).max(lhs.abs()).max(u[i].abs());
    }
    if res > 1e-10 * scale {
        return Err(Error::Numeric { context: "Poisson residual too large".into(), residual: res / scale });
    }
    Ok(u)
}

fn thomas_solve(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        if m.abs() < 1e-300 {
            return Err(Error::Numeric {
                context: "singular tridiagonal system".into(),
                residual: f64::INFINITY,
            });
        }
        c[i] = sup[i] / m;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut u = vec![0.0; n];
    u[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        u[i] = d[i] - c[i] * u[i + 1];
    }
    Ok(u)
}

/// Poisson solve with a local linear density response (Newton predictor):
/// d/dx(eps d/dx U) - k w U = k (N_D - n0 - w U0), k = MEV_PER_EV / EPS0.
/// `w` is dn/d(-U) in nm^-3 per meV, >= 0.
fn solve_screened_poisson(
    charge: &[f64],
    screening: &[f64],
    u0: &[f64],
    eps_r: &[f64],
    grid: &Grid1d,
    u_surface: f64,
) -> Result<Vec<f64>> {
    let n = grid.len();
    let dx2 = grid.spacing * grid.spacing;
    let k = MEV_PER_EV / EPS0;
    let eps_half = |i: usize, j: usize| 0.5 * (eps_r[i] + eps_r[j]);

    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 1..n - 1 {
        let el = eps_half(i - 1, i);
        let er = eps_half(i, i + 1);
        sub[i] = el;
        diag[i] = -(el + er) - k * screening[i] * dx2;
        sup[i] = er;
        rhs[i] = k * dx2 * (charge[i] - screening[i] * u0[i]);
    }
    diag[0] = 1.0;
    rhs[0] = u_surface;
    let el = eps_half(n - 2, n - 1);
    sub[n - 1] = el;
    diag[n - 1] = -el - k * screening[n - 1] * dx2;
    rhs[n - 1] = k * dx2 * (charge[n - 1] - screening[n - 1] * u0[n - 1]);
    thomas_solve(&sub, &diag, &sup, &rhs)
}

/// Electron volume density (nm^-3) from occupied subbands at temperature T:
/// n(x) = sum_i |psi_i(x)|^2 (m(x) / pi hbar^2) kT ln(1 + exp((E_F - E_i)/kT)).
pub fn compute_density(
    eigenpairs: &[Eigenpair],
    e_f: f64,
    temperature_k: f64,
    mass: &[f64],
) -> Result<Vec<f64>> {
    require_positive("T", temperature_k)?;
    let n = mass.len();
    let kt = thermal_energy(temperature_k);
    let mut density = vec![0.0; n];
    for pair in eigenpairs {
        if pair.envelope.len() != n {
            return Err(Error::domain("eigenpairs", "envelope length mismatch"));
        }
        // kT ln(1 + exp((E_F - E)/kT)), numerically stable in both tails
        let x = (e_f - pair.energy) / kt;
        let occ = kt * if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
        for i in 0..n {
            let dos = mass[i] / (2.0 * std::f64::consts::PI * HBAR2_OVER_2ME);
            density[i] += pair.envelope[i] * pair.envelope[i] * dos * occ;
        }
    }
    Ok(density)
}

/// Converged conduction-band profile. Positions in nm, band edge in meV with
/// the Fermi level at zero, densities in m^-3 / m^-2.
#[derive(Debug, Clone, PartialEq)]
pub struct BandProfile {
    pub grid: Grid1d,
    pub cb_edge: Vec<f64>,
    pub density: Vec<f64>,
    pub sheet_density: f64,
    pub eigenstates: Vec<Eigenpair>,
}

/// Initial guess of the self-consistent loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialGuess {
    FlatBand,
    DonorScreened,
}

/// Tuning knobs of the self-consistent solve.
#[derive(Debug, Clone, Copy)]
pub struct ScfOptions {
    pub spacing: f64,
    /// Simulated depth below the surface (nm); the deep stack is cut at a
    /// charge-neutral Neumann boundary.
    pub max_depth: f64,
    pub n_states: usize,
    pub mixing: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub initial: InitialGuess,
}

impl Default for ScfOptions {
    fn default() -> Self {
        ScfOptions {
            spacing: 0.25,
            max_depth: 500.0,
            n_states: 7,
            mixing: 0.3,
            tol: 1e-6,
            max_iter: 500,
            initial: InitialGuess::FlatBand,
        }
    }
}

/// Converged solve plus diagnostics used by tests and the CLI.
#[derive(Debug, Clone)]
pub struct ScfResult {
    pub band: BandProfile,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// Donor sheet, electron sheet and surface charge, all in e/nm^2.
    pub donor_sheet: f64,
    pub electron_sheet: f64,
    pub surface_charge: f64,
}

/// Material profiles sampled on the grid, with graded layers interpolated
/// linearly across their span.
fn sample_profiles(wafer: &WaferStack, grid: &Grid1d) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = grid.len();
    let mut offset = vec![0.0; n];
    let mut mass = vec![0.0; n];
    let mut eps = vec![0.0; n];
    let mut doping = vec![0.0; n];
    let spans: Vec<(f64, f64)> = (0..wafer.layers.len()).map(|i| wafer.layer_span(i)).collect();
    for (i, &x) in grid.positions.iter().enumerate() {
        let idx = spans
            .iter()
            .position(|&(lo, hi)| x >= lo && x < hi)
            .unwrap_or(wafer.layers.len() - 1);
        let layer = &wafer.layers[idx];
        let (lo, hi) = spans[idx];
        offset[i] = match layer.grade_to_offset {
            Some(bottom) => {
                let f = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
                layer.material.cb_offset * (1.0 - f) + bottom * f
            }
            None => layer.material.cb_offset,
        };
        mass[i] = layer.material.m_eff;
        eps[i] = layer.material.eps_r;
        doping[i] = layer.doping_per_nm3;
    }
    (offset, mass, eps, doping)
}

/// Runs the Poisson -> Schrodinger -> density loop to a fixed point with the
/// default discretization.
pub fn self_consistent_band(
    wafer: &WaferStack,
    temperature_k: f64,
    mixing: f64,
    tol: f64,
) -> Result<ScfResult> {
    let opts = ScfOptions { mixing, tol, ..ScfOptions::default() };
    self_consistent_band_with(wafer, temperature_k, &opts)
}

pub fn self_consistent_band_with(
    wafer: &WaferStack,
    temperature_k: f64,
    opts: &ScfOptions,
) -> Result<ScfResult> {
    wafer.validate()?;
    require_positive("T", temperature_k)?;
    if !(opts.mixing > 0.0 && opts.mixing <= 1.0) {
        return Err(Error::domain("mixing", format!("mixing in (0, 1], got {}", opts.mixing)));
    }
    let depth = wafer.total_thickness().min(opts.max_depth);
    let grid = Grid1d::uniform(0.0, depth, opts.spacing)?;
    let n = grid.len();
    let (offset, mass, eps, doping) = sample_profiles(wafer, &grid);
    let u_surface = wafer.surface_pinning_mev - offset[0];

    let poisson = |charge: &[f64]| -> Result<Vec<f64>> {
        solve_poisson_1d(charge, &eps, &grid, PoissonBc::Dirichlet(u_surface), PoissonBc::Neumann)
    };

    let mut hartree = match opts.initial {
        InitialGuess::FlatBand => vec![0.0; n],
        InitialGuess::DonorScreened => poisson(&doping)?,
    };
    let mut density = vec![0.0; n];
    let mut history = Vec::new();
    let mut eigenstates = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    // The bare iteration has a large dielectric gain (a meV of band shift
    // moves a sizeable fraction of the sheet density at sub-kelvin kT).
    // Each step therefore solves the Poisson equation with the local
    // linear density response folded in (a Newton predictor), and the
    // configured linear mixing is applied to that predicted potential.
    let kt_newton = thermal_energy(temperature_k).max(2.0);
    let dos = |m: f64| m / (2.0 * std::f64::consts::PI * HBAR2_OVER_2ME);

    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        let cb: Vec<f64> = offset.iter().zip(&hartree).map(|(o, u)| o + u).collect();
        eigenstates = solve_schrodinger_1d(&cb, &mass, &grid, opts.n_states)?;
        let new_density = compute_density(&eigenstates, 0.0, temperature_k, &mass)?;

        // local density response dn/d(-U), smoothed over a few meV so the
        // Newton step stays tame when a subband sits right at the Fermi
        // level
        let mut screening = vec![0.0; n];
        for pair in &eigenstates {
            let f = 1.0 / (1.0 + (pair.energy / kt_newton).exp());
            for i in 0..n {
                screening[i] += pair.envelope[i] * pair.envelope[i] * dos(mass[i]) * f;
            }
        }

        let charge: Vec<f64> = doping.iter().zip(&new_density).map(|(d, n)| d - n).collect();
        let u_target =
            solve_screened_poisson(&charge, &screening, &hartree, &eps, &grid, u_surface)?;
        let res_u = hartree
            .iter()
            .zip(&u_target)
            .map(|(u, t)| (t - u).abs())
            .fold(0.0f64, f64::max);
        for (u, t) in hartree.iter_mut().zip(&u_target) {
            *u += opts.mixing * (t - *u);
        }

        // density change relative to the larger of electron and donor sheets
        let scale: f64 = new_density
            .iter()
            .map(|x| x.abs())
            .sum::<f64>()
            .max(doping.iter().sum::<f64>())
            .max(1e-300);
        let diff: f64 =
            new_density.iter().zip(&density).map(|(a, b)| (a - b).abs()).sum::<f64>() / scale;
        density = new_density;
        history.push(diff);
        // the potential must also have settled (guards against transient
        // agreement while the band still swings)
        let u_scale = hartree.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        if diff < opts.tol && res_u < 1e3 * opts.tol * u_scale && iter > 0 {
            converged = true;
            break;
        }
    }
    if !converged {
        let tail = history[history.len().saturating_sub(8)..].to_vec();
        return Err(Error::Convergence {
            context: format!("self-consistent band solve hit the {} iteration cap", opts.max_iter),
            history: tail,
        });
    }

    // final consistent band edge and observables
    let cb: Vec<f64> = offset.iter().zip(&hartree).map(|(o, u)| o + u).collect();
    let sheet: f64 = density.iter().sum::<f64>() * grid.spacing; // nm^-2
    let donor_sheet: f64 = doping.iter().sum::<f64>() * grid.spacing;
    // Surface charge from Gauss's law at the pinned boundary.
    let eps_half = 0.5 * (eps[0] + eps[1]);
    let charge: Vec<f64> = doping.iter().zip(&density).map(|(d, n)| d - n).collect();
    let u_final = poisson(&charge)?;
    let surface_charge = eps_half * (u_final[1] - u_final[0]) / grid.spacing * EPS0 / MEV_PER_EV
        - 0.5 * grid.spacing * charge[0];

    let occupied: Vec<Eigenpair> = eigenstates.iter().filter(|p| p.energy < 0.0).cloned().collect();
    let band = BandProfile {
        grid,
        cb_edge: cb,
        density: density.iter().map(|d| d * 1e27).collect(), // nm^-3 -> m^-3
        sheet_density: sheet * 1e18,                         // nm^-2 -> m^-2
        eigenstates: if occupied.is_empty() { eigenstates.clone() } else { eigenstates },
    };
    Ok(ScfResult {
        band,
        iterations,
        residual_history: history,
        donor_sheet,
        electron_sheet: sheet,
        surface_charge,
    })
}

/// Fraction of an envelope's probability weight inside [lo, hi] (nm).
pub fn weight_inside(pair: &Eigenpair, grid: &Grid1d, lo: f64, hi: f64) -> f64 {
    let mut inside = 0.0;
    let mut total = 0.0;
    for (i, &x) in grid.positions.iter().enumerate() {
        let w = pair.envelope[i] * pair.envelope[i];
        total += w;
        if x >= lo && x <= hi {
            inside += w;
        }
    }
    inside / total.max(1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::default_wafer;

    fn square_well_grid() -> Grid1d {
        // walls exactly at 0 and 30 nm: nodes at 0.1 .. 29.9
        Grid1d::uniform(0.1, 29.9, 0.1).unwrap()
    }

    #[test]
    fn infinite_square_well_spectrum() {
        let grid = square_well_grid();
        let n = grid.len();
        let v = vec![0.0; n];
        let m = vec![0.037; n];
        let states = solve_schrodinger_1d(&v, &m, &grid, 3).unwrap();
        let e1_exact = HBAR2_OVER_2ME / 0.037 * (std::f64::consts::PI / 30.0).powi(2);
        assert!((states[0].energy - e1_exact).abs() / e1_exact < 0.01, "E1 = {}", states[0].energy);
        assert!((states[0].energy - 11.3).abs() < 0.12);
        let ratio = states[1].energy / states[0].energy;
        assert!((ratio - 4.0).abs() < 0.04, "E2/E1 = {ratio}");
        assert!(states[0].energy < states[1].energy && states[1].energy < states[2].energy);
    }

    #[test]
    fn square_well_node_counts() {
        let grid = square_well_grid();
        let n = grid.len();
        let states = solve_schrodinger_1d(&vec![0.0; n], &vec![0.037; n], &grid, 2).unwrap();
        // count sign flips between significant samples (a node can land
        // exactly on a grid point)
        let nodes = |psi: &[f64]| {
            let peak = psi.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let significant: Vec<f64> =
                psi.iter().copied().filter(|x| x.abs() > 1e-6 * peak).collect();
            significant.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
        };
        assert_eq!(nodes(&states[0].envelope), 0);
        assert_eq!(nodes(&states[1].envelope), 1);
    }

    #[test]
    fn eigen_envelopes_are_orthonormal() {
        let grid = square_well_grid();
        let n = grid.len();
        // a lopsided well to avoid symmetric accidents
        let v: Vec<f64> = grid.positions.iter().map(|&x| 3.0 * (x / 30.0)).collect();
        let states = solve_schrodinger_1d(&v, &vec![0.05; n], &grid, 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = states[i]
                    .envelope
                    .iter()
                    .zip(&states[j].envelope)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    * grid.spacing;
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-8, "<{i}|{j}> = {dot}");
            }
        }
    }

    #[test]
    fn poisson_zero_charge_is_flat() {
        let grid = Grid1d::uniform(0.0, 100.0, 0.5).unwrap();
        let n = grid.len();
        let u = solve_poisson_1d(
            &vec![0.0; n],
            &vec![12.0; n],
            &grid,
            PoissonBc::Dirichlet(0.0),
            PoissonBc::Dirichlet(0.0),
        )
        .unwrap();
        assert!(u.iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn poisson_sheet_charge_kinks_the_potential() {
        // A sheet of sigma e/nm^2 at the middle of a grounded box produces a
        // tent potential with slope jump sigma / (eps eps0).
        let grid = Grid1d::uniform(0.0, 100.0, 0.5).unwrap();
        let n = grid.len();
        let mid = n / 2;
        let sigma = 2e-3; // e/nm^2
        let mut charge = vec![0.0; n];
        charge[mid] = sigma / grid.spacing;
        let eps = vec![13.0; n];
        let u = solve_poisson_1d(
            &charge,
            &eps,
            &grid,
            PoissonBc::Dirichlet(0.0),
            PoissonBc::Dirichlet(0.0),
        )
        .unwrap();
        let slope_left = (u[mid - 1] - u[mid - 11]) / (10.0 * grid.spacing);
        let slope_right = (u[mid + 11] - u[mid + 1]) / (10.0 * grid.spacing);
        let jump = slope_right - slope_left;
        // donors dip the electron potential energy: slope jump +sigma/eps
        let expected = MEV_PER_EV * sigma / (13.0 * EPS0);
        assert!(
            ((jump - expected) / expected).abs() < 1e-6,
            "jump {jump} vs {expected}"
        );
    }

    #[test]
    fn poisson_uniform_slab_is_parabolic() {
        // rho constant on the whole box with U(0) = U(L) = 0:
        // U(x) = s x (x - L) / (2 eps), s = MEV_PER_EV rho / EPS0.
        let grid = Grid1d::uniform(0.0, 80.0, 0.25).unwrap();
        let n = grid.len();
        let rho = 5e-5;
        let eps = 12.5;
        let u = solve_poisson_1d(
            &vec![rho; n],
            &vec![eps; n],
            &grid,
            PoissonBc::Dirichlet(0.0),
            PoissonBc::Dirichlet(0.0),
        )
        .unwrap();
        let s = MEV_PER_EV * rho / EPS0 / eps;
        let l = 80.0;
        let mut max_rel: f64 = 0.0;
        let scale = s * l * l / 8.0;
        for (i, &x) in grid.positions.iter().enumerate() {
            let exact = 0.5 * s * x * (x - l);
            max_rel = max_rel.max((u[i] - exact).abs() / scale);
        }
        assert!(max_rel < 1e-8, "max relative deviation {max_rel}");
    }

    #[test]
    fn poisson_all_neumann_is_rejected() {
        let grid = Grid1d::uniform(0.0, 10.0, 0.5).unwrap();
        let n = grid.len();
        let err = solve_poisson_1d(
            &vec![0.0; n],
            &vec![1.0; n],
            &grid,
            PoissonBc::Neumann,
            PoissonBc::Neumann,
        )
        .unwrap_err();
        assert!(err.to_string().contains("singular"));
    }

    #[test]
    fn density_empty_well_and_ln2_point() {
        let grid = Grid1d::uniform(0.1, 29.9, 0.1).unwrap();
        let n = grid.len();
        let m = vec![0.037; n];
        let states = solve_schrodinger_1d(&vec![0.0; n], &m, &grid, 2).unwrap();

        // all subbands far above E_F: effectively zero density
        let d = compute_density(&states, states[0].energy - 50.0, 0.28, &m).unwrap();
        let sheet: f64 = d.iter().sum::<f64>() * grid.spacing;
        let single_scale = 0.037 / (2.0 * std::f64::consts::PI * HBAR2_OVER_2ME) * 1.0;
        assert!(sheet < 1e-4 * single_scale);

        // one subband exactly at E_F: occupation kT ln 2
        let one = &states[..1];
        let d = compute_density(one, states[0].energy, 0.01, &m).unwrap();
        let sheet: f64 = d.iter().sum::<f64>() * grid.spacing;
        let kt = thermal_energy(0.01);
        let expect = 0.037 / (2.0 * std::f64::consts::PI * HBAR2_OVER_2ME) * kt * 2.0_f64.ln();
        assert!((sheet - expect).abs() / expect < 1e-6, "{sheet} vs {expect}");
    }

    #[test]
    fn density_degenerate_limit_matches_measured_sheet() {
        // E_F - E_1 = 14.5 meV at 280 mK should give ~2.24e11 cm^-2.
        let grid = Grid1d::uniform(0.1, 29.9, 0.1).unwrap();
        let n = grid.len();
        let m = vec![0.037; n];
        let states = solve_schrodinger_1d(&vec![0.0; n], &m, &grid, 1).unwrap();
        let d = compute_density(&states, states[0].energy + 14.5, 0.28, &m).unwrap();
        let sheet_cm2: f64 = d.iter().sum::<f64>() * grid.spacing * 1e14; // nm^-2 -> cm^-2
        assert!((sheet_cm2 - 2.24e11).abs() / 2.24e11 < 2e-3, "{sheet_cm2:.3e}");
    }

    #[test]
    fn undoped_stack_stays_empty() {
        let mut wafer = default_wafer();
        for layer in &mut wafer.layers {
            layer.doping_per_nm3 = 0.0;
        }
        let res = self_consistent_band(&wafer, 0.28, 0.5, 1e-6).unwrap();
        assert!(res.band.sheet_density < 1e12, "sheet {:.3e} m^-2", res.band.sheet_density);
        // the well region band edge stays above the Fermi level
        let (top, bottom) = wafer.layer_span(4);
        for (i, &x) in res.band.grid.positions.iter().enumerate() {
            if x > top && x < bottom {
                assert!(res.band.cb_edge[i] > 0.0);
            }
        }
    }
}
