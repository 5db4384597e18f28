//! Physical constants in the repo-wide unit convention.
//!
//! Lengths in nm, energies in meV, magnetic fields in T, temperatures in K,
//! conductances in units of the conductance quantum G0 = 2e^2/h. Everything
//! that needs a unit conversion goes through the constants below; no module
//! re-derives them locally.

/// hbar^2 / (2 m_e) in meV nm^2 (the classic 3.81 eV A^2).
pub const HBAR2_OVER_2ME: f64 = 38.0998212;

/// Boltzmann constant in meV / K.
pub const KB: f64 = 8.617333262e-2;

/// Magnetic flux quantum h/e in T nm^2.
pub const PHI0: f64 = 4135.667696;

/// Vacuum permittivity in e / (V nm).
pub const EPS0: f64 = 5.526349406e-2;

/// Energy picked up by charge e across 1 V, in meV.
pub const MEV_PER_EV: f64 = 1000.0;

/// hbar / m_e in m^2/s (used to convert wavevectors to velocities).
pub const HBAR_OVER_ME: f64 = 1.15767636e-4;

/// hbar in meV s.
pub const HBAR_MEV_S: f64 = 6.582119569e-13;

/// Convert a sheet density from m^-2 to nm^-2.
pub const M2_TO_NM2: f64 = 1e-18;

/// Thermal energy k_B T in meV.
pub fn thermal_energy(temperature_k: f64) -> f64 {
    KB * temperature_k
}

/// Peierls phase picked up around one a x a plaquette at field b (rad).
pub fn peierls_phase_per_plaquette(b_tesla: f64, a_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * b_tesla * a_nm * a_nm / PHI0
}
