//! Closed-form transport models: saddle-point QPC transmissions, BTK
//! interface coefficients, the Beenakker NS conductance formula, incoherent
//! NSN series composition and thermal smearing.
//!
//! These serve both as the fast model for gate sweeps and as independent
//! oracles for the lattice scattering solver. Formulas follow
//! Blonder-Tinkham-Klapwijk, Phys. Rev. B 25, 4515 (1982) and Beenakker,
//! Phys. Rev. B 46, 12841 (1992). Conductances are in units of G0 = 2e^2/h.

use crate::error::{require_positive, Error, Result};
use crate::units;

/// Per-mode transmission probabilities of a constriction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransmissionSet {
    pub t_n: Vec<f64>,
}

impl TransmissionSet {
    pub fn new(t_n: Vec<f64>) -> Result<Self> {
        for (n, &t) in t_n.iter().enumerate() {
            if !(0.0..=1.0).contains(&t) || !t.is_finite() {
                return Err(Error::domain(
                    "T_n",
                    format!("transmission {n} out of [0,1]: {t}"),
                ));
            }
        }
        Ok(TransmissionSet { t_n })
    }
}

/// BTK scattering probabilities at energy E for one interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BtkCoeffs {
    /// Andreev reflection probability.
    pub a: f64,
    /// Normal reflection probability.
    pub b: f64,
    /// Quasiparticle transmission without branch crossing.
    pub c: f64,
    /// Quasiparticle transmission with branch crossing.
    pub d: f64,
}

/// Transmissions of a saddle-point constriction.
///
/// T_n = 1 / (1 + exp(-2 pi (E_F - V0 - hw_y (n + 1/2)) / hw_x)),
/// the standard parabolic-saddle result; energies in meV.
pub fn saddle_transmissions(
    e_f: f64,
    v0: f64,
    hbar_omega_x: f64,
    hbar_omega_y: f64,
    n_modes: usize,
) -> Result<TransmissionSet> {
    require_positive("hbar_omega_x", hbar_omega_x)?;
    require_positive("hbar_omega_y", hbar_omega_y)?;
    let t_n = (0..n_modes)
        .map(|n| {
            let eps = e_f - v0 - hbar_omega_y * (n as f64 + 0.5);
            logistic(2.0 * std::f64::consts::PI * eps / hbar_omega_x)
        })
        .collect();
    Ok(TransmissionSet { t_n })
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Landauer conductance G/G0 = sum_n T_n of a normal constriction.
pub fn normal_conductance(t: &TransmissionSet) -> f64 {
    t.t_n.iter().sum()
}

/// BTK reflection/transmission probabilities of an NS interface with a
/// delta barrier of strength Z, evaluated at quasiparticle energy E >= 0.
///
/// At E = Delta the sub-gap and above-gap branches agree (A = 1 for any Z);
/// the sub-gap expression is used there.
pub fn btk_coefficients(e: f64, delta: f64, z: f64) -> Result<BtkCoeffs> {
    require_positive("Delta", delta)?;
    if e < 0.0 {
        return Err(Error::domain("E", format!("E must be >= 0, got {e}")));
    }
    if z < 0.0 {
        return Err(Error::domain("Z", format!("Z must be >= 0, got {z}")));
    }
    let z2 = z * z;
    if e <= delta {
        let denom = e * e + (delta * delta - e * e) * (1.0 + 2.0 * z2).powi(2);
        let a = delta * delta / denom;
        Ok(BtkCoeffs { a, b: 1.0 - a, c: 0.0, d: 0.0 })
    } else {
        let u2 = 0.5 * (1.0 + (e * e - delta * delta).sqrt() / e);
        let v2 = 1.0 - u2;
        let w = u2 - v2;
        let gamma = u2 + z2 * w;
        let g2 = gamma * gamma;
        Ok(BtkCoeffs {
            a: u2 * v2 / g2,
            b: w * w * z2 * (1.0 + z2) / g2,
            c: u2 * w * (1.0 + z2) / g2,
            d: v2 * w * z2 / g2,
        })
    }
}

/// Sub-gap NS conductance G/G0 = sum_n 2 T_n^2 / (2 - T_n)^2 for a junction
/// with one transparent superconducting interface.
pub fn beenakker_ns_conductance(t: &TransmissionSet) -> f64 {
    t.t_n.iter().map(|&t| 2.0 * t * t / (2.0 - t).powi(2)).sum()
}

/// Incoherent series composition of two junction conductances (same units
/// in, same units out). Zero if either side is pinched off.
pub fn series_nsn(g_left: f64, g_right: f64) -> f64 {
    if g_left <= 0.0 || g_right <= 0.0 {
        return 0.0;
    }
    g_left * g_right / (g_left + g_right)
}

/// Composes a mode transmission with an interface barrier of strength Z as
/// incoherent scatterers in series: 1/T = 1/T_mode + 1/T_Z - 1 with
/// T_Z = 1/(1+Z^2).
pub fn compose_with_barrier(t_mode: f64, z: f64) -> f64 {
    if t_mode <= 0.0 {
        return 0.0;
    }
    let t_z = 1.0 / (1.0 + z * z);
    1.0 / (1.0 / t_mode + 1.0 / t_z - 1.0)
}

/// Fraction of the thermal transport window lying inside the gap:
/// integral of (-df/dE) over |E| < Delta, which is tanh(Delta / 2kT).
/// Used to interpolate between the sub-gap and normal conductances of an
/// interface when the pair potential closes with field. At T = 0 this is a
/// step: 1 for any Delta > 0.
pub fn subgap_weight(delta: f64, temperature_k: f64) -> f64 {
    if delta <= 0.0 {
        return 0.0;
    }
    if temperature_k <= 0.0 {
        return 1.0;
    }
    (delta / (2.0 * units::thermal_energy(temperature_k))).tanh()
}

/// Thermally smears a sampled conductance G(E) with the Fermi window
/// (-df/dE) at temperature T. Samples must span at least +-10 kT around
/// E = 0; the kernel is renormalized to unity on the sample window.
pub fn thermal_broaden(energies_mev: &[f64], g_of_e: &[f64], temperature_k: f64) -> Result<f64> {
    require_positive("T", temperature_k)?;
    if energies_mev.len() != g_of_e.len() || energies_mev.len() < 3 {
        return Err(Error::domain("G_of_E", "need >= 3 matching samples"));
    }
    let kt = units::thermal_energy(temperature_k);
    let lo = energies_mev.first().copied().unwrap();
    let hi = energies_mev.last().copied().unwrap();
    if lo > -10.0 * kt || hi < 10.0 * kt {
        return Err(Error::domain(
            "window",
            format!("samples must span +-10 kT = {:.4} meV, got [{lo}, {hi}]", 10.0 * kt),
        ));
    }
    // -df/dE = 1/(4kT cosh^2(E/2kT))
    let kernel: Vec<f64> = energies_mev
        .iter()
        .map(|&e| {
            let x = e / (2.0 * kt);
            1.0 / (4.0 * kt * x.cosh().powi(2))
        })
        .collect();
    let mut norm = 0.0;
    let mut value = 0.0;
    for i in 1..energies_mev.len() {
        let de = energies_mev[i] - energies_mev[i - 1];
        if de <= 0.0 {
            return Err(Error::domain("G_of_E", "energies must be strictly increasing"));
        }
        norm += 0.5 * de * (kernel[i] + kernel[i - 1]);
        value += 0.5 * de * (kernel[i] * g_of_e[i] + kernel[i - 1] * g_of_e[i - 1]);
    }
    Ok(value / norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saddle_midpoint_and_tail() {
        // E_F exactly at a subband threshold: T = 1/2.
        let t = saddle_transmissions(5.0, 0.0, 1.0, 10.0, 1).unwrap();
        assert!((t.t_n[0] - 0.5).abs() < 1e-14);
        // One hw_x above threshold.
        let t = saddle_transmissions(6.0, 0.0, 1.0, 10.0, 1).unwrap();
        assert!((t.t_n[0] - 0.99813).abs() < 1e-5, "{}", t.t_n[0]);
        // Deep pinch-off.
        let t = saddle_transmissions(-50.0, 0.0, 1.0, 10.0, 3).unwrap();
        assert!(t.t_n.iter().all(|&x| x < 1e-6));
    }

    #[test]
    fn landauer_sums() {
        let t = TransmissionSet::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(normal_conductance(&t), 3.0);
        assert_eq!(normal_conductance(&TransmissionSet::default()), 0.0);
        let t = TransmissionSet::new(vec![0.5]).unwrap();
        assert_eq!(normal_conductance(&t), 0.5);
    }

    #[test]
    fn btk_reference_points() {
        let c = btk_coefficients(0.0, 1.0, 0.0).unwrap();
        assert!((c.a - 1.0).abs() < 1e-14 && c.b.abs() < 1e-14);
        let c = btk_coefficients(0.0, 1.0, 1.0).unwrap();
        assert!((c.a - 1.0 / 9.0).abs() < 1e-14, "{}", c.a);
        let c = btk_coefficients(1e6, 1.0, 0.0).unwrap();
        assert!(c.a < 1e-10 && (c.c - 1.0).abs() < 1e-5);
    }

    #[test]
    fn btk_continuous_at_the_gap_edge() {
        for &z in &[0.0, 0.7, 2.5] {
            let at_gap = btk_coefficients(1.0, 1.0, z).unwrap();
            assert!((at_gap.a - 1.0).abs() < 1e-12, "A at gap edge for Z={z}");
            // A -> 1 from both sides (the approach from above goes like
            // sqrt(E - Delta), hence the looser spacing here)
            let below = btk_coefficients(1.0 - 1e-12, 1.0, z).unwrap();
            let above = btk_coefficients(1.0 + 1e-12, 1.0, z).unwrap();
            assert!((below.a - 1.0).abs() < 1e-4, "below: {}", below.a);
            assert!((above.a - 1.0).abs() < 1e-4, "above: {}", above.a);
        }
    }

    #[test]
    fn beenakker_reference_points() {
        let one = TransmissionSet::new(vec![1.0]).unwrap();
        assert_eq!(beenakker_ns_conductance(&one), 2.0);
        let two = TransmissionSet::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(beenakker_ns_conductance(&two), 4.0);
        let half = TransmissionSet::new(vec![0.5]).unwrap();
        assert!((beenakker_ns_conductance(&half) - 2.0 * 0.25 / 2.25).abs() < 1e-15);
    }

    #[test]
    fn series_reference_points() {
        assert_eq!(series_nsn(2.0, 2.0), 1.0);
        assert!((series_nsn(1.3, 1e12) - 1.3).abs() < 1e-9);
        assert_eq!(series_nsn(0.0, 5.0), 0.0);
    }

    #[test]
    fn barrier_composition_matches_btk_on_open_modes() {
        // A fully open mode behind a barrier Z carries T = 1/(1+Z^2); its
        // sub-gap conductance must equal 2 A(0, Z).
        for &z in &[0.0, 0.3, 1.0, 3.0] {
            let t = compose_with_barrier(1.0, z);
            assert!((t - 1.0 / (1.0 + z * z)).abs() < 1e-14);
            let g = beenakker_ns_conductance(&TransmissionSet::new(vec![t]).unwrap());
            let a = btk_coefficients(0.0, 1.0, z).unwrap().a;
            assert!((g - 2.0 * a).abs() < 1e-13, "Z={z}");
        }
    }

    #[test]
    fn thermal_kernel_properties() {
        let n = 4001;
        let kt = units::thermal_energy(0.28);
        let es: Vec<f64> = (0..n).map(|i| -12.0 * kt + 24.0 * kt * i as f64 / (n - 1) as f64).collect();
        // Constant in, constant out.
        let g: Vec<f64> = vec![0.73; n];
        let out = thermal_broaden(&es, &g, 0.28).unwrap();
        assert!((out - 0.73).abs() < 1e-9);
        // A step centered at zero averages to half its heights' sum.
        let g: Vec<f64> = es.iter().map(|&e| if e < 0.0 { 2.0 } else { 1.0 }).collect();
        let out = thermal_broaden(&es, &g, 0.28).unwrap();
        assert!((out - 1.5).abs() < 1e-3, "{out}");
        // Window too narrow is a domain error.
        let es: Vec<f64> = (0..101).map(|i| -5.0 * kt + 10.0 * kt * i as f64 / 100.0).collect();
        let g = vec![1.0; 101];
        assert!(thermal_broaden(&es, &g, 0.28).is_err());
    }

    #[test]
    fn subgap_weight_limits() {
        assert_eq!(subgap_weight(0.0, 0.28), 0.0);
        assert_eq!(subgap_weight(1.4, 0.0), 1.0);
        assert!(subgap_weight(1.4, 0.28) > 1.0 - 1e-12);
        assert!(subgap_weight(0.001, 0.28) < 0.03);
    }
}
