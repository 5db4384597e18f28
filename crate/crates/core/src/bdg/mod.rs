//! Bogoliubov-de Gennes tight-binding scattering: lattice assembly, normal
//! leads and the recursive Green's function solve.

pub mod lattice;
pub mod lead;
pub mod rgf;

pub use lattice::{build_bdg_lattice, delta_vs_field, ns_strip, uniform_strip, BdgLattice, Disorder, LatticeOptions};
pub use lead::{lead_channels, lead_self_energy, LeadModes, Side};
pub use rgf::{ns_conductance, reflection_matrix, solve, solve_with, ReflectionBlocks, ScatteringSolution};
