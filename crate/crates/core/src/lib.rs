//! Simulation and analysis toolkit for split-gate superconducting quantum
//! point contacts in a semiconductor 2DEG.
//!
//! The crate covers the full chain from heterostructure to transport:
//! a self-consistent Schrodinger-Poisson band solver along the growth
//! direction, an analytic split-gate potential at the 2DEG plane, closed
//! form QPC/BTK/NS transport models, a Bogoliubov-de Gennes tight-binding
//! scattering solver with Peierls phases, and sweep orchestration with
//! plateau metrics extraction.

pub mod analytic;
pub mod band;
pub mod bdg;
pub mod config;
pub mod error;
pub mod gates;
pub mod io;
pub mod material;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
