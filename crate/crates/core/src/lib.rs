//! Desk-scale numerics for the free energy of the dilute two-dimensional Bose gas.
//!
//! The crate is organised bottom-up:
//!
//! - [`special_fns`]: dilogarithm and guarded logarithms
//! - [`quadrature`]: adaptive Gauss–Kronrod integration
//! - [`ideal_gas`]: closed-form thermodynamics of the free gas
//! - [`scattering`]: radial potentials and their scattering length
//! - [`surgery`]: range cutoff and integral capping of potentials
//! - [`dyson_kernel`]: soft potentials, torus fields and discrete operator inequalities
//! - [`filling_holes`]: shallow-well Neumann bounds
//! - [`free_energy`]: critical data, the two-term lower bound and its error budget
//! - [`quantum_toy`]: truncated Fock spaces, coherent states and entropy inequalities
//! - [`report`]: configuration parsing, parameter sweeps and report rendering

pub mod dyson_kernel;
pub mod error;
pub mod filling_holes;
pub mod free_energy;
pub mod ideal_gas;
pub mod linalg;
pub mod quadrature;
pub mod quantum_toy;
pub mod report;
pub mod scattering;
pub mod special_fns;
pub mod surgery;

pub use error::{Error, Result};
