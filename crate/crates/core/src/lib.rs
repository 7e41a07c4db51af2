//! Numerical laboratory for long-wave metastability in 2D Hamiltonian
//! lattices: exact lattice dynamics, the resonant normal-form PDEs, and the
//! bridge that measures how well the latter approximate the former.

pub mod bridge;
pub mod error;
pub mod experiment;
pub mod lattice;
pub mod normal_form;
pub mod spectral;

pub use error::{Error, Result};
