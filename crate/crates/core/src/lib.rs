//! Hyperelastic energies on planar domains with kinematic constraints on many
//! small perforations.
//!
//! The crate solves the perforated problems directly on graded meshes,
//! computes the capacity-type cell problems that give the relaxed constraint
//! densities, and minimizes the relaxed limit functionals so the two can be
//! compared along an `eps` ladder.

pub mod capacity;
pub mod config;
pub mod constraints;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod io;
pub mod materials;
pub mod minimize;

pub use error::{Error, Result};
