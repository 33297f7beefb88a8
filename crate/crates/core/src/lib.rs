//! Phase-discontinuity design for planar metasurfaces.
//!
//! A collimated beam or a point source hits the plane `z = 1`, which carries
//! a phase `psi`; the generalized laws of reflection and refraction send
//! each ray into a new direction. Given the source intensity and a target
//! intensity on a spherical cap, the phase is found by solving a
//! Monge-Ampere equation with second boundary condition, here through
//! entropic optimal transport, and then checked by tracing rays.

pub mod error;
pub mod fields;
pub mod grid;
pub mod io;
pub mod optics;
pub mod problem;
pub mod region;
pub mod scenario;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
