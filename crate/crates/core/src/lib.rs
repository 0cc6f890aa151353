//! Pseudospectral laboratory for the sine-type modified Camassa–Holm equation
//! `m_t + [sin(u² − u_x²) m]_x = 0`, `m = u − u_xx`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod characteristics;
pub mod checks;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod picard;
pub mod scenario;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{Field, GridSpec, Spectral};
