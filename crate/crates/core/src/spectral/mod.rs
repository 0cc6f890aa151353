//! Periodic grid, Fourier transforms, Green's-function convolutions and
//! Littlewood–Paley machinery.

mod field;
mod green;
mod grid;
mod littlewood_paley;
mod transform;

pub use field::Field;
pub use grid::{make_grid, GridSpec};
pub use littlewood_paley::{build_partition, DyadicPartition, DEFAULT_SMOOTHING};
pub use transform::{Interpolant, Spectral};
pub use rustfft::num_complex::Complex64;
