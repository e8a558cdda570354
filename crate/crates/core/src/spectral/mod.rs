//! Periodic grids, Fourier transforms and spectral operators.

pub(crate) mod fft;
mod field;
mod grid;
pub mod mhdf;
pub mod ops;

pub use field::{Field, VecField};
pub use grid::Grid;
