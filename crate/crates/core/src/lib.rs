//! Spectral laboratory for the two- and three-dimensional non-resistive MHD
//! system on periodic boxes.

pub mod error;
pub mod experiments;
pub mod families;
pub mod lp;
pub mod quad;
mod reduce;
pub mod scalar;
pub mod smooth;
pub mod solver;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use solver::{MhdState, SolveConfig, Trajectory};
pub use spectral::{Field, Grid, VecField};

pub type Grid64 = Grid<f64>;
pub type Field64 = Field<f64>;
pub type VecField64 = VecField<f64>;
pub type MhdState64 = MhdState<f64>;
pub type Grid32 = Grid<f32>;
pub type Field32 = Field<f32>;
pub type VecField32 = VecField<f32>;
pub type MhdState32 = MhdState<f32>;
