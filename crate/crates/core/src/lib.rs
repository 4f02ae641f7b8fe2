#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod evolve;
pub mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod lp;
pub mod mass;
pub mod morawetz;
pub mod norms;
pub mod scale;
pub mod spectral;
pub mod verify;
pub mod weight;

pub use error::{Error, Result};
pub use field::{ComplexField, RealField, Spectrum};
pub use grid::GridSpec;
