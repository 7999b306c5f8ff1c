//! Spectral toolkit for the two-dimensional magnetic Schrödinger operator and
//! the Hartree dynamics of density matrices built on its Landau levels.

pub mod collapse;
pub mod density;
pub mod error;
pub mod grid;
pub mod hartree;
pub mod landau;
pub mod nufft;
pub mod pair_spectrum;
pub mod phase_space;
pub mod propagator;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
