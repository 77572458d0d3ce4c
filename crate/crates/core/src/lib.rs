//! Majorana stellar representation of pure spin-S states and symmetric
//! N-qubit states.
//!
//! A state is held as amplitudes in the |S,m> basis ([`SpinState`]), turned
//! into its Majorana polynomial and from there into a constellation of `2S`
//! stars on the sphere ([`stellar`]). The remaining modules compute
//! geometric quantities of the constellation and check them against direct
//! algebraic evaluations.

pub mod entanglement;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod harmonics;
pub mod linalg;
pub mod permanent;
#[cfg(test)]
mod properties;
pub mod spinstate;
pub mod stellar;

pub use error::{Error, Result};
pub use exec::Exec;
pub use num_complex::Complex64;
pub use spinstate::{make_state, Ladder, MajoranaPolynomial, SpinOperators, SpinState};
pub use stellar::{Constellation, Convention, ExtComplex, Star};
