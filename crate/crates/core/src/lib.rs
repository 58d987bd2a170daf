//! Numerical laboratory for local qubit triples: the operator algebra, the
//! six-element super-operator monoid, equation-of-motion classification, a
//! 1+1-dimensional lattice dynamics sandbox and entanglement diagnostics.

pub mod classify;
pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod matrix;
pub mod polynomial;
pub mod report;
pub mod state;
pub mod superop;
pub mod triple;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::CMatrix;
