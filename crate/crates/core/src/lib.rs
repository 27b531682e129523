//! Multidimensional Jacobi sequences of moment functionals.
//!
//! Forward direction: moments → orthogonal gradation → creation / preservation /
//! annihilation matrices → Jacobi sequence `(Gω_n, α_{j|n})`. Converse
//! direction: Jacobi sequence → symmetric interacting Fock space → moments as
//! vacuum expectations of words in the field operators.

pub mod cap;
pub mod cli;
pub mod error;
pub mod fock;
pub mod gradation;
pub mod jacobi;
pub mod linalg;
pub mod mindex;
pub mod moments;
pub mod poly;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Backend, Rational, Scalar};
