//! Computational toolkit for difference sets avoiding intersective polynomial
//! images: exact polynomial algebra, p-adic root certificates, auxiliary
//! polynomial families, the derivative-root sieve, sieved exponential sums,
//! a discrete circle method over `Z_N`, and a difference-free set workbench.
//!
//! Every module is usable on its own; `selftest` bundles the acceptance
//! criteria so the CLI and the integration tests run the same checks.

pub mod arith;
pub mod auxiliary;
pub mod circle;
pub mod error;
pub mod expsum;
pub mod padic;
pub mod poly;
pub mod selftest;
pub mod setio;
pub mod setlab;
pub mod sieve;
mod bigjson;

pub use error::{Error, Result};
pub use poly::IntPolynomial;
