//! Random walks on affine buildings and on lattices.
//!
//! The crate is `no_std` with `alloc`. It covers reduced root systems and
//! their Weyl groups, Macdonald spherical functions, exact transition
//! probabilities (torus quadrature, Macdonald expansion, convolution), the
//! rate function and local limit estimates, Green function asymptotics and
//! the combinatorial flow lemma used for vertex counting.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod building;
pub mod comb;
pub mod error;
pub mod exppoly;
pub mod green;
pub mod hull;
pub mod lattice;
pub mod numeric;
pub mod rate;
pub mod report;
pub mod rootsys;
pub mod snf;
pub mod sphfun;
pub mod torus;
pub mod tree;
pub mod walk;

pub use error::{Error, Result};
pub use exppoly::{ExpPoly, LatticePoint};
pub use num_complex::Complex64;
