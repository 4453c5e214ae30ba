//! Exact, desk-scale numerics for pseudorandom quantum states in the common
//! Haar state (CHS) model.
//!
//! The crate is organised bottom-up:
//!
//! - [`numkit`]: dense complex linear algebra over register-shaped systems
//!   (tensor products, partial trace/transpose, spectra, trace distance,
//!   fidelity).
//! - [`typespace`]: types, type states, symmetric projectors, exact Haar
//!   moments, prefix-collision predicates.
//! - [`pseudorandomness`]: the Pauli-Z PRS and PRFS generators, their exact
//!   hybrid density matrices, the disentangling identities and the rank attack.
//! - [`commitment`]: the SWAP-test commitment scheme, hiding and sum-binding.
//! - [`locc`]: collision distinguisher, partial-transpose norm chain and
//!   Kneser spectra.
//!
//! Register ordering is big-endian everywhere: register 0 is the most
//! significant digit of a flat index, and inside an `n`-qubit register qubit 0
//! is the most significant bit.

pub mod combinatorics;
pub mod commitment;
mod error;
pub mod locc;
pub mod numkit;
pub mod pseudorandomness;
pub mod rng;
pub mod typespace;

pub use error::{Error, Result};
pub use numkit::{Limits, Operator, RegisterShape, StateVector, C64};
pub use rng::{Estimate, Mode};
pub use typespace::{PrefixParams, TypeVector};
