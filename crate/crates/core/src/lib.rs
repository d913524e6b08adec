//! Numerics for measurement-based computation on ground states of the
//! one-dimensional cluster phase.

#![no_std]

extern crate alloc;

pub mod channel;
pub mod curve;
pub mod dense;
pub mod dmrg;
pub mod error;
pub mod ground_state;
pub mod lanczos;
mod linalg;
pub mod mpo;
pub mod mps;
pub mod oracle;
pub mod pauli;
pub mod string_order;

pub use error::{Error, Result};
