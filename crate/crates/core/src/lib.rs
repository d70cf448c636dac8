//! Numerical core for zero-noise-extrapolation studies on small noisy
//! quantum circuits.
//!
//! The crate is `no_std` and only needs an allocator. Everything touching
//! files, threads or the command line lives in the companion `zne-lab`
//! crate.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod baseline;
pub mod circuit;
pub mod error;
pub mod math;
pub mod mitigation;
pub mod noise;
pub mod pauli;
pub mod rng;
pub mod sim;
pub mod topology;

pub use error::{Error, Result};
