//! Circuit-level simulation of quantum LDPC memories under mixed Pauli and
//! heralded-erasure noise.
//!
//! The pipeline runs code construction ([`codes`]), memory-circuit synthesis
//! ([`circuit`]), noise attachment ([`noise`]), bit-parallel sampling
//! ([`sim`]), detector-error-model decoding with erasure-aware BP+OSD
//! ([`decoder`]) and statistics ([`harness`]).

pub mod circuit;
pub mod codes;
pub mod config;
pub mod decoder;
pub mod error;
pub mod gf2;
pub mod harness;
pub mod noise;
pub mod sim;

pub use error::{Error, Result};
