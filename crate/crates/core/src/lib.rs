pub mod cli;
pub mod error;
pub mod fermion_shift;
pub mod markov_reduction;
pub mod partitions;
pub mod quantum_core;
pub mod spin_shift;

pub use error::{AlfError, Result};
