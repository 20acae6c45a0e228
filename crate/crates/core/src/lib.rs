//! Egalitarian computing primitives: the MTP memory-hard proof-of-work, the MHE
//! memory-hard encryption scheme, and cost models for cheating provers.

pub mod argon2m;
pub mod blake2b;
pub mod costmodel;
pub mod error;
pub mod merkle;
pub mod mhe;
pub mod mtp;

pub use error::{Error, Result};
