//! Data-dependent memory filler: a modified Argon2d whose compression function
//! binds every block to its position and to the challenge.

mod block;
mod compress;
mod fill;
mod params;

pub use block::{Block, BLOCK_BYTES, BLOCK_WORDS};
pub use compress::{compress, compress_at, permute_p};
pub use fill::{
    expand_first_blocks, fill_memory, fill_memory_with, initial_digest, phi_index, FillOptions, MemoryArray,
    MAX_CHALLENGE_LEN,
};
pub use params::{MemParams, Position, SLICES};

/// `H0`, the 32-byte digest every compression call is keyed with.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ChallengeDigest(pub [u8; 32]);

impl ChallengeDigest {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}
