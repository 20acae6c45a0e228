//! Memory-hard encryption: a password-derived header memory, a body generated
//! from the ciphertext, and a session key that is only recoverable after the
//! whole chunk has been processed.

mod audit;
mod chunk;
mod cipher;
mod container;
mod header;
mod tradeoff;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use audit::{delegation_resistance_audit, AuditReport, TraceEvent};
pub use chunk::{decrypt_chunk, decrypt_chunk_traced, encrypt_chunk, Decrypted};
pub use cipher::{BlockCipher, CipherId};
pub use container::{Container, CONTAINER_MAGIC, CONTAINER_VERSION};
pub use header::{init_header, MheHeader};
pub use tradeoff::{memory_saving_decrypt, TradeoffStats};

/// How the header memory is allocated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeaderMode {
    /// The header is filled from `(P, S)` for every chunk.
    PerChunk = 0,
    /// The header is filled from `P` alone and shared by all chunks; `S`
    /// enters through the first session key.
    Shared = 1,
}

/// Parameters of the scheme: `M` blocks of memory of which `q` form the body,
/// `t` passes over the header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MheParams {
    memory: u64,
    chunk_blocks: u32,
    passes: u32,
    pub cipher: CipherId,
    pub header_mode: HeaderMode,
    /// Hash every body block before it is encrypted, keeping the encrypted
    /// values distinct even if the compression function collides.
    pub hash_blocks: bool,
}

impl MheParams {
    /// `M > q ≥ 1`, `t ≥ 1`. The header size `M - q` must be a multiple of 4
    /// and at least 8 so that it can be laid out in slices.
    pub fn new(memory: u64, chunk_blocks: u32, passes: u32, header_mode: HeaderMode) -> Result<Self> {
        if chunk_blocks == 0 {
            return invalid("chunk length must be at least one block");
        }
        if memory <= chunk_blocks as u64 {
            return invalid(format!("memory of {memory} blocks does not exceed the chunk of {chunk_blocks}"));
        }
        if passes == 0 {
            return invalid("pass count must be at least 1");
        }
        let header = memory - chunk_blocks as u64;
        if header < 8 || !header.is_multiple_of(4) {
            return invalid(format!("header of {header} blocks must be a multiple of 4 and at least 8"));
        }
        Ok(Self {
            memory,
            chunk_blocks,
            passes,
            cipher: CipherId::Aes256,
            header_mode,
            hash_blocks: false,
        })
    }

    pub fn memory(&self) -> u64 {
        self.memory
    }

    pub fn chunk_blocks(&self) -> u32 {
        self.chunk_blocks
    }

    pub fn passes(&self) -> u32 {
        self.passes
    }

    pub fn header_blocks(&self) -> u64 {
        self.memory - self.chunk_blocks as u64
    }

    /// Plaintext bytes per chunk.
    pub fn chunk_bytes(&self) -> usize {
        self.chunk_blocks as usize * crate::argon2m::BLOCK_BYTES
    }

    /// Four lanes when the header divides evenly into them, otherwise one.
    pub fn header_lanes(&self) -> u32 {
        let h = self.header_blocks();
        if h.is_multiple_of(16) && h >= 32 {
            4
        } else {
            1
        }
    }
}

/// Per-chunk random values chosen at encryption.
#[derive(Clone, PartialEq, Eq)]
pub struct SessionKeys {
    /// `K_1`.
    pub k1: [u8; 32],
    /// Initial CBC chaining value.
    pub iv: [u8; 16],
}

impl SessionKeys {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut k1 = [0u8; 32];
        let mut iv = [0u8; 16];
        rng.fill_bytes(&mut k1);
        rng.fill_bytes(&mut iv);
        Self { k1, iv }
    }
}

impl std::fmt::Debug for SessionKeys {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SessionKeys(..)")
    }
}

/// One encrypted chunk: associated data, `q` ciphertext blocks and the wrapped
/// session key.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MheChunk {
    pub assoc: Vec<u8>,
    pub iv: [u8; 16],
    pub body: Vec<u8>,
    pub key_wrap: [u8; 32],
}
