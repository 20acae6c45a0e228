use std::sync::Arc;

use crate::argon2m::{fill_memory_with, Block, ChallengeDigest, FillOptions, MemParams};
use crate::blake2b;
use crate::error::{invalid, Result};

use super::{HeaderMode, MheParams};

/// The password-derived part of the memory.
#[derive(Clone)]
pub struct MheHeader {
    params: MheParams,
    h0: ChallengeDigest,
    blocks: Arc<Vec<Block>>,
    assoc: Vec<u8>,
    k0: [u8; 32],
}

impl std::fmt::Debug for MheHeader {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MheHeader").field("blocks", &self.blocks.len()).finish_non_exhaustive()
    }
}

fn header_digest(password: &[u8], assoc: &[u8], params: &MheParams) -> ChallengeDigest {
    ChallengeDigest(blake2b::hash256(&[
        &(password.len() as u32).to_le_bytes(),
        password,
        &(assoc.len() as u32).to_le_bytes(),
        assoc,
        &params.memory().to_le_bytes(),
        &params.chunk_blocks().to_le_bytes(),
        &params.passes().to_le_bytes(),
    ]))
}

fn first_key(x0: &Block, assoc: &[u8], mode: HeaderMode) -> [u8; 32] {
    match mode {
        HeaderMode::PerChunk => blake2b::hash256(&[&x0.to_bytes()]),
        HeaderMode::Shared => blake2b::hash256(&[&x0.to_bytes(), assoc]),
    }
}

/// Fills the `M - q` header blocks from the password (and, per chunk, from the
/// associated data) and derives `K_0`.
pub fn init_header(password: &[u8], assoc: &[u8], params: &MheParams) -> Result<MheHeader> {
    init_header_with(password, assoc, params, None)
}

pub(crate) fn init_header_with(
    password: &[u8],
    assoc: &[u8],
    params: &MheParams,
    threads: Option<usize>,
) -> Result<MheHeader> {
    let fill_assoc = match params.header_mode {
        HeaderMode::PerChunk => assoc,
        HeaderMode::Shared => &[],
    };
    let h0 = header_digest(password, fill_assoc, params);
    let mem = header_geometry(params)?;
    let blocks = fill_memory_with(&h0, &mem, FillOptions { threads, replace: None })?.into_blocks();
    let k0 = first_key(blocks.last().unwrap(), assoc, params.header_mode);
    Ok(MheHeader { params: *params, h0, blocks: Arc::new(blocks), assoc: assoc.to_vec(), k0 })
}

pub(crate) fn header_geometry(params: &MheParams) -> Result<MemParams> {
    MemParams::new(params.header_blocks(), params.header_lanes(), params.passes())
}

impl MheHeader {
    /// Fills a header with an explicit worker count.
    pub fn fill(password: &[u8], assoc: &[u8], params: &MheParams, threads: Option<usize>) -> Result<Self> {
        init_header_with(password, assoc, params, threads)
    }

    /// Rebinds a shared header to another chunk's associated data without
    /// refilling it.
    pub fn for_assoc(&self, assoc: &[u8]) -> Result<Self> {
        if self.params.header_mode != HeaderMode::Shared {
            return invalid("only a shared header can serve several chunks");
        }
        Ok(Self {
            k0: first_key(self.x0(), assoc, HeaderMode::Shared),
            assoc: assoc.to_vec(),
            ..self.clone()
        })
    }

    pub fn params(&self) -> &MheParams {
        &self.params
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// `X_0`, the last header block.
    pub fn x0(&self) -> &Block {
        self.blocks.last().unwrap()
    }

    /// The associated data `K_0` is bound to.
    pub fn assoc(&self) -> &[u8] {
        &self.assoc
    }

    /// `K_0`.
    pub fn k0(&self) -> &[u8; 32] {
        &self.k0
    }

    pub(crate) fn digest(&self) -> &ChallengeDigest {
        &self.h0
    }
}
