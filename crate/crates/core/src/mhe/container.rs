use crate::error::{Error, Result};

use super::{CipherId, HeaderMode, MheChunk, MheParams};

pub const CONTAINER_MAGIC: &[u8; 4] = b"MHE1";
pub const CONTAINER_VERSION: u8 = 1;

const MODE_SHARED: u8 = 0x01;
const FLAG_TAG: u8 = 0x40;
const FLAG_HASH_BLOCKS: u8 = 0x80;

/// A self-describing encrypted chunk, optionally followed by a 32-byte tag.
///
/// Layout (little-endian): magic, version, mode byte, `M` u64, `q` u32, `t`
/// u32, cipher id, `len(S)` u32, `S`, IV, ciphertext, key wrap, tag. The mode
/// byte holds the header mode in bit 0, tag presence in bit 6 and block
/// hashing in bit 7.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Container {
    pub params: MheParams,
    pub chunk: MheChunk,
    pub tag: Option<[u8; 32]>,
}

fn malformed<T>(msg: &str) -> Result<T> {
    Err(Error::InvalidArgument(format!("malformed container: {msg}")))
}

impl Container {
    pub fn write_to(&self, out: &mut Vec<u8>) {
        let p = &self.params;
        let mut mode = match p.header_mode {
            HeaderMode::PerChunk => 0,
            HeaderMode::Shared => MODE_SHARED,
        };
        if self.tag.is_some() {
            mode |= FLAG_TAG;
        }
        if p.hash_blocks {
            mode |= FLAG_HASH_BLOCKS;
        }
        out.extend_from_slice(CONTAINER_MAGIC);
        out.push(CONTAINER_VERSION);
        out.push(mode);
        out.extend_from_slice(&p.memory().to_le_bytes());
        out.extend_from_slice(&p.chunk_blocks().to_le_bytes());
        out.extend_from_slice(&p.passes().to_le_bytes());
        out.push(p.cipher as u8);
        out.extend_from_slice(&(self.chunk.assoc.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.chunk.assoc);
        out.extend_from_slice(&self.chunk.iv);
        out.extend_from_slice(&self.chunk.body);
        out.extend_from_slice(&self.chunk.key_wrap);
        if let Some(tag) = &self.tag {
            out.extend_from_slice(tag);
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out);
        out
    }

    /// Parses one container from the front of `bytes`, returning the rest.
    pub fn read_from(bytes: &[u8]) -> Result<(Self, &[u8])> {
        let mut r = bytes;
        let mut take = |n: usize| -> Result<&[u8]> {
            if r.len() < n {
                return malformed("truncated");
            }
            let (head, tail) = r.split_at(n);
            r = tail;
            Ok(head)
        };
        if take(4)? != CONTAINER_MAGIC {
            return malformed("bad magic");
        }
        if take(1)?[0] != CONTAINER_VERSION {
            return malformed("unsupported version");
        }
        let mode = take(1)?[0];
        if mode & !(MODE_SHARED | FLAG_TAG | FLAG_HASH_BLOCKS) != 0 {
            return malformed("unknown mode bits");
        }
        let memory = u64::from_le_bytes(take(8)?.try_into().unwrap());
        let q = u32::from_le_bytes(take(4)?.try_into().unwrap());
        let t = u32::from_le_bytes(take(4)?.try_into().unwrap());
        let Some(cipher) = CipherId::from_u8(take(1)?[0]) else {
            return malformed("unknown cipher");
        };
        let header_mode = if mode & MODE_SHARED != 0 { HeaderMode::Shared } else { HeaderMode::PerChunk };
        let mut params = MheParams::new(memory, q, t, header_mode)
            .map_err(|e| Error::InvalidArgument(format!("malformed container: {e}")))?;
        params.cipher = cipher;
        params.hash_blocks = mode & FLAG_HASH_BLOCKS != 0;
        let assoc_len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let assoc = take(assoc_len)?.to_vec();
        let iv = take(16)?.try_into().unwrap();
        let body = take(params.chunk_bytes())?.to_vec();
        let key_wrap = take(32)?.try_into().unwrap();
        let tag = if mode & FLAG_TAG != 0 { Some(take(32)?.try_into().unwrap()) } else { None };
        Ok((Self { params, chunk: MheChunk { assoc, iv, body, key_wrap }, tag }, r))
    }
}
