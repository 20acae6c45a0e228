use crate::argon2m::{Block, BLOCK_BYTES};
use crate::merkle::{Digest16, OpeningPath};

use super::verifier::RejectReason;
use super::PowParams;

pub const MAGIC: &[u8; 4] = b"MTP2";
pub const VERSION: u8 = 1;
/// Header bytes excluding the challenge itself.
pub const HEADER_FIXED_LEN: usize = 4 + 1 + 8 + 4 + 1 + 1 + 4 + 16 + 8;

/// One of the `L` openings: the two inputs of `X[i_j]` and three Merkle paths.
/// `X[i_j]` itself is not transmitted; the verifier recomputes it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProofEntry {
    pub index: u64,
    pub phi: u64,
    pub block_prev: Block,
    pub block_ref: Block,
    pub path_prev: OpeningPath,
    pub path_ref: OpeningPath,
    pub path_cur: OpeningPath,
}

/// `(I, Φ, N, Z)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Proof {
    pub challenge: Vec<u8>,
    pub root: Digest16,
    pub nonce: u64,
    pub entries: Vec<ProofEntry>,
}

/// Encoded size of a proof.
pub fn proof_size(params: &PowParams, challenge_len: usize) -> usize {
    let path = OpeningPath::encoded_len(params.depth());
    HEADER_FIXED_LEN + challenge_len + params.length() as usize * (16 + 2 * BLOCK_BYTES + 3 * path)
}

impl Proof {
    pub fn to_bytes(&self, params: &PowParams) -> Vec<u8> {
        let mem = params.mem();
        let mut out = Vec::with_capacity(proof_size(params, self.challenge.len()));
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&mem.blocks().to_le_bytes());
        out.extend_from_slice(&mem.lanes().to_le_bytes());
        out.push(params.length());
        out.push(params.difficulty());
        out.extend_from_slice(&(self.challenge.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.challenge);
        out.extend_from_slice(&self.root.0);
        out.extend_from_slice(&self.nonce.to_le_bytes());
        for e in &self.entries {
            out.extend_from_slice(&e.index.to_le_bytes());
            out.extend_from_slice(&e.phi.to_le_bytes());
            out.extend_from_slice(&e.block_prev.to_bytes());
            out.extend_from_slice(&e.block_ref.to_bytes());
            e.path_prev.write_to(&mut out);
            e.path_ref.write_to(&mut out);
            e.path_cur.write_to(&mut out);
        }
        out
    }

    /// Parses a proof encoded for `params`. Any deviation from the format,
    /// including a header that names different parameters, is `Malformed`.
    pub fn from_bytes(bytes: &[u8], params: &PowParams) -> Result<Self, RejectReason> {
        let mut r = Reader(bytes);
        if r.take(4)? != MAGIC {
            return Err(malformed("bad magic"));
        }
        if r.u8()? != VERSION {
            return Err(malformed("unsupported version"));
        }
        let mem = params.mem();
        let (blocks, lanes, length, difficulty) = (r.u64()?, r.u32()?, r.u8()?, r.u8()?);
        if (blocks, lanes, length, difficulty)
            != (mem.blocks(), mem.lanes(), params.length(), params.difficulty())
        {
            return Err(malformed(format!(
                "proof is for T={blocks} p={lanes} L={length} d={difficulty}, expected T={} p={} L={} d={}",
                mem.blocks(),
                mem.lanes(),
                params.length(),
                params.difficulty()
            )));
        }
        let challenge_len = r.u32()? as usize;
        let challenge = r.take(challenge_len)?.to_vec();
        let root = Digest16(r.take(16)?.try_into().unwrap());
        let nonce = r.u64()?;
        let depth = params.depth();
        let mut entries = Vec::with_capacity(length as usize);
        for _ in 0..length {
            let index = r.u64()?;
            let phi = r.u64()?;
            let block_prev = Block::from_slice(r.take(BLOCK_BYTES)?).unwrap();
            let block_ref = Block::from_slice(r.take(BLOCK_BYTES)?).unwrap();
            let path_prev = r.path(depth)?;
            let path_ref = r.path(depth)?;
            let path_cur = r.path(depth)?;
            entries.push(ProofEntry { index, phi, block_prev, block_ref, path_prev, path_ref, path_cur });
        }
        if !r.0.is_empty() {
            return Err(malformed(format!("{} trailing bytes", r.0.len())));
        }
        Ok(Self { challenge, root, nonce, entries })
    }
}

fn malformed(msg: impl Into<String>) -> RejectReason {
    RejectReason::Malformed(msg.into())
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], RejectReason> {
        if self.0.len() < n {
            return Err(malformed("truncated"));
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, RejectReason> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, RejectReason> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, RejectReason> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn path(&mut self, depth: usize) -> Result<OpeningPath, RejectReason> {
        let (path, rest) = OpeningPath::read_from(self.0, depth).ok_or_else(|| malformed("truncated"))?;
        self.0 = rest;
        Ok(path)
    }
}
