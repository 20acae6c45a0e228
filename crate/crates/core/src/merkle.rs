//! Merkle hash tree over memory blocks, hashed with the reduced-round `G`.

use rayon::prelude::*;

use crate::argon2m::{Block, MemoryArray};
use crate::blake2b;
use crate::error::{invalid, Result};

const LEAF_PREFIX: u8 = 0x00;
const NODE_PREFIX: u8 = 0x01;
const PAR_THRESHOLD: usize = 1 << 10;

/// 128-bit output of `G`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Digest16(pub [u8; 16]);

impl Digest16 {
    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }
}

/// `G`: 4-round Blake2b with a 16-byte digest.
pub fn g_hash(data: &[u8]) -> Digest16 {
    Digest16(blake2b::tree_hash(&[data]))
}

pub fn leaf_hash(block: &Block) -> Digest16 {
    Digest16(blake2b::tree_hash(&[&[LEAF_PREFIX], &block.to_bytes()]))
}

pub fn node_hash(left: &Digest16, right: &Digest16) -> Digest16 {
    Digest16(blake2b::tree_hash(&[&[NODE_PREFIX], &left.0, &right.0]))
}

/// A fully materialised tree in heap layout: node `k` has children `2k+1` and
/// `2k+2`, leaves occupy `T-1..2T-1`.
#[derive(Clone)]
pub struct MerkleTree {
    leaf_count: u64,
    nodes: Vec<Digest16>,
}

/// Sibling hashes from a leaf up to (excluding) the root.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OpeningPath {
    pub index: u64,
    pub siblings: Vec<Digest16>,
}

impl MerkleTree {
    pub fn build(memory: &MemoryArray) -> Result<Self> {
        Self::from_blocks(memory.blocks())
    }

    pub fn from_blocks(blocks: &[Block]) -> Result<Self> {
        let n = blocks.len();
        if !n.is_power_of_two() {
            return invalid(format!("leaf count {n} is not a power of two"));
        }
        let mut nodes = vec![Digest16::default(); 2 * n - 1];
        let leaves = &mut nodes[n - 1..];
        if n >= PAR_THRESHOLD {
            leaves.par_iter_mut().zip(blocks.par_iter()).for_each(|(d, b)| *d = leaf_hash(b));
        } else {
            leaves.iter_mut().zip(blocks).for_each(|(d, b)| *d = leaf_hash(b));
        }
        // Level with `width` nodes starts at `width - 1`; its children follow at `2*width - 1`.
        let mut width = n / 2;
        while width >= 1 {
            let (upper, lower) = nodes.split_at_mut(2 * width - 1);
            let level = &mut upper[width - 1..];
            let children = &lower[..2 * width];
            let hash = |(k, d): (usize, &mut Digest16)| *d = node_hash(&children[2 * k], &children[2 * k + 1]);
            if width >= PAR_THRESHOLD {
                level.par_iter_mut().enumerate().for_each(hash);
            } else {
                level.iter_mut().enumerate().for_each(hash);
            }
            width /= 2;
        }
        Ok(Self { leaf_count: n as u64, nodes })
    }

    /// `Φ`.
    pub fn root(&self) -> Digest16 {
        self.nodes[0]
    }

    pub fn leaf_count(&self) -> u64 {
        self.leaf_count
    }

    pub fn depth(&self) -> usize {
        self.leaf_count.trailing_zeros() as usize
    }

    pub fn open(&self, index: u64) -> Result<OpeningPath> {
        if index >= self.leaf_count {
            return invalid(format!("leaf {index} out of range 0..{}", self.leaf_count));
        }
        let mut k = (self.leaf_count - 1 + index) as usize;
        let mut siblings = Vec::with_capacity(self.depth());
        while k > 0 {
            let sibling = if k % 2 == 1 { k + 1 } else { k - 1 };
            siblings.push(self.nodes[sibling]);
            k = (k - 1) / 2;
        }
        Ok(OpeningPath { index, siblings })
    }

    /// Replaces one leaf and rehashes its path to the root.
    pub fn update_leaf(&mut self, index: u64, block: &Block) -> Result<()> {
        if index >= self.leaf_count {
            return invalid(format!("leaf {index} out of range 0..{}", self.leaf_count));
        }
        let mut k = (self.leaf_count - 1 + index) as usize;
        self.nodes[k] = leaf_hash(block);
        while k > 0 {
            k = (k - 1) / 2;
            self.nodes[k] = node_hash(&self.nodes[2 * k + 1], &self.nodes[2 * k + 2]);
        }
        Ok(())
    }
}

/// Checks that `block` sits at leaf `index` of a `leaf_count`-leaf tree with
/// root `root`. Any shape mismatch yields `false`.
pub fn verify_opening(root: &Digest16, index: u64, block: &Block, path: &OpeningPath, leaf_count: u64) -> bool {
    if !leaf_count.is_power_of_two()
        || path.index != index
        || index >= leaf_count
        || path.siblings.len() != leaf_count.trailing_zeros() as usize
    {
        return false;
    }
    let mut acc = leaf_hash(block);
    let mut pos = index;
    for sibling in &path.siblings {
        acc = if pos & 1 == 0 {
            node_hash(&acc, sibling)
        } else {
            node_hash(sibling, &acc)
        };
        pos >>= 1;
    }
    acc == *root
}

impl OpeningPath {
    pub fn encoded_len(depth: usize) -> usize {
        8 + 16 * depth
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.index.to_le_bytes());
        for s in &self.siblings {
            out.extend_from_slice(&s.0);
        }
    }

    /// Parses a path of `depth` siblings from the front of `bytes`.
    pub fn read_from(bytes: &[u8], depth: usize) -> Option<(Self, &[u8])> {
        let len = Self::encoded_len(depth);
        if bytes.len() < len {
            return None;
        }
        let index = u64::from_le_bytes(bytes[..8].try_into().unwrap());
        let siblings = bytes[8..len]
            .chunks_exact(16)
            .map(|c| Digest16(c.try_into().unwrap()))
            .collect();
        Some((Self { index, siblings }, &bytes[len..]))
    }
}
