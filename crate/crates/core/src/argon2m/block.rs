use std::fmt;
use std::ops::{BitXor, BitXorAssign};

/// Size of a memory block in bytes.
pub const BLOCK_BYTES: usize = 1024;
/// Size of a memory block in 64-bit words.
pub const BLOCK_WORDS: usize = BLOCK_BYTES / 8;

/// A 1 KiB memory block.
///
/// Stored as 128 little-endian 64-bit words. The compression function views it
/// as an 8x8 matrix of 16-byte registers; register `k` is words `2k, 2k+1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Block(pub [u64; BLOCK_WORDS]);

impl Block {
    pub const ZERO: Block = Block([0; BLOCK_WORDS]);

    pub fn from_bytes(bytes: &[u8; BLOCK_BYTES]) -> Self {
        let mut words = [0u64; BLOCK_WORDS];
        for (w, chunk) in words.iter_mut().zip(bytes.chunks_exact(8)) {
            *w = u64::from_le_bytes(chunk.try_into().unwrap());
        }
        Block(words)
    }

    /// Parses a block from a slice of exactly 1024 bytes.
    pub fn from_slice(bytes: &[u8]) -> Option<Self> {
        let arr: &[u8; BLOCK_BYTES] = bytes.try_into().ok()?;
        Some(Self::from_bytes(arr))
    }

    pub fn to_bytes(&self) -> [u8; BLOCK_BYTES] {
        let mut out = [0u8; BLOCK_BYTES];
        self.write_bytes(&mut out);
        out
    }

    pub fn write_bytes(&self, out: &mut [u8]) {
        for (chunk, w) in out[..BLOCK_BYTES].chunks_exact_mut(8).zip(self.0.iter()) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
    }

    pub fn words(&self) -> &[u64; BLOCK_WORDS] {
        &self.0
    }

    pub fn register(&self, k: usize) -> [u64; 2] {
        [self.0[2 * k], self.0[2 * k + 1]]
    }

    pub fn set_register(&mut self, k: usize, value: [u64; 2]) {
        self.0[2 * k] = value[0];
        self.0[2 * k + 1] = value[1];
    }
}

impl Default for Block {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Block({:016x} {:016x} ..)", self.0[0], self.0[1])
    }
}

impl BitXorAssign<&Block> for Block {
    fn bitxor_assign(&mut self, rhs: &Block) {
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a ^= b;
        }
    }
}

impl BitXor<&Block> for &Block {
    type Output = Block;

    fn bitxor(self, rhs: &Block) -> Block {
        let mut out = self.clone();
        out ^= rhs;
        out
    }
}
