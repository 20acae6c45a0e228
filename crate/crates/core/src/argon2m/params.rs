use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Synchronisation slices per lane.
pub const SLICES: u64 = 4;

/// Geometry of a filled memory: `blocks` blocks in `lanes` rows, `passes` passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemParams {
    blocks: u64,
    lanes: u32,
    passes: u32,
}

/// Two-dimensional coordinates of a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Position {
    pub lane: u64,
    pub column: u64,
}

impl MemParams {
    /// Validates the lane geometry: `lanes` divides `blocks`, every lane has at
    /// least 8 columns and the lane length is a multiple of the slice count.
    pub fn new(blocks: u64, lanes: u32, passes: u32) -> Result<Self> {
        if lanes == 0 {
            return invalid("lane count must be positive");
        }
        if passes == 0 {
            return invalid("pass count must be at least 1");
        }
        if !blocks.is_multiple_of(lanes as u64) {
            return invalid(format!("{lanes} lanes do not divide {blocks} blocks"));
        }
        let lane_len = blocks / lanes as u64;
        if lane_len < 8 {
            return invalid(format!("lane length {lane_len} is below the minimum of 8"));
        }
        if !lane_len.is_multiple_of(SLICES) {
            return invalid(format!("lane length {lane_len} is not a multiple of {SLICES}"));
        }
        Ok(Self { blocks, lanes, passes })
    }

    /// Like [`MemParams::new`], additionally requiring a power-of-two block count
    /// (needed whenever the memory is committed to with a Merkle tree).
    pub fn new_pow2(blocks: u64, lanes: u32, passes: u32) -> Result<Self> {
        if !blocks.is_power_of_two() {
            return invalid(format!("block count {blocks} is not a power of two"));
        }
        Self::new(blocks, lanes, passes)
    }

    pub fn blocks(&self) -> u64 {
        self.blocks
    }

    pub fn lanes(&self) -> u32 {
        self.lanes
    }

    pub fn passes(&self) -> u32 {
        self.passes
    }

    pub fn lane_len(&self) -> u64 {
        self.blocks / self.lanes as u64
    }

    pub fn slice_len(&self) -> u64 {
        self.lane_len() / SLICES
    }

    /// `ψ(i) = (⌊p·i/T⌋, i mod T/p)`.
    pub fn psi(&self, index: u64) -> Result<Position> {
        if index >= self.blocks {
            return invalid(format!("block index {index} out of range 0..{}", self.blocks));
        }
        Ok(self.position(index))
    }

    /// `ψ⁻¹(j, k) = j·T/p + k`.
    pub fn psi_inv(&self, lane: u64, column: u64) -> Result<u64> {
        if lane >= self.lanes as u64 || column >= self.lane_len() {
            return invalid(format!("position ({lane}, {column}) out of range"));
        }
        Ok(self.index(Position { lane, column }))
    }

    #[inline]
    pub(crate) fn position(&self, index: u64) -> Position {
        let lane_len = self.lane_len();
        Position {
            lane: index / lane_len,
            column: index % lane_len,
        }
    }

    #[inline]
    pub(crate) fn index(&self, pos: Position) -> u64 {
        pos.lane * self.lane_len() + pos.column
    }
}
