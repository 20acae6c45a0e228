use rayon::prelude::*;

use super::block::Block;
use super::compress::compress_at;
use super::params::{MemParams, Position, SLICES};
use super::ChallengeDigest;
use crate::blake2b;
use crate::error::{invalid, Error, Result};

/// Largest accepted challenge, in bytes.
pub const MAX_CHALLENGE_LEN: usize = 1 << 20;

/// `H0 = H(P || S || I)` with `P` and `S` the all-zero 16-byte strings.
pub fn initial_digest(challenge: &[u8]) -> Result<ChallengeDigest> {
    if challenge.is_empty() {
        return invalid("challenge must not be empty");
    }
    if challenge.len() > MAX_CHALLENGE_LEN {
        return invalid(format!(
            "challenge of {} bytes exceeds the {MAX_CHALLENGE_LEN}-byte limit",
            challenge.len()
        ));
    }
    Ok(ChallengeDigest(blake2b::hash256(&[&[0u8; 16], &[0u8; 16], challenge])))
}

/// The two expansion blocks of `lane`: `H'(h0 || le32(column) || le32(lane))`.
pub fn expand_first_blocks(h0: &ChallengeDigest, lane: u32) -> (Block, Block) {
    let make = |column: u32| {
        Block::from_bytes(&blake2b::expand_1024(&[
            h0.as_bytes(),
            &column.to_le_bytes(),
            &lane.to_le_bytes(),
        ]))
    };
    (make(0), make(1))
}

/// Index of the reference block for the block at `pos` in `pass` (0-based),
/// selected by the first two words of its predecessor.
///
/// The candidate lane is `J2 mod p`, forced to the current lane in the first
/// slice of the first pass. Within a lane the window is every finished block
/// except the predecessor; in another lane it is every block outside the slice
/// currently being filled (in the first pass: the earlier slices only). The
/// `J1 mod |W|`-th block of the window is returned.
pub(crate) fn reference_index(j1: u64, j2: u64, pos: Position, pass: u32, params: &MemParams) -> u64 {
    let lane_len = params.lane_len();
    let seg = params.slice_len();
    let slice = pos.column / seg;
    let offset = pos.column % seg;
    let ref_lane = if pass == 0 && slice == 0 {
        pos.lane
    } else {
        j2 % params.lanes() as u64
    };
    let same_lane = ref_lane == pos.lane;
    let (start, size) = if pass == 0 {
        if same_lane {
            (0, pos.column - 1)
        } else {
            (0, slice * seg)
        }
    } else {
        let start = ((slice + 1) * seg) % lane_len;
        if same_lane {
            (start, lane_len - seg + offset - 1)
        } else {
            (start, lane_len - seg)
        }
    };
    debug_assert!(size > 0);
    let column = (start + j1 % size) % lane_len;
    ref_lane * lane_len + column
}

/// `φ(i)` for a single-pass memory: the reference of block `index`, derived
/// from its predecessor `prev`.
pub fn phi_index(prev: &Block, index: u64, params: &MemParams) -> Result<u64> {
    let pos = params.psi(index)?;
    if pos.column < 2 {
        return invalid(format!("block {index} has no reference (column {})", pos.column));
    }
    Ok(reference_index(prev.0[0], prev.0[1], pos, 0, params))
}

/// A filled memory.
#[derive(Clone)]
pub struct MemoryArray {
    params: MemParams,
    blocks: Vec<Block>,
}

impl MemoryArray {
    /// Wraps externally produced blocks, e.g. a cheater's memory.
    pub fn from_blocks(params: MemParams, blocks: Vec<Block>) -> Result<Self> {
        if blocks.len() as u64 != params.blocks() {
            return invalid(format!(
                "expected {} blocks, got {}",
                params.blocks(),
                blocks.len()
            ));
        }
        Ok(Self { params, blocks })
    }

    pub fn params(&self) -> &MemParams {
        &self.params
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [Block] {
        &mut self.blocks
    }

    pub fn get(&self, index: u64) -> &Block {
        &self.blocks[index as usize]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn into_blocks(self) -> Vec<Block> {
        self.blocks
    }
}

/// Options for [`fill_memory_with`].
#[derive(Clone, Copy, Default)]
pub struct FillOptions<'a> {
    /// Worker threads; `None` uses the ambient rayon pool, `Some(1)` runs inline.
    pub threads: Option<usize>,
    /// Replaces selected blocks by arbitrary values during the fill. Later blocks
    /// are derived from the replaced values, so each replaced block is the only
    /// one that violates the recurrence. Used to model cheating provers.
    pub replace: Option<&'a (dyn Fn(u64) -> Option<Block> + Sync)>,
}

/// Fills `params.blocks()` blocks for `challenge`.
pub fn fill_memory(challenge: &[u8], params: &MemParams) -> Result<(MemoryArray, ChallengeDigest)> {
    let h0 = initial_digest(challenge)?;
    let memory = fill_memory_with(&h0, params, FillOptions::default())?;
    Ok((memory, h0))
}

/// Fills memory from an already computed `H0`.
pub fn fill_memory_with(h0: &ChallengeDigest, params: &MemParams, opts: FillOptions<'_>) -> Result<MemoryArray> {
    let total = usize::try_from(params.blocks())
        .map_err(|_| Error::Resource(format!("{} blocks do not fit in memory", params.blocks())))?;
    let mut blocks: Vec<Block> = Vec::new();
    blocks
        .try_reserve_exact(total)
        .map_err(|e| Error::Resource(format!("cannot allocate {total} blocks: {e}")))?;
    blocks.resize(total, Block::ZERO);

    match opts.threads {
        Some(0) => return invalid("thread count must be positive"),
        Some(1) => run_fill(&mut blocks, h0, params, opts.replace, false),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
            pool.install(|| run_fill(&mut blocks, h0, params, opts.replace, true));
        }
        None => run_fill(&mut blocks, h0, params, opts.replace, true),
    }
    Ok(MemoryArray { params: *params, blocks })
}

/// Raw view of the memory shared by the lane workers of one slice.
struct SharedBlocks {
    ptr: *mut Block,
    len: usize,
}

// SAFETY: within a slice every worker writes only the segment of its own lane
// and reads blocks that were either finished before the slice barrier or were
// written earlier by the same worker. No two workers touch the same block
// while one of them writes it.
unsafe impl Sync for SharedBlocks {}

impl SharedBlocks {
    unsafe fn read(&self, index: u64) -> &Block {
        debug_assert!((index as usize) < self.len);
        &*self.ptr.add(index as usize)
    }

    unsafe fn write(&self, index: u64, block: Block) {
        debug_assert!((index as usize) < self.len);
        *self.ptr.add(index as usize) = block;
    }
}

type Replace<'a> = Option<&'a (dyn Fn(u64) -> Option<Block> + Sync)>;

fn run_fill(blocks: &mut [Block], h0: &ChallengeDigest, params: &MemParams, replace: Replace<'_>, parallel: bool) {
    let lane_len = params.lane_len();
    for lane in 0..params.lanes() {
        let (b0, b1) = expand_first_blocks(h0, lane);
        let base = lane as u64 * lane_len;
        blocks[base as usize] = replace.and_then(|f| f(base)).unwrap_or(b0);
        blocks[base as usize + 1] = replace.and_then(|f| f(base + 1)).unwrap_or(b1);
    }

    let shared = SharedBlocks {
        ptr: blocks.as_mut_ptr(),
        len: blocks.len(),
    };
    for pass in 0..params.passes() {
        for slice in 0..SLICES {
            let segment = |lane: u64| {
                // SAFETY: see `SharedBlocks`.
                unsafe { fill_segment(&shared, h0, params, replace, pass, slice, lane) }
            };
            if parallel && params.lanes() > 1 {
                (0..params.lanes() as u64).into_par_iter().for_each(segment);
            } else {
                (0..params.lanes() as u64).for_each(segment);
            }
        }
    }
}

unsafe fn fill_segment(
    mem: &SharedBlocks,
    h0: &ChallengeDigest,
    params: &MemParams,
    replace: Replace<'_>,
    pass: u32,
    slice: u64,
    lane: u64,
) {
    let lane_len = params.lane_len();
    let seg = params.slice_len();
    let base = lane * lane_len;
    let first = if pass == 0 && slice == 0 { 2 } else { slice * seg };
    for column in first..(slice + 1) * seg {
        let prev_column = if column == 0 { lane_len - 1 } else { column - 1 };
        let prev = mem.read(base + prev_column);
        let pos = Position { lane, column };
        let index = base + column;
        let next = match replace.and_then(|f| f(index)) {
            Some(forged) => forged,
            None => {
                let r = reference_index(prev.0[0], prev.0[1], pos, pass, params);
                compress_at(prev, mem.read(r), pos, h0)
            }
        };
        mem.write(index, next);
    }
}
