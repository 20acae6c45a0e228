use super::block::{Block, BLOCK_WORDS};
use super::params::{MemParams, Position};
use super::ChallengeDigest;
use crate::error::{invalid, Result};

#[inline(always)]
fn mul_lo(a: u64, b: u64) -> u64 {
    2u64.wrapping_mul(a & 0xffff_ffff).wrapping_mul(b & 0xffff_ffff)
}

#[inline(always)]
fn quarter(v: &mut [u64; 16], a: usize, b: usize, c: usize, d: usize) {
    v[a] = v[a].wrapping_add(v[b]).wrapping_add(mul_lo(v[a], v[b]));
    v[d] = (v[d] ^ v[a]).rotate_right(32);
    v[c] = v[c].wrapping_add(v[d]).wrapping_add(mul_lo(v[c], v[d]));
    v[b] = (v[b] ^ v[c]).rotate_right(24);
    v[a] = v[a].wrapping_add(v[b]).wrapping_add(mul_lo(v[a], v[b]));
    v[d] = (v[d] ^ v[a]).rotate_right(16);
    v[c] = v[c].wrapping_add(v[d]).wrapping_add(mul_lo(v[c], v[d]));
    v[b] = (v[b] ^ v[c]).rotate_right(63);
}

/// The multiplication-enhanced Blake2b round on 16 words (8 registers).
#[inline(always)]
fn round(v: &mut [u64; 16]) {
    quarter(v, 0, 4, 8, 12);
    quarter(v, 1, 5, 9, 13);
    quarter(v, 2, 6, 10, 14);
    quarter(v, 3, 7, 11, 15);
    quarter(v, 0, 5, 10, 15);
    quarter(v, 1, 6, 11, 12);
    quarter(v, 2, 7, 8, 13);
    quarter(v, 3, 4, 9, 14);
}

/// Applies the round `P` to eight 16-byte registers.
pub fn permute_p(registers: &[[u8; 16]; 8]) -> [[u8; 16]; 8] {
    let mut v = [0u64; 16];
    for (k, reg) in registers.iter().enumerate() {
        v[2 * k] = u64::from_le_bytes(reg[..8].try_into().unwrap());
        v[2 * k + 1] = u64::from_le_bytes(reg[8..].try_into().unwrap());
    }
    round(&mut v);
    let mut out = [[0u8; 16]; 8];
    for (k, reg) in out.iter_mut().enumerate() {
        reg[..8].copy_from_slice(&v[2 * k].to_le_bytes());
        reg[8..].copy_from_slice(&v[2 * k + 1].to_le_bytes());
    }
    out
}

fn permute_rows_then_columns(r: &mut [u64; BLOCK_WORDS]) {
    let mut v = [0u64; 16];
    for row in 0..8 {
        let base = 16 * row;
        v.copy_from_slice(&r[base..base + 16]);
        round(&mut v);
        r[base..base + 16].copy_from_slice(&v);
    }
    for col in 0..8 {
        for k in 0..8 {
            v[2 * k] = r[2 * col + 16 * k];
            v[2 * k + 1] = r[2 * col + 16 * k + 1];
        }
        round(&mut v);
        for k in 0..8 {
            r[2 * col + 16 * k] = v[2 * k];
            r[2 * col + 16 * k + 1] = v[2 * k + 1];
        }
    }
}

/// Compression with explicit coordinates. Used directly by callers that place
/// blocks outside the lane grid (the encryption body) and by later passes.
pub fn compress_at(prev: &Block, reference: &Block, pos: Position, h0: &ChallengeDigest) -> Block {
    let mut r = prev ^ reference;
    r.set_register(7, [pos.lane, pos.column]);
    let h = h0.as_bytes();
    for k in 0..2 {
        let lo = u64::from_le_bytes(h[16 * k..16 * k + 8].try_into().unwrap());
        let hi = u64::from_le_bytes(h[16 * k + 8..16 * k + 16].try_into().unwrap());
        r.set_register(8 + k, [lo, hi]);
    }
    let saved = r.clone();
    permute_rows_then_columns(&mut r.0);
    r ^= &saved;
    r
}

/// `F_{H0,i}(prev, ref)` for a block produced by the recurrence (column ≥ 2).
pub fn compress(
    prev: &Block,
    reference: &Block,
    index: u64,
    h0: &ChallengeDigest,
    params: &MemParams,
) -> Result<Block> {
    let pos = params.psi(index)?;
    if pos.column < 2 {
        return invalid(format!(
            "block {index} is in column {}, which is produced by expansion",
            pos.column
        ));
    }
    Ok(compress_at(prev, reference, pos, h0))
}
