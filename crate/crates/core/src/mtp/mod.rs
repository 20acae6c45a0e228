//! MTP: a memory-hard proof-of-work with Merkle-tree openings and a
//! memoryless verifier.

mod proof;
mod prover;
mod verifier;

use serde::{Deserialize, Serialize};

use crate::argon2m::{Block, MemParams};
use crate::blake2b;
use crate::error::{invalid, Result};
use crate::merkle::Digest16;

pub use proof::{proof_size, Proof, ProofEntry, HEADER_FIXED_LEN, MAGIC, VERSION};
pub use prover::{prove, Prover, SearchOutcome};
pub use verifier::{verify, Opening, RejectReason};

/// Suggested number of openings per proof.
pub const DEFAULT_LENGTH: u8 = 70;

/// Proof-of-work parameters: memory geometry, openings `L` and difficulty `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowParams {
    mem: MemParams,
    length: u8,
    difficulty: u8,
}

impl PowParams {
    /// Requires a single pass over a power-of-two memory, `1 ≤ L ≤ 255`, `d ≤ 64`.
    pub fn new(mem: MemParams, length: u8, difficulty: u8) -> Result<Self> {
        if !mem.blocks().is_power_of_two() {
            return invalid(format!("block count {} is not a power of two", mem.blocks()));
        }
        if mem.passes() != 1 {
            // Blocks overwritten by a later pass cannot be recomputed from
            // their two committed inputs, so openings would be unverifiable.
            return invalid("proofs of work require a single pass");
        }
        if length == 0 {
            return invalid("at least one opening is required");
        }
        if difficulty > 64 {
            return invalid(format!("difficulty {difficulty} exceeds 64 bits"));
        }
        Ok(Self { mem, length, difficulty })
    }

    /// `T = 2^21` (2 GiB), four lanes, `L = 70`.
    pub fn preset_2gib(difficulty: u8) -> Self {
        Self::new(MemParams::new(1 << 21, 4, 1).unwrap(), DEFAULT_LENGTH, difficulty).unwrap()
    }

    pub fn mem(&self) -> &MemParams {
        &self.mem
    }

    pub fn length(&self) -> u8 {
        self.length
    }

    pub fn difficulty(&self) -> u8 {
        self.difficulty
    }

    /// Merkle path length, `log2 T`.
    pub fn depth(&self) -> usize {
        self.mem.blocks().trailing_zeros() as usize
    }
}

/// Maps a chain value to an opening position.
///
/// Only blocks produced by the compression function (column ≥ 2) are
/// eligible, so every selected block has a predecessor and a reference. The
/// chain value is read as a little-endian integer and reduced modulo the
/// number `T - 2p` of eligible blocks.
pub fn select_index(y_prev: &[u8; 32], params: &PowParams) -> u64 {
    let mem = params.mem();
    let eligible = mem.blocks() - 2 * mem.lanes() as u64;
    let per_lane = mem.lane_len() - 2;
    let mut r: u128 = 0;
    for &byte in y_prev.iter().rev() {
        r = ((r << 8) | byte as u128) % eligible as u128;
    }
    let r = r as u64;
    let lane = r / per_lane;
    let column = 2 + r % per_lane;
    lane * mem.lane_len() + column
}

/// True iff the low `d` bits of `y` (little-endian) are zero.
pub fn difficulty_check(y: &[u8; 32], d: u8) -> bool {
    let d = d as usize;
    let full = d / 8;
    if y[..full].iter().any(|&b| b != 0) {
        return false;
    }
    let rest = d % 8;
    rest == 0 || y[full] & ((1u8 << rest) - 1) == 0
}

/// `Y_0 = H(I || Φ || N)`.
pub fn chain_start(challenge: &[u8], root: &Digest16, nonce: u64) -> [u8; 32] {
    blake2b::hash256(&[challenge, &root.0, &nonce.to_le_bytes()])
}

/// `Y_j = H(Y_{j-1} || X[i_j])`.
pub fn chain_step(y_prev: &[u8; 32], block: &Block) -> [u8; 32] {
    blake2b::hash256(&[y_prev, &block.to_bytes()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(blocks: u64, lanes: u32) -> PowParams {
        PowParams::new(MemParams::new(blocks, lanes, 1).unwrap(), 8, 0).unwrap()
    }

    fn le_bytes(v: u64) -> [u8; 32] {
        let mut y = [0u8; 32];
        y[..8].copy_from_slice(&v.to_le_bytes());
        y
    }

    #[test]
    fn param_validation() {
        let mem = MemParams::new(64, 4, 1).unwrap();
        assert!(PowParams::new(mem, 0, 0).is_err());
        assert!(PowParams::new(mem, 1, 65).is_err());
        assert!(PowParams::new(mem, 255, 64).is_ok());
        assert!(PowParams::new(MemParams::new(64, 4, 2).unwrap(), 8, 0).is_err());
        assert!(PowParams::new(MemParams::new(96, 4, 1).unwrap(), 8, 0).is_err());
        let p = PowParams::preset_2gib(10);
        assert_eq!((p.mem().blocks(), p.mem().lanes(), p.length()), (1 << 21, 4, 70));
    }

    #[test]
    fn select_index_examples() {
        // 16 blocks in 4 lanes is below the fill minimum, but the arithmetic is
        // the same for 32 blocks: 8 columns per lane, 6 eligible.
        let p = params(32, 4);
        assert_eq!(select_index(&[0; 32], &p), 2);
        assert_eq!(select_index(&le_bytes(32 - 8 - 1), &p), 3 * 8 + 7);
        assert_eq!(select_index(&le_bytes(32 - 8), &p), 2);
        assert_eq!(select_index(&le_bytes(6), &p), 8 + 2);
    }

    #[test]
    fn select_index_reduces_the_full_integer() {
        let p = params(1 << 10, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let y: [u8; 32] = rng.gen();
            // Reference reduction via four 64-bit limbs.
            let m = (1u128 << 10) - 8;
            let mut r = 0u128;
            for limb in y.chunks_exact(8).rev() {
                r = ((r << 64) | u64::from_le_bytes(limb.try_into().unwrap()) as u128) % m;
            }
            let lane = r as u64 / 254;
            assert_eq!(select_index(&y, &p), lane * 256 + 2 + r as u64 % 254);
        }
    }

    #[test]
    fn select_index_is_uniform_over_eligible_blocks() {
        let p = params(1 << 8, 4);
        let eligible = 256 - 8;
        let mut counts = vec![0u64; 256];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000u64;
        for _ in 0..n {
            let mut y = [0u8; 32];
            rng.fill_bytes(&mut y);
            counts[select_index(&y, &p) as usize] += 1;
        }
        let expected = n as f64 / eligible as f64;
        let mut chi2 = 0.0;
        for (i, &c) in counts.iter().enumerate() {
            if i % 64 < 2 {
                assert_eq!(c, 0);
            } else {
                chi2 += (c as f64 - expected).powi(2) / expected;
            }
        }
        // 247 degrees of freedom; the 99.9% quantile is about 322.
        assert!(chi2 < 322.0, "chi2 = {chi2}");
    }

    #[test]
    fn difficulty_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y: [u8; 32] = rng.gen();
        assert!(difficulty_check(&y, 0));
        for d in 0..=64 {
            assert!(difficulty_check(&[0; 32], d));
        }
        let mut y = [0xffu8; 32];
        y[0] = 0b1111_0000;
        assert!(difficulty_check(&y, 4));
        assert!(!difficulty_check(&y, 5));
        y[0] = 0;
        y[1] = 0b10;
        assert!(difficulty_check(&y, 9));
        assert!(!difficulty_check(&y, 10));
    }

    #[test]
    fn difficulty_frequency_matches_two_to_minus_d() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 1_000_000u64;
        let hits = (0..n)
            .filter(|_| {
                let mut y = [0u8; 32];
                rng.fill_bytes(&mut y[..2]);
                difficulty_check(&y, 8)
            })
            .count() as f64;
        let p = 1.0 / 256.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((hits - n as f64 * p).abs() < 3.0 * sigma, "{hits}");
    }
}
