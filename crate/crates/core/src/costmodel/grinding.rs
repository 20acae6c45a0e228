//! A naive memory-hard proof of work, where the difficulty is tested on the
//! hash of the last block and `L` blocks are opened at positions derived from
//! the Merkle root, and the cheater who forges only that last block.

use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::argon2m::{
    compress, expand_first_blocks, fill_memory, phi_index, Block, ChallengeDigest, MemParams, MemoryArray,
};
use crate::blake2b;
use crate::error::{invalid, Result};
use crate::merkle::{verify_opening, Digest16, MerkleTree, OpeningPath};
use crate::mtp::{chain_start, chain_step, difficulty_check, select_index, verify, PowParams, Proof, ProofEntry};

/// Outcome of [`simulate_grinding`].
#[derive(Debug, Clone, Serialize)]
pub struct GrindingReport {
    pub blocks: u64,
    pub length: u32,
    pub difficulty: u32,
    pub naive_trials: u64,
    /// Forged proofs the naive verifier accepted.
    pub naive_escapes: u64,
    pub naive_escape_rate: f64,
    /// `(1 - 1/T)^L`.
    pub expected_escape: f64,
    /// Average hash calls per forged last block, about `2^d`.
    pub grind_calls: f64,
    pub mtp_trials: u64,
    pub mtp_accepted: u64,
    /// Rejections by kind.
    pub mtp_rejections: BTreeMap<String, u64>,
}

/// One opened block of the naive scheme with what is needed to recompute it.
struct NaiveOpening {
    index: u64,
    block: Block,
    path: OpeningPath,
    /// Predecessor and reference with their paths; absent for the first two
    /// blocks of a lane, which the verifier re-expands.
    inputs: Option<(Block, OpeningPath, Block, OpeningPath)>,
}

struct NaiveProof {
    root: Digest16,
    last: Block,
    last_path: OpeningPath,
    openings: Vec<NaiveOpening>,
}

fn last_block_passes(block: &Block, d: u32) -> bool {
    difficulty_check(&blake2b::hash256(&[&block.to_bytes()]), d as u8)
}

fn naive_positions(root: &Digest16, length: u32, blocks: u64) -> impl Iterator<Item = u64> + '_ {
    (0..length).map(move |k| {
        let h = blake2b::hash256(&[&root.0, &k.to_le_bytes()]);
        u64::from_le_bytes(h[..8].try_into().unwrap()) % blocks
    })
}

fn naive_prove(memory: &[Block], tree: &MerkleTree, mem: &MemParams, length: u32) -> NaiveProof {
    let root = tree.root();
    let t = mem.blocks();
    let openings = naive_positions(&root, length, t)
        .map(|i| {
            let column = i % mem.lane_len();
            let inputs = (column >= 2).then(|| {
                let prev = &memory[i as usize - 1];
                let phi = phi_index(prev, i, mem).expect("column ≥ 2 has a reference");
                (prev.clone(), tree.open(i - 1).unwrap(), memory[phi as usize].clone(), tree.open(phi).unwrap())
            });
            NaiveOpening { index: i, block: memory[i as usize].clone(), path: tree.open(i).unwrap(), inputs }
        })
        .collect();
    NaiveProof { root, last: memory[t as usize - 1].clone(), last_path: tree.open(t - 1).unwrap(), openings }
}

fn naive_verify(proof: &NaiveProof, h0: &ChallengeDigest, mem: &MemParams, length: u32, d: u32) -> bool {
    let t = mem.blocks();
    if !last_block_passes(&proof.last, d) || !verify_opening(&proof.root, t - 1, &proof.last, &proof.last_path, t) {
        return false;
    }
    let positions: Vec<u64> = naive_positions(&proof.root, length, t).collect();
    if proof.openings.len() != positions.len() {
        return false;
    }
    proof.openings.iter().zip(positions).all(|(o, i)| {
        if o.index != i || !verify_opening(&proof.root, i, &o.block, &o.path, t) {
            return false;
        }
        let column = i % mem.lane_len();
        let expected = match &o.inputs {
            None if column < 2 => {
                let (b0, b1) = expand_first_blocks(h0, (i / mem.lane_len()) as u32);
                if column == 0 {
                    b0
                } else {
                    b1
                }
            }
            Some((prev, prev_path, reference, ref_path)) if column >= 2 => {
                let Ok(phi) = phi_index(prev, i, mem) else { return false };
                if !verify_opening(&proof.root, i - 1, prev, prev_path, t)
                    || !verify_opening(&proof.root, phi, reference, ref_path, t)
                {
                    return false;
                }
                match compress(prev, reference, i, h0, mem) {
                    Ok(b) => b,
                    Err(_) => return false,
                }
            }
            _ => return false,
        };
        expected == o.block
    })
}

fn random_block(rng: &mut impl RngCore) -> Block {
    let mut b = Block::ZERO;
    rng.fill(&mut b.0[..]);
    b
}

/// Draws random blocks until `accept` holds; returns the block and the number
/// of draws.
fn grind(rng: &mut impl RngCore, mut accept: impl FnMut(&Block) -> bool) -> (Block, u64) {
    let mut tries = 0;
    loop {
        tries += 1;
        let b = random_block(rng);
        if accept(&b) {
            return (b, tries);
        }
    }
}

/// Measures how often the last-block grinding cheater passes the naive scheme
/// (`naive_trials` runs) and MTP (`mtp_trials` runs) on one honestly filled
/// single-lane memory of `T` blocks.
///
/// Against MTP the cheater fixes a nonce whose honest chain fails the
/// difficulty test, grinds a replacement for the last opened block until the
/// chain passes, commits it to the tree and submits openings for that chain.
pub fn simulate_grinding(
    blocks: u64,
    length: u32,
    difficulty: u32,
    naive_trials: u64,
    mtp_trials: u64,
    seed: u64,
) -> Result<GrindingReport> {
    if !(16..=1 << 12).contains(&blocks) || !blocks.is_power_of_two() {
        return invalid(format!("block count {blocks} must be a power of two in 16..=4096"));
    }
    if difficulty > 16 || !(1..=255).contains(&length) {
        return invalid("need d ≤ 16 and 1 ≤ L ≤ 255");
    }
    let mem = MemParams::new_pow2(blocks, 1, 1)?;
    let challenge = seed.to_le_bytes();
    let (memory, h0) = fill_memory(&challenge, &mem)?;
    let tree = MerkleTree::build(&memory)?;
    let last = blocks - 1;

    let naive: Vec<(bool, u64)> = (0..naive_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let (forged, tries) = grind(&mut rng, |b| last_block_passes(b, difficulty));
            let mut blocks = memory.blocks().to_vec();
            blocks[last as usize] = forged.clone();
            let mut tree = tree.clone();
            tree.update_leaf(last, &forged).unwrap();
            let proof = naive_prove(&blocks, &tree, &mem, length);
            (naive_verify(&proof, &h0, &mem, length, difficulty), tries)
        })
        .collect();
    let naive_escapes = naive.iter().filter(|r| r.0).count() as u64;
    let grind_calls = naive.iter().map(|r| r.1).sum::<u64>() as f64 / naive_trials.max(1) as f64;

    let pow = PowParams::new(mem, length as u8, difficulty as u8)?;
    let outcomes: Vec<std::result::Result<(), String>> = (0..mtp_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d74_7000);
            rng.set_stream(trial);
            mtp_cheat(&challenge, &pow, &memory, &tree, &mut rng).map_err(|reason| {
                format!("{reason:?}").split([' ', '{', '(']).next().unwrap_or_default().to_string()
            })
        })
        .collect();
    let mut mtp_rejections = BTreeMap::new();
    for kind in outcomes.iter().filter_map(|o| o.as_ref().err()) {
        *mtp_rejections.entry(kind.clone()).or_insert(0) += 1;
    }

    Ok(GrindingReport {
        blocks,
        length,
        difficulty,
        naive_trials,
        naive_escapes,
        naive_escape_rate: naive_escapes as f64 / naive_trials.max(1) as f64,
        expected_escape: (1.0 - 1.0 / blocks as f64).powi(length as i32),
        grind_calls,
        mtp_trials,
        mtp_accepted: outcomes.iter().filter(|o| o.is_ok()).count() as u64,
        mtp_rejections,
    })
}

fn mtp_cheat(
    challenge: &[u8],
    params: &PowParams,
    memory: &MemoryArray,
    tree: &MerkleTree,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<(), crate::mtp::RejectReason> {
    let length = params.length() as usize;
    let root = tree.root();
    // A nonce the honest prover would have to skip.
    let (nonce, ys, indices) = loop {
        let nonce = rng.next_u64();
        let mut ys = vec![chain_start(challenge, &root, nonce)];
        let mut indices = Vec::with_capacity(length);
        for _ in 0..length {
            let i = select_index(ys.last().unwrap(), params);
            indices.push(i);
            ys.push(chain_step(ys.last().unwrap(), memory.get(i)));
        }
        if !difficulty_check(ys.last().unwrap(), params.difficulty()) || params.difficulty() == 0 {
            break (nonce, ys, indices);
        }
    };
    let target = *indices.last().unwrap();
    let honest = memory.get(target);
    let (forged, _) = grind(rng, |b| b != honest && difficulty_check(&chain_step(&ys[length - 1], b), params.difficulty()));

    let mut blocks = memory.blocks().to_vec();
    blocks[target as usize] = forged.clone();
    let mut tree = tree.clone();
    tree.update_leaf(target, &forged).unwrap();
    let mem = params.mem();
    let entries = indices
        .iter()
        .map(|&i| {
            let prev = &blocks[i as usize - 1];
            let phi = phi_index(prev, i, mem).unwrap();
            ProofEntry {
                index: i,
                phi,
                block_prev: prev.clone(),
                block_ref: blocks[phi as usize].clone(),
                path_prev: tree.open(i - 1).unwrap(),
                path_ref: tree.open(phi).unwrap(),
                path_cur: tree.open(i).unwrap(),
            }
        })
        .collect();
    let proof = Proof { challenge: challenge.to_vec(), root: tree.root(), nonce, entries };
    verify(&proof, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn honest_naive_proofs_verify_and_forgeries_are_caught_when_opened() {
        let mem = MemParams::new_pow2(64, 1, 1).unwrap();
        let (memory, h0) = fill_memory(b"naive", &mem).unwrap();
        let tree = MerkleTree::build(&memory).unwrap();
        let honest = naive_prove(memory.blocks(), &tree, &mem, 64);
        assert!(naive_verify(&honest, &h0, &mem, 64, 0));
        assert!(honest.openings.iter().any(|o| o.inputs.is_none()));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut blocks = memory.blocks().to_vec();
        let mut forged_tree = tree.clone();
        let forged = random_block(&mut rng);
        blocks[63] = forged.clone();
        forged_tree.update_leaf(63, &forged).unwrap();
        let proof = naive_prove(&blocks, &forged_tree, &mem, 64);
        let opened = proof.openings.iter().any(|o| o.index == 63);
        assert_eq!(naive_verify(&proof, &h0, &mem, 64, 0), !opened);
    }

    #[test]
    fn small_run() {
        let r = simulate_grinding(256, 8, 4, 200, 20, 5).unwrap();
        assert!(r.naive_escape_rate > 0.9);
        assert!(r.grind_calls > 4.0 && r.grind_calls < 40.0);
        assert_eq!(r.mtp_accepted, 0);
        assert_eq!(r.mtp_rejections.values().sum::<u64>(), 20);
        let all = simulate_grinding(64, 64, 0, 400, 0, 6).unwrap();
        assert!((all.naive_escape_rate - all.expected_escape).abs() < 0.08, "{all:?}");
    }

    #[test]
    fn argument_checks() {
        assert!(simulate_grinding(100, 8, 4, 1, 1, 0).is_err());
        assert!(simulate_grinding(1 << 13, 8, 4, 1, 1, 0).is_err());
        assert!(simulate_grinding(256, 8, 17, 1, 1, 0).is_err());
    }
}
