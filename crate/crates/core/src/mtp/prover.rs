use std::sync::atomic::{AtomicU64, Ordering};

use crate::argon2m::{fill_memory_with, initial_digest, phi_index, ChallengeDigest, FillOptions, MemoryArray};
use crate::error::{invalid, Error, Result};
use crate::merkle::MerkleTree;

use super::proof::{Proof, ProofEntry};
use super::{chain_start, chain_step, difficulty_check, select_index, PowParams};

/// Nonces each worker claims at a time.
const CLAIM: u64 = 16;

/// A filled memory and its Merkle tree, ready to search nonces.
pub struct Prover {
    challenge: Vec<u8>,
    params: PowParams,
    h0: ChallengeDigest,
    memory: MemoryArray,
    tree: MerkleTree,
}

/// Result of scanning a nonce range.
#[derive(Debug)]
pub struct SearchOutcome {
    pub proof: Option<Proof>,
    /// Nonces whose chain was evaluated.
    pub nonces_tried: u64,
}

impl Prover {
    /// Fills the memory and builds the tree. `threads` follows [`FillOptions`].
    pub fn new(challenge: &[u8], params: &PowParams, threads: Option<usize>) -> Result<Self> {
        let h0 = initial_digest(challenge)?;
        let memory = fill_memory_with(&h0, params.mem(), FillOptions { threads, replace: None })?;
        let tree = match threads {
            Some(n) if n > 1 => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?
                .install(|| MerkleTree::build(&memory))?,
            _ => MerkleTree::build(&memory)?,
        };
        Ok(Self { challenge: challenge.to_vec(), params: *params, h0, memory, tree })
    }

    /// Wraps an arbitrary memory, which need not follow the recurrence. Used to
    /// model cheating provers; the tree is built over the given blocks.
    pub fn from_memory(challenge: &[u8], params: &PowParams, memory: MemoryArray) -> Result<Self> {
        if memory.params() != params.mem() {
            return invalid("memory geometry differs from the proof parameters");
        }
        let h0 = initial_digest(challenge)?;
        let tree = MerkleTree::build(&memory)?;
        Ok(Self { challenge: challenge.to_vec(), params: *params, h0, memory, tree })
    }

    pub fn memory(&self) -> &MemoryArray {
        &self.memory
    }

    pub fn tree(&self) -> &MerkleTree {
        &self.tree
    }

    pub fn digest(&self) -> &ChallengeDigest {
        &self.h0
    }

    /// `Y_L` for `nonce`, together with the opened positions.
    pub fn chain(&self, nonce: u64) -> ([u8; 32], Vec<u64>) {
        let mut y = chain_start(&self.challenge, &self.tree.root(), nonce);
        let mut indices = Vec::with_capacity(self.params.length() as usize);
        for _ in 0..self.params.length() {
            let i = select_index(&y, &self.params);
            indices.push(i);
            y = chain_step(&y, self.memory.get(i));
        }
        (y, indices)
    }

    /// Builds the proof for `nonce` without checking the difficulty.
    pub fn assemble(&self, nonce: u64) -> Proof {
        let (_, indices) = self.chain(nonce);
        let mem = self.params.mem();
        let entries = indices
            .into_iter()
            .map(|i| {
                let prev = self.memory.get(i - 1);
                let phi = phi_index(prev, i, mem).expect("selected blocks have a reference");
                ProofEntry {
                    index: i,
                    phi,
                    block_prev: prev.clone(),
                    block_ref: self.memory.get(phi).clone(),
                    path_prev: self.tree.open(i - 1).unwrap(),
                    path_ref: self.tree.open(phi).unwrap(),
                    path_cur: self.tree.open(i).unwrap(),
                }
            })
            .collect();
        Proof { challenge: self.challenge.clone(), root: self.tree.root(), nonce, entries }
    }

    /// Scans `nonce_start .. nonce_start + nonce_limit` (wrapping) with `workers`
    /// threads and returns the proof for the smallest successful offset, so the
    /// outcome does not depend on the worker count.
    pub fn search(&self, nonce_start: u64, nonce_limit: u64, workers: usize) -> SearchOutcome {
        let d = self.params.difficulty();
        let next = AtomicU64::new(0);
        let best = AtomicU64::new(u64::MAX);
        let tried = AtomicU64::new(0);
        let worker = || loop {
            let from = next.fetch_add(CLAIM, Ordering::Relaxed);
            if from >= nonce_limit || from >= best.load(Ordering::Relaxed) {
                break;
            }
            for offset in from..(from + CLAIM).min(nonce_limit) {
                if offset >= best.load(Ordering::Relaxed) {
                    break;
                }
                tried.fetch_add(1, Ordering::Relaxed);
                let (y, _) = self.chain(nonce_start.wrapping_add(offset));
                if difficulty_check(&y, d) {
                    best.fetch_min(offset, Ordering::Relaxed);
                    break;
                }
            }
        };
        if workers <= 1 {
            worker();
        } else {
            std::thread::scope(|s| {
                for _ in 0..workers {
                    s.spawn(worker);
                }
            });
        }
        let best = best.into_inner();
        SearchOutcome {
            proof: (best != u64::MAX).then(|| self.assemble(nonce_start.wrapping_add(best))),
            nonces_tried: tried.into_inner(),
        }
    }
}

/// Fills memory, builds the tree and scans `nonce_limit` nonces from
/// `nonce_start` on one thread. `Ok(None)` means the range was exhausted.
pub fn prove(challenge: &[u8], params: &PowParams, nonce_start: u64, nonce_limit: u64) -> Result<Option<Proof>> {
    let prover = Prover::new(challenge, params, None)?;
    Ok(prover.search(nonce_start, nonce_limit, 1).proof)
}
