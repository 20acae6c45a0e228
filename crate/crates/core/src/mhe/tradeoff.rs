use std::collections::HashMap;

use serde::Serialize;

use crate::argon2m::{compress, expand_first_blocks, phi_index, Block};
use crate::error::{invalid, Result};

use super::audit::TraceEvent;
use super::chunk::{decrypt_with, Decrypted};
use super::header::{header_geometry, MheHeader};
use super::{MheChunk, MheParams};

/// Work done by the memory-saving decryptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffStats {
    /// Fraction of header blocks kept.
    pub alpha: f64,
    /// Body lookups of a header block that was not kept.
    pub misses: u64,
    /// Compression and expansion calls spent on recomputing them.
    pub recomputations: u64,
}

impl TradeoffStats {
    pub fn calls_per_miss(&self) -> f64 {
        if self.misses == 0 {
            0.0
        } else {
            self.recomputations as f64 / self.misses as f64
        }
    }
}

/// Decrypts while keeping only the even-indexed header blocks (`α = 1/2`) and
/// recomputing the others from their inputs whenever the body asks for them.
///
/// Needs a single-pass header, where every block is a function of two earlier
/// ones. Odd blocks follow an even block in their lane, so only the reference
/// input can itself be missing.
pub fn memory_saving_decrypt(
    header: &MheHeader,
    chunk: &MheChunk,
    params: &MheParams,
) -> Result<(Decrypted, TradeoffStats)> {
    if params.passes() != 1 {
        return invalid("the memory-saving decryptor needs a single-pass header");
    }
    let mem = header_geometry(params)?;
    let stored: HashMap<u64, Block> = header
        .blocks()
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 2 == 0)
        .map(|(i, b)| (i as u64, b.clone()))
        .collect();
    let h0 = *header.digest();
    let mut misses = 0u64;
    let mut calls = 0u64;

    fn recompute(
        j: u64,
        stored: &HashMap<u64, Block>,
        mem: &crate::argon2m::MemParams,
        h0: &crate::argon2m::ChallengeDigest,
        calls: &mut u64,
    ) -> Block {
        if let Some(b) = stored.get(&j) {
            return b.clone();
        }
        *calls += 1;
        let pos = mem.psi(j).unwrap();
        if pos.column < 2 {
            let (b0, b1) = expand_first_blocks(h0, pos.lane as u32);
            return if pos.column == 0 { b0 } else { b1 };
        }
        let prev = recompute(j - 1, stored, mem, h0, calls);
        let r = phi_index(&prev, j, mem).unwrap();
        let reference = recompute(r, stored, mem, h0, calls);
        compress(&prev, &reference, j, h0, mem).unwrap()
    }

    let mut lookup = |r: u64| {
        if !stored.contains_key(&r) {
            misses += 1;
        }
        recompute(r, &stored, &mem, &h0, &mut calls)
    };
    let mut trace: Vec<TraceEvent> = Vec::new();
    let out = decrypt_with(&mut lookup, header.x0(), header.k0(), &h0, chunk, params, &mut trace)?;
    let stats = TradeoffStats {
        alpha: stored.len() as f64 / header.blocks().len() as f64,
        misses,
        recomputations: calls,
    };
    Ok((out, stats))
}
