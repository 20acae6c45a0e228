use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::argon2m::{fill_memory_with, initial_digest, Block, FillOptions, MemParams};
use crate::error::{invalid, Result};
use crate::mtp::{verify, PowParams, Prover};

/// Outcome of [`simulate_detection`].
#[derive(Debug, Clone, Serialize)]
pub struct DetectionReport {
    pub blocks: u64,
    pub lanes: u32,
    pub epsilon: f64,
    pub length: u32,
    /// Blocks forged per trial, `⌈εT⌉`.
    pub forged: u64,
    pub trials: u64,
    /// Proofs that verified despite the forged blocks.
    pub escapes: u64,
    pub escape_rate: f64,
    /// `(1-ε)^L`.
    pub expected: f64,
    /// `(1 - forged/(T-2p))^L`: openings only land on compressed blocks.
    pub expected_eligible: f64,
}

/// Fills memory with `⌈εT⌉` randomly chosen compressed blocks replaced by
/// random data, so each is the only inconsistent block in its place and
/// everything after it follows the recurrence. Builds an honest-looking proof
/// with `d = 0` and counts how often it verifies.
pub fn simulate_detection(
    mem: &MemParams,
    epsilon: f64,
    length: u32,
    trials: u64,
    seed: u64,
) -> Result<DetectionReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return invalid(format!("ε = {epsilon} outside (0, 1)"));
    }
    let params = PowParams::new(*mem, length.try_into().map_err(|_| crate::Error::InvalidArgument("L > 255".into()))?, 0)?;
    let t = mem.blocks();
    let lanes = mem.lanes() as u64;
    let per_lane = mem.lane_len() - 2;
    let eligible = t - 2 * lanes;
    let forged = (epsilon * t as f64).ceil() as u64;
    if forged > eligible {
        return invalid("more forged blocks than compressed blocks");
    }

    let escapes = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<bool> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let challenge = rng.next_u64().to_le_bytes();
            let mut targets: Vec<(u64, Block)> = sample(&mut rng, eligible as usize, forged as usize)
                .into_iter()
                .map(|r| {
                    let r = r as u64;
                    let mut b = Block::ZERO;
                    rng.fill(&mut b.0[..]);
                    ((r / per_lane) * mem.lane_len() + 2 + r % per_lane, b)
                })
                .collect();
            targets.sort_by_key(|x| x.0);
            let replace = |i: u64| targets.binary_search_by_key(&i, |x| x.0).ok().map(|k| targets[k].1.clone());
            let h0 = initial_digest(&challenge)?;
            let memory = fill_memory_with(&h0, mem, FillOptions { threads: Some(1), replace: Some(&replace) })?;
            let prover = Prover::from_memory(&challenge, &params, memory)?;
            Ok(verify(&prover.assemble(rng.next_u64()), &params).is_ok())
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&e| e)
        .count() as u64;

    Ok(DetectionReport {
        blocks: t,
        lanes: mem.lanes(),
        epsilon,
        length,
        forged,
        trials,
        escapes,
        escape_rate: escapes as f64 / trials.max(1) as f64,
        expected: (1.0 - epsilon).powi(length as i32),
        expected_eligible: (1.0 - forged as f64 / eligible as f64).powi(length as i32),
    })
}
