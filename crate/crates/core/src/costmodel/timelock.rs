use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};

fn check_cores(cores: u64) -> Result<()> {
    if cores < 2 {
        return invalid(format!("need at least 2 cores, got {cores}"));
    }
    Ok(())
}

/// Approximate fraction of inconsistent blocks when `R` cores compute
/// consecutive segments of the chain at once: `0.5 - ln R / (2R)`.
pub fn parallel_inconsistency(cores: u64) -> Result<f64> {
    check_cores(cores)?;
    let r = cores as f64;
    Ok(0.5 - r.ln() / (2.0 * r))
}

/// The large-`T` limit of [`simulate_parallel_fill`]:
/// `(1/R) Σ_{m=1}^{R-1} m·((m+1)·ln(1 + 1/m) - 1)`.
///
/// Core `m` (0-based) at relative step `x` misses with probability
/// `m(1-x)/(m+x)`; averaging over `x` gives the summand.
pub fn parallel_inconsistency_limit(cores: u64) -> Result<f64> {
    check_cores(cores)?;
    let sum: f64 = (1..cores)
        .map(|m| {
            let m = m as f64;
            m * ((m + 1.0) * (1.0 / m).ln_1p() - 1.0)
        })
        .sum();
    Ok(sum / cores as f64)
}

/// Exact expectation of [`simulate_parallel_fill`] for `T` blocks.
pub fn parallel_inconsistency_expected(cores: u64, blocks: u64) -> Result<f64> {
    let seg = segment_len(cores, blocks)?;
    let mut sum = 0.0;
    for j in 1..cores {
        for i in 0..seg {
            sum += (j * (seg - i)) as f64 / (j * seg + i) as f64;
        }
    }
    Ok(sum / blocks as f64)
}

fn segment_len(cores: u64, blocks: u64) -> Result<u64> {
    check_cores(cores)?;
    if blocks == 0 || !blocks.is_multiple_of(cores) {
        return invalid(format!("{blocks} blocks do not split into {cores} segments"));
    }
    Ok(blocks / cores)
}

/// Runs `trials` fills in which `R` cores each compute `T/R` consecutive
/// blocks in lockstep. Every block references a uniformly random earlier
/// block; referencing one that the responsible core has not produced yet makes
/// the block inconsistent. Returns the mean inconsistent fraction.
pub fn simulate_parallel_fill(cores: u64, blocks: u64, trials: u32, seed: u64) -> Result<f64> {
    let seg = segment_len(cores, blocks)?;
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let misses: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let mut misses = 0u64;
            for j in 0..cores {
                for i in 0..seg {
                    let position = j * seg + i;
                    if position == 0 {
                        continue;
                    }
                    let r = rng.gen_range(0..position);
                    // Block r belongs to core r/seg at step r%seg; it exists
                    // only if that step is already behind us.
                    if r / seg < j && r % seg >= i {
                        misses += 1;
                    }
                }
            }
            misses
        })
        .sum();
    Ok(misses as f64 / (blocks as f64 * trials as f64))
}
