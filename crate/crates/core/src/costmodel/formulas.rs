use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::table::TradeoffTable;

/// Area of one compression core relative to the full memory: a `2^16`-byte
/// core against 2 GiB.
pub const DEFAULT_BETA: f64 = 1.0 / 32768.0;

/// Slack allowed on `α + ε + δ ≤ 1` for grid and parsed inputs.
const FRACTION_SLACK: f64 = 1e-9;

/// A cheating strategy together with the proof parameters it is run against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheatParams {
    /// Fraction of memory stored.
    pub alpha: f64,
    /// Fraction of inconsistent blocks.
    pub epsilon: f64,
    /// Fraction of skewed blocks.
    pub delta: f64,
    /// Core area relative to the memory.
    pub beta: f64,
    /// `L`.
    pub length: u32,
    /// `d`.
    pub difficulty: u32,
    /// `T`.
    pub blocks: u64,
    /// Search time over fill time.
    pub ratio: f64,
}

impl CheatParams {
    /// The honest prover on `T` blocks.
    pub fn honest(blocks: u64, length: u32, difficulty: u32) -> Self {
        Self { alpha: 1.0, epsilon: 0.0, delta: 0.0, beta: 0.0, length, difficulty, blocks, ratio: 1.0 }
    }

    /// `α + ε + δ`: the fraction of blocks available without recomputation.
    pub fn available(&self) -> f64 {
        self.alpha + self.epsilon + self.delta
    }

    pub fn validate(&self) -> Result<()> {
        let fractions = [self.alpha, self.epsilon, self.delta];
        if fractions.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
            return invalid("α, ε and δ must be finite and non-negative");
        }
        let s = self.available();
        if s <= 0.0 || s > 1.0 + FRACTION_SLACK {
            return invalid(format!("α + ε + δ = {s} outside (0, 1]"));
        }
        if self.epsilon >= 1.0 {
            return invalid("ε must be below 1");
        }
        if self.delta > 0.0 && self.epsilon == 0.0 {
            return invalid("skewed blocks need inconsistent blocks: δ > 0 requires ε > 0");
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) || !(self.ratio.is_finite() && self.ratio >= 0.0) {
            return invalid("β and the time ratio must be finite and non-negative");
        }
        if self.blocks == 0 || self.difficulty > 63 {
            return invalid("need T ≥ 1 and d ≤ 63");
        }
        Ok(())
    }
}

/// Expected compression calls and cost ratios of a strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostReport {
    /// `T + 2^d·L`.
    pub calls_honest: f64,
    pub calls_cheater: f64,
    /// Cheater time-area product over the honest one, both phases weighted by
    /// the time ratio and divided by `gamma`.
    pub at_ratio: f64,
    /// Chance that no opening hits an inconsistent block, `(1-ε)^L`.
    pub gamma: f64,
    /// Latency factor while filling memory.
    pub depth_penalty: f64,
    /// Latency factor while searching nonces.
    pub depth_penalty_search: f64,
}

/// Relative time-area product `α·D(α) + β·C(α)` of running with a fraction
/// `α` of the memory on cores of relative area `β`.
pub fn at_ratio(params: &CheatParams, table: &TradeoffTable) -> Result<f64> {
    params.validate()?;
    let p = table.interpolate(params.alpha)?;
    Ok(params.alpha * p.d + params.beta * p.c)
}

/// `C·bw/bw_max`: how deep a recomputation must be when memory bandwidth caps
/// the number of cores that can work in parallel.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn bandwidth_depth_bound(c: f64, bw: f64, bw_max: f64) -> Result<f64> {
    if !(bw_max > 0.0) || !(bw >= 0.0) || !(c >= 0.0) {
        return invalid("need bw_max > 0 and non-negative penalty and bandwidth");
    }
    Ok(c * bw / bw_max)
}

/// Extra calls per chunk spent steering skewed blocks: `(α+ε)^(-δ/ε)`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn per_chunk_skew(alpha: f64, epsilon: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Ok(1.0);
    }
    if !(epsilon > 0.0) || !(alpha + epsilon > 0.0) {
        return invalid("δ > 0 requires ε > 0");
    }
    Ok((alpha + epsilon).powf(-delta / epsilon))
}

/// Per-block cost of each phase, before dividing by `gamma`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PhaseCosts {
    pub c: f64,
    pub d: f64,
    /// Skew calls added per block while filling, `ε·(α+ε)^(-δ/ε)`.
    pub skew_fill: f64,
    /// Skew calls added per looked-up block, `δ²/(2ε)`.
    pub skew_search: f64,
}

impl PhaseCosts {
    /// Both skew terms are zero without skewed blocks.
    pub fn new(alpha: f64, epsilon: f64, delta: f64, table: &TradeoffTable) -> Self {
        let p = table.at_inverse(1.0 / (alpha + epsilon + delta).min(1.0));
        let (skew_fill, skew_search) = if delta == 0.0 {
            (0.0, 0.0)
        } else {
            let ln = epsilon.ln() - (delta / epsilon) * (alpha + epsilon).ln();
            (ln.min(700.0).exp(), delta * delta / (2.0 * epsilon))
        };
        Self { c: p.c, d: p.d, skew_fill, skew_search }
    }

    /// Time-area of filling, relative to honest.
    pub fn fill_at(&self, alpha: f64, beta: f64) -> f64 {
        alpha * self.d + beta * (self.c + self.skew_fill)
    }

    /// Time-area of one search step, relative to honest.
    pub fn search_at(&self, alpha: f64, beta: f64) -> f64 {
        alpha * (self.d + self.skew_search) + beta * (self.c + self.skew_search)
    }
}

/// Expected calls to the compression function for a cheater storing `α`,
/// forging `ε` and skewing `δ` of the blocks, restarted until the openings
/// miss every forged block.
pub fn cheater_calls(params: &CheatParams, table: &TradeoffTable) -> Result<CostReport> {
    params.validate()?;
    let (alpha, eps) = (params.alpha, params.epsilon);
    let costs = PhaseCosts::new(alpha, eps, params.delta, table);
    let t = params.blocks as f64;
    let search = (params.difficulty as f64).exp2() * params.length as f64;
    let gamma = (1.0 - eps).powi(params.length as i32);
    let calls_cheater = ((costs.c + costs.skew_fill) * t + search * (costs.c + costs.skew_search)) / gamma;
    let r = params.ratio;
    let at = (costs.fill_at(alpha, params.beta) + r * costs.search_at(alpha, params.beta)) / ((1.0 + r) * gamma);
    Ok(CostReport {
        calls_honest: t + search,
        calls_cheater,
        at_ratio: at,
        gamma,
        depth_penalty: costs.d,
        depth_penalty_search: costs.d + costs.skew_search,
    })
}
