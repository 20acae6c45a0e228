//! Attacker economics: time-area costs of tradeoff and cheating strategies,
//! the number of openings that neutralises them, and desk-scale simulations of
//! parallel filling, grinding and detection.

mod detection;
mod formulas;
mod grinding;
mod itsuku;
mod optimal;
mod table;
mod timelock;

pub use detection::{simulate_detection, DetectionReport};
pub use formulas::{
    at_ratio, bandwidth_depth_bound, cheater_calls, per_chunk_skew, CheatParams, CostReport, DEFAULT_BETA,
};
pub use grinding::{simulate_grinding, GrindingReport};
pub use itsuku::{itsuku_minimize, itsuku_overhead, itsuku_search_overhead, ItsukuOptimum};
pub use optimal::{
    length_table, optimal_length, LengthTable, StrategyGrid, MAX_LENGTH, TABLE_ADVANTAGES, TABLE_RATIOS,
};
pub use table::{interpolate_cd, Penalties, TradeoffPoint, TradeoffTable};
pub use timelock::{
    parallel_inconsistency, parallel_inconsistency_expected, parallel_inconsistency_limit, simulate_parallel_fill,
};
