use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};

use super::formulas::{PhaseCosts, DEFAULT_BETA};
use super::table::TradeoffTable;

/// Largest `L` considered.
pub const MAX_LENGTH: u32 = 2000;

/// Rows and columns of the classic `L` table: tolerated advantage by time ratio.
pub const TABLE_ADVANTAGES: [f64; 5] = [2.0, 4.0, 8.0, 16.0, 32.0];
pub const TABLE_RATIOS: [f64; 5] = [0.1, 1.0, 10.0, 100.0, 1000.0];

/// The strategies searched over:
///
/// * `α` in steps of 0.01 over `[0, 1]`,
/// * `ε` in steps of 0.001 over `[0.001, 0.019]` and 0.01 over `[0.02, 0.5]`,
/// * `δ` in steps of 0.01 over `[0, 1]`,
///
/// keeping `0 < α + ε + δ ≤ 1`. `ε = 0` is left out: without forged blocks
/// the advantage `1/(αD(α) + βC(α))` does not depend on `L`.
pub struct StrategyGrid {
    /// `(fill cost, search cost, ln(1 - ε))` per strategy.
    points: Vec<(f64, f64, f64)>,
}

impl StrategyGrid {
    pub fn new(table: &TradeoffTable, beta: f64) -> Self {
        let epsilons = (1..20).map(|k| k as f64 / 1000.0).chain((2..=50).map(|k| k as f64 / 100.0));
        let mut points = Vec::new();
        for eps in epsilons {
            for a in 0..=100 {
                let alpha = a as f64 / 100.0;
                for dl in 0..=100 {
                    let delta = dl as f64 / 100.0;
                    if alpha + eps + delta > 1.0 + 1e-9 {
                        break;
                    }
                    let c = PhaseCosts::new(alpha, eps, delta, table);
                    points.push((c.fill_at(alpha, beta), c.search_at(alpha, beta), (1.0 - eps).ln()));
                }
            }
        }
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Best time-area advantage over the grid for `L` openings: honest cost
    /// `1 + ratio` over the cheater's `(fill + ratio·search) / (1-ε)^L`.
    pub fn max_advantage(&self, length: u32, ratio: f64) -> f64 {
        let l = length as f64;
        self.points
            .par_iter()
            .map(|&(fill, search, ln_keep)| (1.0 + ratio) * (l * ln_keep).exp() / (fill + ratio * search))
            .reduce(|| 0.0, f64::max)
    }

    /// Smallest `L ≤ MAX_LENGTH` keeping every strategy's advantage below
    /// `max_advantage`.
    pub fn optimal_length(&self, ratio: f64, max_advantage: f64) -> Result<u32> {
        if !(ratio > 0.0 && ratio.is_finite()) || !(max_advantage > 1.0 && max_advantage.is_finite()) {
            return invalid("need ratio > 0 and tolerated advantage > 1");
        }
        if self.max_advantage(MAX_LENGTH, ratio) >= max_advantage {
            return invalid(format!("no L up to {MAX_LENGTH} keeps the advantage below {max_advantage}"));
        }
        let (mut lo, mut hi) = (1, MAX_LENGTH);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.max_advantage(mid, ratio) < max_advantage {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(lo)
    }
}

/// Smallest number of openings that keeps a cheater's time-area advantage
/// below `max_advantage` when search takes `ratio` times as long as filling.
pub fn optimal_length(ratio: f64, max_advantage: f64, table: &TradeoffTable) -> Result<u32> {
    StrategyGrid::new(table, DEFAULT_BETA).optimal_length(ratio, max_advantage)
}

/// `L` for every cell of [`TABLE_ADVANTAGES`] × [`TABLE_RATIOS`].
#[derive(Debug, Clone, Serialize)]
pub struct LengthTable {
    pub advantages: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `rows[i][j]` answers advantage `i`, ratio `j`.
    pub rows: Vec<Vec<u32>>,
}

pub fn length_table(table: &TradeoffTable) -> Result<LengthTable> {
    let grid = StrategyGrid::new(table, DEFAULT_BETA);
    let rows = TABLE_ADVANTAGES
        .iter()
        .map(|&adv| TABLE_RATIOS.iter().map(|&r| grid.optimal_length(r, adv)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(LengthTable { advantages: TABLE_ADVANTAGES.to_vec(), ratios: TABLE_RATIOS.to_vec(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PUBLISHED: [[u32; 5]; 5] =
        [[75, 80, 92, 108, 125], [66, 70, 82, 96, 111], [57, 61, 71, 84, 97], [49, 52, 61, 73, 85], [41, 44, 52, 63, 73]];

    #[test]
    fn reproduces_the_published_lengths() {
        let t = length_table(&TradeoffTable::published()).unwrap();
        for (row, expect) in t.rows.iter().zip(PUBLISHED) {
            for (&l, e) in row.iter().zip(expect) {
                assert!(l.abs_diff(e) <= 2, "{:?}", t.rows);
            }
        }
        for row in &t.rows {
            assert!(row.windows(2).all(|w| w[0] < w[1]));
        }
        for j in 0..5 {
            assert!(t.rows.windows(2).all(|w| w[0][j] > w[1][j]));
        }
    }

    #[test]
    fn result_is_the_smallest_safe_length() {
        let grid = StrategyGrid::new(&TradeoffTable::published(), DEFAULT_BETA);
        let l = grid.optimal_length(10.0, 8.0).unwrap();
        assert!(grid.max_advantage(l, 10.0) < 8.0);
        assert!(grid.max_advantage(l - 1, 10.0) >= 8.0);
    }

    #[test]
    fn rejects_bad_targets() {
        let grid = StrategyGrid::new(&TradeoffTable::published(), DEFAULT_BETA);
        assert!(grid.optimal_length(0.0, 8.0).is_err());
        assert!(grid.optimal_length(1.0, 1.0).is_err());
    }
}
