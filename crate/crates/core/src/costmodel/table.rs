use serde::Serialize;

use crate::error::{invalid, Error, Result};

const PUBLISHED: &str = include_str!("../../data/tradeoff_table_v1.csv");

/// Exponent cap when extrapolating `ln C`, keeping `C` finite.
const MAX_LN_C: f64 = 700.0;

/// One row of penalties at memory fraction `1 / alpha_inv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub alpha_inv: f64,
    /// Computation penalty `C(α)`.
    pub c: f64,
    /// Depth penalty `D(α)`.
    pub d: f64,
}

impl TradeoffPoint {
    pub fn alpha(&self) -> f64 {
        1.0 / self.alpha_inv
    }
}

/// Interpolated penalties at some memory fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Penalties {
    pub c: f64,
    pub d: f64,
    /// The fraction lies below the smallest tabulated one.
    pub extrapolated: bool,
}

/// Time and computation penalties of the best known tradeoff attack, sorted
/// by decreasing memory fraction and always starting with the honest point
/// `C(1) = D(1) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffTable {
    points: Vec<TradeoffPoint>,
}

impl TradeoffTable {
    /// The shipped Argon2d data.
    pub fn published() -> Self {
        Self::parse_csv(PUBLISHED).expect("shipped table is well formed")
    }

    /// Reads `alpha_inv,c,d` rows; `#` lines and the header are skipped.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("alpha_inv") {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidArgument(format!("table line {}: {e}", n + 1)))?;
            let [alpha_inv, c, d] = fields[..] else {
                return invalid(format!("table line {}: expected 3 fields", n + 1));
            };
            points.push(TradeoffPoint { alpha_inv, c, d });
        }
        Self::new(points)
    }

    /// Sorts the points, adds the honest anchor if absent and checks that both
    /// penalties grow as memory shrinks.
    pub fn new(mut points: Vec<TradeoffPoint>) -> Result<Self> {
        for p in &points {
            if !(p.alpha_inv.is_finite() && p.alpha_inv >= 1.0) {
                return invalid(format!("memory fraction 1/{} outside (0, 1]", p.alpha_inv));
            }
            if !(p.c.is_finite() && p.c > 0.0 && p.d.is_finite() && p.d > 0.0) {
                return invalid("penalties must be positive and finite");
            }
        }
        if !points.iter().any(|p| p.alpha_inv == 1.0) {
            points.push(TradeoffPoint { alpha_inv: 1.0, c: 1.0, d: 1.0 });
        }
        points.sort_by(|a, b| a.alpha_inv.total_cmp(&b.alpha_inv));
        for w in points.windows(2) {
            if w[0].alpha_inv == w[1].alpha_inv {
                return invalid(format!("duplicate row at 1/{}", w[0].alpha_inv));
            }
            if w[1].c < w[0].c || w[1].d < w[0].d {
                return invalid(format!("penalties decrease between 1/{} and 1/{}", w[0].alpha_inv, w[1].alpha_inv));
            }
        }
        if points.len() < 2 {
            return invalid("table needs at least one row besides the honest anchor");
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[TradeoffPoint] {
        &self.points
    }

    /// `C(a)` and `D(a)`: `ln C` and `D` are linear in `1/a` between rows and
    /// beyond the last one.
    pub fn interpolate(&self, a: f64) -> Result<Penalties> {
        if !(a > 0.0 && a <= 1.0) {
            return invalid(format!("memory fraction {a} outside (0, 1]"));
        }
        Ok(self.at_inverse(1.0 / a))
    }

    /// Same as [`interpolate`](Self::interpolate) keyed by `x = 1/a ≥ 1`.
    pub(crate) fn at_inverse(&self, x: f64) -> Penalties {
        let pts = &self.points;
        // Rows are matched up to rounding so that `1/(1/k)` lands on row `k`.
        if let Some(p) = pts.iter().find(|p| (p.alpha_inv - x).abs() <= 1e-12 * x) {
            return Penalties { c: p.c, d: p.d, extrapolated: false };
        }
        let last = pts.len() - 1;
        let k = pts.partition_point(|p| p.alpha_inv < x).clamp(1, last);
        let (lo, hi) = (&pts[k - 1], &pts[k]);
        let t = (x - lo.alpha_inv) / (hi.alpha_inv - lo.alpha_inv);
        let ln_c = lo.c.ln() + t * (hi.c.ln() - lo.c.ln());
        Penalties {
            c: ln_c.min(MAX_LN_C).exp(),
            d: lo.d + t * (hi.d - lo.d),
            extrapolated: x > pts[last].alpha_inv,
        }
    }
}

impl Default for TradeoffTable {
    fn default() -> Self {
        Self::published()
    }
}

/// [`TradeoffTable::interpolate`] as a pair.
pub fn interpolate_cd(table: &TradeoffTable, a: f64) -> Result<(f64, f64)> {
    table.interpolate(a).map(|p| (p.c, p.d))
}
