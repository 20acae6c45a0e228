use serde::Serialize;

use crate::error::{invalid, Result};

const SEARCH_LOW: f64 = 0.01;
const SEARCH_HIGH: f64 = 0.99;
const TOLERANCE: f64 = 1e-4;

/// Cost of the low-memory attack on Itsuku at the minimising `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ItsukuOptimum {
    pub epsilon: f64,
    /// Fill-phase overhead.
    pub overhead: f64,
    /// Search-phase recomputation penalty.
    pub search_overhead: f64,
}

fn check(e: f64) -> Result<()> {
    if !(e > 0.0 && e < 1.0) {
        return invalid(format!("fraction {e} outside (0, 1)"));
    }
    Ok(())
}

fn ln_overhead(e: f64) -> f64 {
    (2.0 - 2.0 / e) * e.ln() - 9.0 * (1.0 - e).ln()
}

/// Fill overhead of a memoryless attacker forging every `1/e`-th block:
/// `e^(2 - 2/e) / (1-e)^9`.
pub fn itsuku_overhead(e: f64) -> Result<f64> {
    check(e)?;
    Ok(ln_overhead(e).exp())
}

/// Search overhead `2/e²`.
pub fn itsuku_search_overhead(e: f64) -> Result<f64> {
    check(e)?;
    Ok(2.0 / (e * e))
}

/// Golden-section minimisation of the fill overhead over `(0.01, 0.99)`.
pub fn itsuku_minimize() -> ItsukuOptimum {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (SEARCH_LOW, SEARCH_HIGH);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (ln_overhead(x1), ln_overhead(x2));
    while b - a > TOLERANCE {
        if f1 < f2 {
            b = x2;
            (x2, f2) = (x1, f1);
            x1 = b - inv_phi * (b - a);
            f1 = ln_overhead(x1);
        } else {
            a = x1;
            (x1, f1) = (x2, f2);
            x2 = a + inv_phi * (b - a);
            f2 = ln_overhead(x2);
        }
    }
    let e = (a + b) / 2.0;
    ItsukuOptimum { epsilon: e, overhead: ln_overhead(e).exp(), search_overhead: 2.0 / (e * e) }
}
