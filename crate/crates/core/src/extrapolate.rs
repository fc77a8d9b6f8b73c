//! Richardson extrapolation of ladder sequences toward a parameter → 0 limit.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Outcome of eliminating error terms from a geometric ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation {
    /// Best estimate of the limit.
    pub value: f64,
    /// |difference| of the last two entries in the final usable column.
    pub residual: f64,
    /// The full table, column by column (column 0 is the raw ladder).
    pub table: Vec<Vec<f64>>,
}

/// Richardson table for values `v_i = F(h_i)` with `h_{i+1} = h_i / ratio`.
///
/// Column `j+1` removes an error term proportional to `h^{orders[j]}`. The
/// elimination stops early so that the final column keeps two entries; its
/// last entry is the estimate and the residual is the gap between the two.
pub fn richardson(values: &[f64], ratio: f64, orders: &[f64]) -> Extrapolation {
    assert!(values.len() >= 2, "richardson needs at least two rungs");
    assert!(ratio > 1.0, "ladder ratio must exceed 1");
    let mut table = alloc::vec![values.to_vec()];
    for &p in orders {
        let prev = table.last().unwrap();
        if prev.len() <= 2 {
            break;
        }
        let factor = ratio.powf(p);
        let next: Vec<f64> = prev.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        table.push(next);
    }
    let last = table.last().unwrap();
    let n = last.len();
    Extrapolation {
        value: last[n - 1],
        residual: (last[n - 1] - last[n - 2]).abs(),
        table,
    }
}

/// Observed convergence order from errors on successive `ratio`-refinements.
pub fn observed_orders(errors: &[f64], ratio: f64) -> Vec<f64> {
    errors
        .windows(2)
        .map(|w| (w[0].abs() / w[1].abs()).ln() / ratio.ln())
        .collect()
}
