use super::bundle::Bundle;
use super::valuation::{Valuation, MAX_TABLE_ITEMS};
use super::AuctionError;

/// Surplus ties closer than this (relative to the largest magnitude) count
/// as equal.
pub const SURPLUS_TOL: f64 = 1e-9;

fn check_prices(prices: &[f64]) -> Result<(), AuctionError> {
    if prices.len() > MAX_TABLE_ITEMS {
        return Err(AuctionError::TooManyItems {
            k: prices.len(),
            max: MAX_TABLE_ITEMS,
        });
    }
    if let Some(j) = prices.iter().position(|p| !p.is_finite() || *p < 0.0) {
        return Err(AuctionError::InvalidPrices(format!(
            "price of item {} must be finite and nonnegative",
            j + 1
        )));
    }
    Ok(())
}

/// `Σ_{j∈U} p_j` for every mask.
pub(crate) fn price_table(prices: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << prices.len()];
    for mask in 1..out.len() {
        out[mask] = out[mask & (mask - 1)] + prices[mask.trailing_zeros() as usize];
    }
    out
}

/// Maximum surplus and its maximizers (lexicographically sorted) over
/// mask-indexed value and price tables.
pub(crate) fn argmax_surplus(values: &[f64], costs: &[f64]) -> (f64, Vec<Bundle>) {
    let surplus = |m: usize| values[m] - costs[m];
    let best = (0..values.len()).map(surplus).fold(f64::NEG_INFINITY, f64::max);
    let scale = (0..values.len())
        .map(|m| values[m].abs().max(costs[m].abs()))
        .fold(1.0, f64::max);
    let mut winners: Vec<Bundle> = (0..values.len())
        .filter(|&m| surplus(m) >= best - SURPLUS_TOL * scale)
        .map(|m| Bundle::from_mask(m as u32))
        .collect();
    winners.sort();
    (best, winners)
}

/// All bundles maximizing `V(U) - Σ_{j∈U} p_j`, by exhaustive enumeration,
/// sorted lexicographically. The empty bundle is always a candidate.
pub fn demand_correspondence(val: &Valuation, prices: &[f64]) -> Result<Vec<Bundle>, AuctionError> {
    check_prices(prices)?;
    let values = val.value_table(prices.len())?;
    Ok(argmax_surplus(&values, &price_table(prices)).1)
}

/// Maximum surplus at `prices`.
pub fn max_surplus(val: &Valuation, prices: &[f64]) -> Result<f64, AuctionError> {
    check_prices(prices)?;
    let values = val.value_table(prices.len())?;
    Ok(argmax_surplus(&values, &price_table(prices)).0)
}
