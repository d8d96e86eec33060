use serde::{Deserialize, Serialize};

use super::bundle::Bundle;
use super::demand::{argmax_surplus, price_table};
use super::valuation::{Valuation, MAX_TABLE_ITEMS};
use super::{AuctionError, CapacityItem};

/// Cap on the number of item-to-bidder assignments enumerated for the
/// welfare optimum.
pub const MAX_ASSIGNMENTS: f64 = (1u64 << 24) as f64;

const PRICE_TOL: f64 = 1e-9;

/// `V(U) - ε |U \ allocated|`.
pub fn modified_valuation(val: &Valuation, allocated: Bundle, epsilon: f64, u: Bundle) -> Result<f64, AuctionError> {
    Ok(val.value(u)? - epsilon * u.difference(allocated).len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeReport {
    pub holds: bool,
    pub per_bidder_max_surplus: Vec<f64>,
    pub per_bidder_allocated_surplus: Vec<f64>,
    /// Surplus-maximizing bundles per bidder, lexicographically sorted.
    pub maximizers: Vec<Vec<Bundle>>,
    pub violations: Vec<String>,
    /// Bid increment used for the modified valuations, if any.
    pub epsilon: Option<f64>,
}

fn check_allocation(k: usize, m: usize, allocation: &[Bundle]) -> Result<(), AuctionError> {
    if allocation.len() != m {
        return Err(AuctionError::InvalidAllocation(format!(
            "{} bundles for {m} bidders",
            allocation.len()
        )));
    }
    let all = Bundle::full(k);
    let mut seen = Bundle::EMPTY;
    for (b, u) in allocation.iter().enumerate() {
        if !u.is_subset_of(all) {
            return Err(AuctionError::InvalidAllocation(format!("bidder {} holds an unknown item", b + 1)));
        }
        if !u.is_disjoint(seen) {
            return Err(AuctionError::InvalidAllocation(format!(
                "bidder {} shares items with another bidder",
                b + 1
            )));
        }
        seen = seen.union(*u);
    }
    Ok(())
}

fn value_tables(k: usize, bidders: &[Valuation]) -> Result<Vec<Vec<f64>>, AuctionError> {
    if k > MAX_TABLE_ITEMS {
        return Err(AuctionError::TooManyItems { k, max: MAX_TABLE_ITEMS });
    }
    bidders.iter().map(|v| v.value_table(k)).collect()
}

/// Checks that every bidder's bundle maximizes its surplus at `prices` and
/// that every unallocated item is priced at zero. With `epsilon`, surpluses
/// use the modified valuations `V(U) - ε |U \ U*_b|`.
pub fn verify_ce(
    items: &[CapacityItem],
    bidders: &[Valuation],
    prices: &[f64],
    allocation: &[Bundle],
    epsilon: Option<f64>,
) -> Result<CeReport, AuctionError> {
    let k = items.len();
    if prices.len() != k {
        return Err(AuctionError::InvalidPrices(format!("{} prices for {k} items", prices.len())));
    }
    if prices.iter().any(|p| !p.is_finite()) {
        return Err(AuctionError::InvalidPrices("prices must be finite".into()));
    }
    if let Some(e) = epsilon {
        if !(e.is_finite() && e >= 0.0) {
            return Err(AuctionError::InvalidConfig(format!("bid increment {e} must be nonnegative")));
        }
    }
    check_allocation(k, bidders.len(), allocation)?;
    let tables = value_tables(k, bidders)?;
    let costs = price_table(prices);

    let mut report = CeReport {
        holds: true,
        per_bidder_max_surplus: Vec::new(),
        per_bidder_allocated_surplus: Vec::new(),
        maximizers: Vec::new(),
        violations: Vec::new(),
        epsilon,
    };
    for (b, (values, &mine)) in tables.iter().zip(allocation).enumerate() {
        let values: Vec<f64> = match epsilon {
            None => values.clone(),
            Some(e) => values
                .iter()
                .enumerate()
                .map(|(u, v)| v - e * Bundle::from_mask(u as u32).difference(mine).len() as f64)
                .collect(),
        };
        let (best, winners) = argmax_surplus(&values, &costs);
        let own = values[mine.mask() as usize] - costs[mine.mask() as usize];
        if !winners.contains(&mine) {
            report.holds = false;
            report.violations.push(format!(
                "bidder {}: allocated {mine} yields surplus {own} but {} yields {best}",
                b + 1,
                winners[0]
            ));
        }
        report.per_bidder_max_surplus.push(best);
        report.per_bidder_allocated_surplus.push(own);
        report.maximizers.push(winners);
    }
    let taken = allocation.iter().fold(Bundle::EMPTY, |acc, u| acc.union(*u));
    for j in Bundle::full(k).difference(taken).items() {
        if prices[j].abs() > PRICE_TOL {
            report.holds = false;
            report
                .violations
                .push(format!("item {} is unallocated but priced at {}", j + 1, prices[j]));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub optimal_welfare: f64,
    pub achieved_welfare: f64,
    pub gap: f64,
    /// One welfare-maximizing allocation.
    pub optimal_allocation: Vec<Bundle>,
}

/// Welfare of `allocation` against the best assignment of each item to a
/// bidder or to nobody, found by exhaustive enumeration.
pub fn efficiency_gap(
    items: &[CapacityItem],
    bidders: &[Valuation],
    allocation: &[Bundle],
) -> Result<EfficiencyReport, AuctionError> {
    let k = items.len();
    let m = bidders.len();
    let count = ((m + 1) as f64).powi(k as i32);
    if count > MAX_ASSIGNMENTS {
        return Err(AuctionError::TooLarge {
            count,
            max: MAX_ASSIGNMENTS,
        });
    }
    check_allocation(k, m, allocation)?;
    let tables = value_tables(k, bidders)?;
    let welfare = |alloc: &[Bundle]| -> f64 { alloc.iter().zip(&tables).map(|(u, t)| t[u.mask() as usize]).sum() };

    // odometer over owner[j] in 0..=m, where m means unassigned
    let mut owner = vec![m; k];
    let mut bundles = vec![Bundle::EMPTY; m + 1];
    bundles[m] = Bundle::full(k);
    let mut best = welfare(&bundles[..m]);
    let mut best_alloc = bundles[..m].to_vec();
    loop {
        let mut j = 0;
        while j < k {
            let old = owner[j];
            let new = if old == m { 0 } else { old + 1 };
            bundles[old] = bundles[old].without(j);
            bundles[new] = bundles[new].with(j);
            owner[j] = new;
            if new != m {
                break;
            }
            j += 1;
        }
        if j == k {
            break;
        }
        let w = welfare(&bundles[..m]);
        if w > best {
            best = w;
            best_alloc = bundles[..m].to_vec();
        }
    }
    let achieved = welfare(allocation);
    Ok(EfficiencyReport {
        optimal_welfare: best,
        achieved_welfare: achieved,
        gap: best - achieved,
        optimal_allocation: best_alloc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(items: &[usize]) -> Bundle {
        Bundle::from_one_based(items).unwrap()
    }

    fn items(k: usize) -> Vec<CapacityItem> {
        (0..k).map(|j| CapacityItem::firm(1.0, j + 2).unwrap()).collect()
    }

    fn example_one() -> Vec<Valuation> {
        vec![
            Valuation::additive(vec![20.0, 0.0, 30.0, 15.0]).unwrap(),
            Valuation::additive(vec![30.0, 20.0, 10.0, 10.0]).unwrap(),
        ]
    }

    #[test]
    fn modified_values() {
        let v = &example_one()[0];
        assert_eq!(modified_valuation(v, b(&[3, 4]), 5.0, b(&[1, 3])).unwrap(), 45.0);
        assert_eq!(modified_valuation(v, b(&[3, 4]), 5.0, b(&[3, 4])).unwrap(), 45.0);
    }

    #[test]
    fn example_one_equilibrium() {
        let r = verify_ce(
            &items(4),
            &example_one(),
            &[20.0, 5.0, 10.0, 5.0],
            &[b(&[3, 4]), b(&[1, 2])],
            Some(5.0),
        )
        .unwrap();
        assert!(r.holds, "{:?}", r.violations);
        assert_eq!(r.per_bidder_max_surplus, vec![30.0, 25.0]);
        assert_eq!(r.maximizers[0], vec![b(&[3, 4])]);
        assert!(r.maximizers[1].contains(&b(&[1, 2])));
    }

    #[test]
    fn priced_unallocated_item_fails() {
        let v = vec![Valuation::additive(vec![5.0, 1.0]).unwrap()];
        let r = verify_ce(&items(2), &v, &[0.0, 3.0], &[b(&[1])], None).unwrap();
        assert!(!r.holds);
        assert_eq!(r.violations.len(), 1);
        assert!(r.violations[0].contains("item 2"));
    }

    #[test]
    fn overlapping_allocation_rejected() {
        assert!(matches!(
            verify_ce(&items(4), &example_one(), &[0.0; 4], &[b(&[1]), b(&[1, 2])], None),
            Err(AuctionError::InvalidAllocation(_))
        ));
    }

    #[test]
    fn example_one_efficiency() {
        let r = efficiency_gap(&items(4), &example_one(), &[b(&[3, 4]), b(&[1, 2])]).unwrap();
        assert_eq!(r.optimal_welfare, 95.0);
        assert_eq!(r.achieved_welfare, 95.0);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn single_bidder_takes_everything_valuable() {
        let v = vec![Valuation::additive(vec![3.0, 0.0, 2.0]).unwrap()];
        let r = efficiency_gap(&items(3), &v, &[b(&[1, 3])]).unwrap();
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn enumeration_guard() {
        let v: Vec<Valuation> = (0..7).map(|_| Valuation::symmetric_concave(vec![0.0, 1.0]).unwrap()).collect();
        assert!(matches!(
            efficiency_gap(&items(9), &v, &[Bundle::EMPTY; 7]),
            Err(AuctionError::TooLarge { .. })
        ));
    }
}
