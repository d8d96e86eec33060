//! Two worked four-item, two-bidder auctions with their published final
//! prices, allocations and modified-surplus tables (bid increment 5).
//!
//! Case one uses additive bidders, case two symmetric concave ones. Each
//! table row lists `U`, `V_b(U)`, `ε|U \ U*_b|`, `p*(U)` and the modified
//! surplus `V̂_b(U) - p*(U)`.

use serde::{Deserialize, Serialize};

use super::bundle::Bundle;
use super::equilibrium::modified_valuation;
use super::valuation::Valuation;
use super::{AuctionError, CapacityItem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurplusRow {
    pub bundle: Bundle,
    pub value: i64,
    pub penalty: i64,
    pub price: i64,
    pub surplus: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurplusTable {
    /// 0-based bidder.
    pub bidder: usize,
    pub allocated: Bundle,
    pub rows: Vec<SurplusRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkedCase {
    pub name: String,
    pub epsilon: f64,
    pub prices: Vec<f64>,
    pub allocation: Vec<Bundle>,
    pub bidders: Vec<Valuation>,
    pub tables: Vec<SurplusTable>,
}

impl WorkedCase {
    /// Four unit firm items at buses 2 to 5.
    pub fn items(&self) -> Vec<CapacityItem> {
        (0..self.prices.len())
            .map(|j| CapacityItem::firm(1.0, j + 2).expect("positive capacity"))
            .collect()
    }

    pub fn row_count(&self) -> usize {
        self.tables.iter().map(|t| t.rows.len()).sum()
    }
}

type Row = (&'static [usize], i64, i64, i64, i64);

fn table(bidder: usize, allocated: &[usize], rows: &[Row]) -> SurplusTable {
    SurplusTable {
        bidder,
        allocated: Bundle::from_one_based(allocated).expect("item numbers"),
        rows: rows
            .iter()
            .map(|&(u, value, penalty, price, surplus)| SurplusRow {
                bundle: Bundle::from_one_based(u).expect("item numbers"),
                value,
                penalty,
                price,
                surplus,
            })
            .collect(),
    }
}

/// Additive bidders `v₁ = (20,0,30,15)`, `v₂ = (30,20,10,10)`; prices
/// `(20,5,10,5)`; allocation `({3,4}, {1,2})`. Bidder 1's table omits
/// bundles containing item 2, which it values at zero.
pub fn case_one() -> WorkedCase {
    WorkedCase {
        name: "additive".into(),
        epsilon: 5.0,
        prices: vec![20.0, 5.0, 10.0, 5.0],
        allocation: vec![Bundle::from_items([2, 3]), Bundle::from_items([0, 1])],
        bidders: vec![
            Valuation::additive(vec![20.0, 0.0, 30.0, 15.0]).expect("valid"),
            Valuation::additive(vec![30.0, 20.0, 10.0, 10.0]).expect("valid"),
        ],
        tables: vec![
            table(
                0,
                &[3, 4],
                &[
                    (&[], 0, 0, 0, 0),
                    (&[1], 20, 5, 20, -5),
                    (&[3], 30, 0, 10, 20),
                    (&[4], 15, 0, 5, 10),
                    (&[1, 3], 50, 5, 30, 15),
                    (&[1, 4], 35, 5, 25, 5),
                    (&[3, 4], 45, 0, 15, 30),
                    (&[1, 3, 4], 65, 5, 35, 25),
                ],
            ),
            table(
                1,
                &[1, 2],
                &[
                    (&[], 0, 0, 0, 0),
                    (&[1], 30, 0, 20, 10),
                    (&[2], 20, 0, 5, 15),
                    (&[3], 10, 5, 10, -5),
                    (&[4], 10, 5, 5, 0),
                    (&[1, 2], 50, 0, 25, 25),
                    (&[1, 3], 40, 5, 30, 5),
                    (&[1, 4], 40, 5, 25, 10),
                    (&[2, 3], 30, 5, 15, 10),
                    (&[2, 4], 30, 5, 10, 15),
                    (&[3, 4], 20, 10, 15, -5),
                    (&[1, 2, 3], 60, 5, 35, 20),
                    (&[1, 2, 4], 60, 5, 30, 25),
                    (&[1, 3, 4], 50, 10, 35, 5),
                    (&[2, 3, 4], 40, 10, 20, 10),
                    (&[1, 2, 3, 4], 70, 10, 40, 20),
                ],
            ),
        ],
    }
}

/// Symmetric concave bidders `f₁ = (0,30,50,55,60)`, `f₂ = (0,25,45,60,65)`;
/// uniform prices 10; allocation `({2,4}, {1,3})`.
pub fn case_two() -> WorkedCase {
    WorkedCase {
        name: "symmetric_concave".into(),
        epsilon: 5.0,
        prices: vec![10.0; 4],
        allocation: vec![Bundle::from_items([1, 3]), Bundle::from_items([0, 2])],
        bidders: vec![
            Valuation::symmetric_concave(vec![0.0, 30.0, 50.0, 55.0, 60.0]).expect("valid"),
            Valuation::symmetric_concave(vec![0.0, 25.0, 45.0, 60.0, 65.0]).expect("valid"),
        ],
        tables: vec![
            table(
                0,
                &[2, 4],
                &[
                    (&[], 0, 0, 0, 0),
                    (&[1], 30, 5, 10, 15),
                    (&[2], 30, 0, 10, 20),
                    (&[3], 30, 5, 10, 15),
                    (&[4], 30, 0, 10, 20),
                    (&[1, 2], 50, 5, 20, 25),
                    (&[1, 3], 50, 10, 20, 20),
                    (&[1, 4], 50, 5, 20, 25),
                    (&[2, 3], 50, 5, 20, 25),
                    (&[2, 4], 50, 0, 20, 30),
                    (&[3, 4], 50, 5, 20, 25),
                    (&[1, 2, 3], 55, 10, 30, 15),
                    (&[1, 2, 4], 55, 5, 30, 20),
                    (&[1, 3, 4], 55, 10, 30, 15),
                    (&[2, 3, 4], 55, 5, 30, 20),
                    (&[1, 2, 3, 4], 60, 10, 40, 10),
                ],
            ),
            table(
                1,
                &[1, 3],
                &[
                    (&[], 0, 0, 0, 0),
                    (&[1], 25, 0, 10, 15),
                    (&[2], 25, 5, 10, 10),
                    (&[3], 25, 0, 10, 15),
                    (&[4], 25, 5, 10, 10),
                    (&[1, 2], 45, 5, 20, 20),
                    (&[1, 3], 45, 0, 20, 25),
                    (&[1, 4], 45, 5, 20, 20),
                    (&[2, 3], 45, 5, 20, 20),
                    (&[2, 4], 45, 10, 20, 15),
                    (&[3, 4], 45, 5, 20, 20),
                    (&[1, 2, 3], 60, 5, 30, 25),
                    (&[1, 2, 4], 60, 10, 30, 20),
                    (&[1, 3, 4], 60, 5, 30, 25),
                    (&[2, 3, 4], 60, 10, 30, 20),
                    (&[1, 2, 3, 4], 65, 10, 40, 15),
                ],
            ),
        ],
    }
}

pub fn worked_cases() -> Vec<WorkedCase> {
    vec![case_one(), case_two()]
}

/// A table row whose recomputed entries differ from the listed ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowMismatch {
    pub case: String,
    pub bidder: usize,
    pub listed: SurplusRow,
    pub recomputed: [f64; 4],
}

/// Recomputes every row from the case's valuations, prices, allocation and
/// bid increment, and returns rows that do not match exactly.
pub fn recompute_tables(case: &WorkedCase) -> Result<Vec<RowMismatch>, AuctionError> {
    let mut out = Vec::new();
    for t in &case.tables {
        let val = &case.bidders[t.bidder];
        for row in &t.rows {
            let u = row.bundle;
            let value = val.value(u)?;
            let penalty = case.epsilon * u.difference(t.allocated).len() as f64;
            let price: f64 = u.items().map(|j| case.prices[j]).sum();
            let surplus = modified_valuation(val, t.allocated, case.epsilon, u)? - price;
            let got = [value, penalty, price, surplus];
            let want = [row.value, row.penalty, row.price, row.surplus].map(|x| x as f64);
            if got != want {
                out.push(RowMismatch {
                    case: case.name.clone(),
                    bidder: t.bidder,
                    listed: *row,
                    recomputed: got,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_counts() {
        let c1 = case_one();
        let c2 = case_two();
        assert_eq!(c1.tables[0].rows.len(), 8);
        assert_eq!(c1.tables[1].rows.len(), 16);
        assert_eq!(c2.row_count(), 32);
        assert_eq!(c1.row_count() + c2.row_count(), 56);
    }

    #[test]
    fn tables_recompute_exactly() {
        for case in worked_cases() {
            assert_eq!(recompute_tables(&case).unwrap(), vec![]);
        }
    }

    #[test]
    fn allocated_rows_match_allocation() {
        for case in worked_cases() {
            for t in &case.tables {
                assert_eq!(case.allocation[t.bidder], t.allocated);
            }
        }
    }
}
