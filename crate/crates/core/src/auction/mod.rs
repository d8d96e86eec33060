//! Simultaneous ascending auction over indivisible capacity products, with
//! demand, equilibrium, efficiency and gross-substitutes checks.
//!
//! Items and bidders are 0-based in the API; bundles display and serialize
//! with 1-based item numbers.

mod bundle;
mod demand;
mod equilibrium;
pub mod golden;
mod gs;
mod saa;
mod valuation;

pub use bundle::{Bundle, MAX_BUNDLE_ITEMS};
pub use demand::{demand_correspondence, max_surplus, SURPLUS_TOL};
pub use equilibrium::{
    efficiency_gap, modified_valuation, verify_ce, CeReport, EfficiencyReport, MAX_ASSIGNMENTS,
};
pub use gs::{check_gross_substitutes, gs_violation, GsCounterexample, GsReport, MAX_GS_ITEMS};
pub use saa::{run_saa, AuctionConfig, AuctionOutcome, AuctionState, BidRecord, DEFAULT_MAX_ROUNDS};
pub use valuation::{eval_valuation, Valuation, MAX_TABLE_ITEMS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::CapacitySolution;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuctionError {
    #[error("{k} items exceed the limit of {max}")]
    TooManyItems { k: usize, max: usize },
    #[error("item {item} is outside the valuation's item set")]
    UnknownItem { item: usize },
    #[error("invalid valuation: {0}")]
    InvalidValuation(String),
    #[error("invalid prices: {0}")]
    InvalidPrices(String),
    #[error("invalid item: {0}")]
    InvalidItem(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
    #[error("exhaustive search over {count} assignments exceeds the limit of {max}")]
    TooLarge { count: f64, max: f64 },
    #[error("no quiet round within {} rounds", .0.round)]
    RoundLimitExceeded(Box<AuctionState>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Firm,
    #[serde(rename = "flex")]
    Flexible,
}

/// One capacity product: an amount at a bus with a blackout risk level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ItemRepr")]
pub struct CapacityItem {
    /// MW.
    pub capacity: f64,
    /// Interruption risk `r = 1 - α`; zero for firm products.
    pub risk: f64,
    /// 1-based bus number.
    pub location: usize,
    pub kind: ItemKind,
}

#[derive(Deserialize)]
struct ItemRepr {
    capacity: f64,
    #[serde(default)]
    risk: f64,
    location: usize,
    kind: ItemKind,
}

impl TryFrom<ItemRepr> for CapacityItem {
    type Error = AuctionError;

    fn try_from(r: ItemRepr) -> Result<Self, Self::Error> {
        CapacityItem::new(r.capacity, r.risk, r.location, r.kind)
    }
}

impl CapacityItem {
    pub fn new(capacity: f64, risk: f64, location: usize, kind: ItemKind) -> Result<Self, AuctionError> {
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(AuctionError::InvalidItem(format!("capacity {capacity} must be positive")));
        }
        if !(0.0..=1.0).contains(&risk) {
            return Err(AuctionError::InvalidItem(format!("risk {risk} must lie in [0, 1]")));
        }
        if kind == ItemKind::Firm && risk != 0.0 {
            return Err(AuctionError::InvalidItem("firm items carry zero risk".into()));
        }
        if location == 0 {
            return Err(AuctionError::InvalidItem("locations are 1-based bus numbers".into()));
        }
        Ok(Self {
            capacity,
            risk,
            location,
            kind,
        })
    }

    pub fn firm(capacity: f64, location: usize) -> Result<Self, AuctionError> {
        Self::new(capacity, 0.0, location, ItemKind::Firm)
    }

    pub fn flexible(capacity: f64, risk: f64, location: usize) -> Result<Self, AuctionError> {
        Self::new(capacity, risk, location, ItemKind::Flexible)
    }
}

/// Products offered from a firm solution and, optionally, the incremental
/// part of a flexible one: one firm item per bus with `c^f_i > min_capacity`
/// and one flexible item per bus with `c^r_i - c^f_i > min_capacity`.
pub fn items_from_capacity(
    firm: &CapacitySolution,
    flexible: Option<&CapacitySolution>,
    min_capacity: f64,
) -> Vec<CapacityItem> {
    let mut items = Vec::new();
    for (i, &c) in firm.c.iter().enumerate() {
        if c > min_capacity {
            items.push(CapacityItem::firm(c, i + 1).expect("positive capacity"));
        }
    }
    if let Some(flex) = flexible {
        let risk = flex.alpha.map(|a| 1.0 - a).unwrap_or(0.0);
        for (i, inc) in flex.incremental_over(firm).into_iter().enumerate() {
            if inc > min_capacity {
                items.push(CapacityItem::flexible(inc, risk, i + 1).expect("positive capacity"));
            }
        }
    }
    items
}
