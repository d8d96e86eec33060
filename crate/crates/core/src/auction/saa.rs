use serde::{Deserialize, Serialize};

use super::bundle::Bundle;
use super::demand::{argmax_surplus, price_table};
use super::valuation::{Valuation, MAX_TABLE_ITEMS};
use super::{AuctionError, CapacityItem};

pub const DEFAULT_MAX_ROUNDS: usize = 100_000;

fn default_max_rounds() -> usize {
    DEFAULT_MAX_ROUNDS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionConfig {
    /// Minimum bid increment.
    pub epsilon: f64,
    pub items: Vec<CapacityItem>,
    pub bidders: Vec<Valuation>,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
}

impl AuctionConfig {
    pub fn new(epsilon: f64, items: Vec<CapacityItem>, bidders: Vec<Valuation>) -> Result<Self, AuctionError> {
        let cfg = Self {
            epsilon,
            items,
            bidders,
            max_rounds: DEFAULT_MAX_ROUNDS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_max_rounds(mut self, max_rounds: usize) -> Self {
        self.max_rounds = max_rounds;
        self
    }

    pub fn validate(&self) -> Result<(), AuctionError> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(AuctionError::InvalidConfig(format!("bid increment {} must be positive", self.epsilon)));
        }
        if self.items.is_empty() {
            return Err(AuctionError::InvalidConfig("at least one item is required".into()));
        }
        if self.bidders.is_empty() {
            return Err(AuctionError::InvalidConfig("at least one bidder is required".into()));
        }
        let k = self.items.len();
        if k > MAX_TABLE_ITEMS {
            return Err(AuctionError::TooManyItems { k, max: MAX_TABLE_ITEMS });
        }
        for (b, v) in self.bidders.iter().enumerate() {
            v.validate()?;
            if !v.supports(k) || (!matches!(v, Valuation::SymmetricConcave(_)) && v.n_items() != k) {
                return Err(AuctionError::InvalidConfig(format!(
                    "bidder {} values {} items but {k} are offered",
                    b + 1,
                    v.n_items()
                )));
            }
        }
        Ok(())
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }
}

/// One submitted bid (0-based bidder and item).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BidRecord {
    pub round: usize,
    pub bidder: usize,
    pub item: usize,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionState {
    /// Completed bidding rounds.
    pub round: usize,
    pub standing_price: Vec<f64>,
    pub standing_bidder: Vec<Option<usize>>,
    pub log: Vec<BidRecord>,
}

impl AuctionState {
    pub fn new(k: usize) -> Self {
        Self {
            round: 0,
            standing_price: vec![0.0; k],
            standing_bidder: vec![None; k],
            log: Vec::new(),
        }
    }

    pub fn holdings(&self, bidder: usize) -> Bundle {
        Bundle::from_items((0..self.standing_price.len()).filter(|&j| self.standing_bidder[j] == Some(bidder)))
    }

    /// Prices a straightforward bidder faces: its own standing items at the
    /// standing bid, items held by others at standing bid plus `epsilon`,
    /// and items nobody has bid on at zero.
    pub fn perceived_prices(&self, bidder: usize, epsilon: f64) -> Vec<f64> {
        self.standing_bidder
            .iter()
            .zip(&self.standing_price)
            .map(|(holder, &p)| match holder {
                Some(h) if *h == bidder => p,
                Some(_) => p + epsilon,
                None => 0.0,
            })
            .collect()
    }

    fn allocation(&self, m: usize) -> Vec<Bundle> {
        (0..m).map(|b| self.holdings(b)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub final_prices: Vec<f64>,
    /// Items each bidder stands high on at the close.
    pub allocation: Vec<Bundle>,
    pub unallocated: Bundle,
    /// Rounds in which bids were placed.
    pub rounds_used: usize,
    pub log: Vec<BidRecord>,
}

/// Bundle a bidder bids for: among its demanded bundles, one that keeps
/// everything it already stands high on if possible, otherwise the
/// lexicographically smallest.
fn choose_bundle(demanded: &[Bundle], held: Bundle) -> Bundle {
    demanded
        .iter()
        .copied()
        .find(|d| held.is_subset_of(*d))
        .unwrap_or(demanded[0])
}

/// Runs the auction with straightforward bidders until a round passes with
/// no new bid.
///
/// Each round every bidder evaluates its demand at perceived prices and bids
/// the perceived price on each item of its chosen bundle that it does not
/// already hold. Per item the highest bid becomes the standing bid; equal
/// bids go to the lowest bidder index.
pub fn run_saa(config: &AuctionConfig) -> Result<AuctionOutcome, AuctionError> {
    config.validate()?;
    let k = config.n_items();
    let m = config.bidders.len();
    let tables = config
        .bidders
        .iter()
        .map(|v| v.value_table(k))
        .collect::<Result<Vec<_>, _>>()?;
    let mut state = AuctionState::new(k);

    loop {
        let mut bids: Vec<BidRecord> = Vec::new();
        for (b, values) in tables.iter().enumerate() {
            let held = state.holdings(b);
            let prices = state.perceived_prices(b, config.epsilon);
            let (_, demanded) = argmax_surplus(values, &price_table(&prices));
            let target = choose_bundle(&demanded, held);
            for j in target.difference(held).items() {
                bids.push(BidRecord {
                    round: state.round + 1,
                    bidder: b,
                    item: j,
                    amount: prices[j],
                });
            }
        }
        if bids.is_empty() {
            return Ok(AuctionOutcome {
                final_prices: state.standing_price.clone(),
                allocation: state.allocation(m),
                unallocated: Bundle::from_items((0..k).filter(|&j| state.standing_bidder[j].is_none())),
                rounds_used: state.round,
                log: state.log,
            });
        }
        if state.round >= config.max_rounds {
            return Err(AuctionError::RoundLimitExceeded(Box::new(state)));
        }
        let mut best: Vec<Option<BidRecord>> = vec![None; k];
        for bid in &bids {
            // bids arrive in bidder order, so only a strictly higher bid displaces
            match best[bid.item] {
                Some(cur) if cur.amount >= bid.amount => {}
                _ => best[bid.item] = Some(*bid),
            }
        }
        for win in best.into_iter().flatten() {
            state.standing_price[win.item] = win.amount;
            state.standing_bidder[win.item] = Some(win.bidder);
        }
        state.round += 1;
        state.log.extend(bids);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn items(k: usize) -> Vec<CapacityItem> {
        (0..k).map(|j| CapacityItem::firm(1.0, j + 2).unwrap()).collect()
    }

    #[test]
    fn lone_bidder_wins_at_zero() {
        let cfg = AuctionConfig::new(1.0, items(1), vec![Valuation::additive(vec![10.0]).unwrap()]).unwrap();
        let out = run_saa(&cfg).unwrap();
        assert_eq!(out.final_prices, vec![0.0]);
        assert_eq!(out.allocation, vec![Bundle::singleton(0)]);
        assert_eq!(out.rounds_used, 1);
    }

    #[test]
    fn two_bidders_one_item() {
        let cfg = AuctionConfig::new(
            1.0,
            items(1),
            vec![Valuation::additive(vec![10.0]).unwrap(), Valuation::additive(vec![7.0]).unwrap()],
        )
        .unwrap();
        let out = run_saa(&cfg).unwrap();
        assert_eq!(out.allocation[0], Bundle::singleton(0));
        assert!(out.allocation[1].is_empty());
        assert!((6.0..=8.0).contains(&out.final_prices[0]));
        assert_eq!(out.final_prices[0], 6.0);

        // same bidders listed the other way round
        let swapped = AuctionConfig::new(
            1.0,
            items(1),
            vec![Valuation::additive(vec![7.0]).unwrap(), Valuation::additive(vec![10.0]).unwrap()],
        )
        .unwrap();
        let out = run_saa(&swapped).unwrap();
        assert_eq!(out.allocation[1], Bundle::singleton(0));
        assert!((6.0..=8.0).contains(&out.final_prices[0]));
    }

    #[test]
    fn round_limit_returns_state() {
        let cfg = AuctionConfig::new(
            0.5,
            items(1),
            vec![Valuation::additive(vec![10.0]).unwrap(), Valuation::additive(vec![9.0]).unwrap()],
        )
        .unwrap()
        .with_max_rounds(3);
        match run_saa(&cfg) {
            Err(AuctionError::RoundLimitExceeded(state)) => {
                assert_eq!(state.round, 3);
                assert!(state.standing_bidder[0].is_some());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn perceived_prices() {
        let mut s = AuctionState::new(3);
        s.standing_price = vec![4.0, 2.0, 0.0];
        s.standing_bidder = vec![Some(0), Some(1), None];
        assert_eq!(s.perceived_prices(0, 1.0), vec![4.0, 3.0, 0.0]);
        assert_eq!(s.perceived_prices(1, 1.0), vec![5.0, 2.0, 0.0]);
    }

    #[test]
    fn config_validation() {
        let v = || Valuation::additive(vec![1.0]).unwrap();
        assert!(AuctionConfig::new(0.0, items(1), vec![v()]).is_err());
        assert!(AuctionConfig::new(1.0, items(1), vec![]).is_err());
        assert!(AuctionConfig::new(1.0, vec![], vec![v()]).is_err());
        assert!(AuctionConfig::new(1.0, items(2), vec![v()]).is_err());
    }

    #[test]
    fn keeps_held_items_among_ties() {
        let held = Bundle::from_items([2, 3]);
        let demanded = [Bundle::from_items([0, 2, 3]), Bundle::from_items([2, 3])];
        assert_eq!(choose_bundle(&demanded, held), demanded[0]);
        let demanded = [Bundle::EMPTY, Bundle::from_items([0])];
        assert_eq!(choose_bundle(&demanded, Bundle::from_items([0])), demanded[1]);
        assert_eq!(choose_bundle(&demanded, Bundle::EMPTY), Bundle::EMPTY);
    }
}
