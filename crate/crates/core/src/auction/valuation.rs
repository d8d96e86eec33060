use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::bundle::Bundle;
use super::AuctionError;

/// Largest item count for which subset tables are built.
pub const MAX_TABLE_ITEMS: usize = 20;

/// Bidder valuation over bundles of capacity items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ValuationRepr", into = "ValuationRepr")]
pub enum Valuation {
    /// `V(U) = Σ_{j∈U} v_j`.
    Additive(Vec<f64>),
    /// `V(U) = f(|U|)` with `f(0) = 0` and nonincreasing, nonnegative
    /// increments. Bundles larger than the table keep the last value.
    SymmetricConcave(Vec<f64>),
    /// Explicit value per subset of `k` items, indexed by bitmask.
    Table { k: usize, values: Vec<f64> },
}

impl Valuation {
    pub fn additive(v: Vec<f64>) -> Result<Self, AuctionError> {
        let val = Valuation::Additive(v);
        val.validate()?;
        Ok(val)
    }

    pub fn symmetric_concave(f: Vec<f64>) -> Result<Self, AuctionError> {
        let val = Valuation::SymmetricConcave(f);
        val.validate()?;
        Ok(val)
    }

    /// Table over `k` items from a mask-indexed value vector of length `2^k`.
    pub fn table(k: usize, values: Vec<f64>) -> Result<Self, AuctionError> {
        let val = Valuation::Table { k, values };
        val.validate()?;
        Ok(val)
    }

    /// Table from `(bundle, value)` pairs covering every nonempty subset of
    /// the items they mention; the empty bundle may be omitted.
    pub fn table_from_entries(entries: impl IntoIterator<Item = (Bundle, f64)>) -> Result<Self, AuctionError> {
        let entries: Vec<(Bundle, f64)> = entries.into_iter().collect();
        let k = entries.iter().map(|(b, _)| b.span()).max().unwrap_or(0);
        if k > MAX_TABLE_ITEMS {
            return Err(AuctionError::TooManyItems { k, max: MAX_TABLE_ITEMS });
        }
        let mut values = vec![f64::NAN; 1 << k];
        values[0] = 0.0;
        for (b, v) in entries {
            values[b.mask() as usize] = v;
        }
        if let Some(missing) = values.iter().position(|v| v.is_nan()) {
            return Err(AuctionError::InvalidValuation(format!(
                "table has no value for {}",
                Bundle::from_mask(missing as u32)
            )));
        }
        Valuation::table(k, values)
    }

    pub fn validate(&self) -> Result<(), AuctionError> {
        let bad = |msg: String| Err(AuctionError::InvalidValuation(msg));
        match self {
            Valuation::Additive(v) => {
                if v.len() > MAX_TABLE_ITEMS {
                    return Err(AuctionError::TooManyItems {
                        k: v.len(),
                        max: MAX_TABLE_ITEMS,
                    });
                }
                if let Some(j) = v.iter().position(|x| !x.is_finite() || *x < 0.0) {
                    return bad(format!("additive value of item {} must be finite and nonnegative", j + 1));
                }
            }
            Valuation::SymmetricConcave(f) => {
                if f.is_empty() || f[0] != 0.0 {
                    return bad("symmetric concave table must start with f(0) = 0".into());
                }
                if f.iter().any(|x| !x.is_finite()) {
                    return bad("symmetric concave table must be finite".into());
                }
                let inc: Vec<f64> = f.windows(2).map(|w| w[1] - w[0]).collect();
                if inc.iter().any(|d| *d < 0.0) {
                    return bad("symmetric concave table must be nondecreasing".into());
                }
                if inc.windows(2).any(|w| w[1] > w[0]) {
                    return bad("symmetric concave increments must be nonincreasing".into());
                }
            }
            Valuation::Table { k, values } => {
                if *k > MAX_TABLE_ITEMS {
                    return Err(AuctionError::TooManyItems {
                        k: *k,
                        max: MAX_TABLE_ITEMS,
                    });
                }
                if values.len() != 1 << k {
                    return bad(format!("table over {k} items needs {} values, got {}", 1 << k, values.len()));
                }
                if values[0] != 0.0 {
                    return bad("table value of the empty bundle must be 0".into());
                }
                if values.iter().any(|x| !x.is_finite()) {
                    return bad("table values must be finite".into());
                }
            }
        }
        Ok(())
    }

    /// Item count the valuation is defined over.
    pub fn n_items(&self) -> usize {
        match self {
            Valuation::Additive(v) => v.len(),
            Valuation::SymmetricConcave(f) => f.len() - 1,
            Valuation::Table { k, .. } => *k,
        }
    }

    /// Whether bundles over `k` items can be evaluated.
    pub fn supports(&self, k: usize) -> bool {
        match self {
            Valuation::SymmetricConcave(_) => true,
            _ => k <= self.n_items(),
        }
    }

    pub fn value(&self, bundle: Bundle) -> Result<f64, AuctionError> {
        match self {
            Valuation::Additive(v) => {
                if bundle.span() > v.len() {
                    return Err(AuctionError::UnknownItem { item: bundle.span() });
                }
                Ok(bundle.items().map(|j| v[j]).sum())
            }
            Valuation::SymmetricConcave(f) => Ok(f[bundle.len().min(f.len() - 1)]),
            Valuation::Table { k, values } => {
                if bundle.span() > *k {
                    return Err(AuctionError::UnknownItem { item: bundle.span() });
                }
                Ok(values[bundle.mask() as usize])
            }
        }
    }

    /// Values of every subset of `k` items, indexed by mask.
    pub fn value_table(&self, k: usize) -> Result<Vec<f64>, AuctionError> {
        if k > MAX_TABLE_ITEMS {
            return Err(AuctionError::TooManyItems { k, max: MAX_TABLE_ITEMS });
        }
        if !self.supports(k) {
            return Err(AuctionError::UnknownItem { item: k });
        }
        let mut out = vec![0.0; 1 << k];
        match self {
            Valuation::Additive(v) => {
                for mask in 1..out.len() {
                    let low = mask.trailing_zeros() as usize;
                    out[mask] = out[mask & (mask - 1)] + v[low];
                }
            }
            Valuation::SymmetricConcave(f) => {
                for (mask, slot) in out.iter_mut().enumerate() {
                    *slot = f[(mask.count_ones() as usize).min(f.len() - 1)];
                }
            }
            Valuation::Table { values, .. } => out.copy_from_slice(&values[..1 << k]),
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum ValuationRepr {
    Additive { v: Vec<f64> },
    SymmetricConcave { f: Vec<f64> },
    Table { values: BTreeMap<String, f64> },
}

fn parse_bundle_key(key: &str) -> Result<Bundle, String> {
    let inner = key.trim().trim_start_matches('{').trim_end_matches('}').trim();
    if inner.is_empty() {
        return Ok(Bundle::EMPTY);
    }
    let items: Vec<usize> = inner
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| format!("bad bundle key {key:?}")))
        .collect::<Result<_, _>>()?;
    Bundle::from_one_based(&items).ok_or_else(|| format!("bad bundle key {key:?}"))
}

impl TryFrom<ValuationRepr> for Valuation {
    type Error = AuctionError;

    fn try_from(r: ValuationRepr) -> Result<Self, Self::Error> {
        match r {
            ValuationRepr::Additive { v } => Valuation::additive(v),
            ValuationRepr::SymmetricConcave { f } => Valuation::symmetric_concave(f),
            ValuationRepr::Table { values } => {
                let entries = values
                    .into_iter()
                    .map(|(k, v)| parse_bundle_key(&k).map(|b| (b, v)))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(AuctionError::InvalidValuation)?;
                Valuation::table_from_entries(entries)
            }
        }
    }
}

impl From<Valuation> for ValuationRepr {
    fn from(v: Valuation) -> Self {
        match v {
            Valuation::Additive(v) => ValuationRepr::Additive { v },
            Valuation::SymmetricConcave(f) => ValuationRepr::SymmetricConcave { f },
            Valuation::Table { values, .. } => ValuationRepr::Table {
                values: values
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(m, v)| {
                        let key = Bundle::from_mask(m as u32)
                            .to_one_based()
                            .iter()
                            .map(|i| i.to_string())
                            .collect::<Vec<_>>()
                            .join(",");
                        (key, *v)
                    })
                    .collect(),
            },
        }
    }
}

/// `V(bundle)`.
pub fn eval_valuation(val: &Valuation, bundle: Bundle) -> Result<f64, AuctionError> {
    val.value(bundle)
}
