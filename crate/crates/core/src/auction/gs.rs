use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bundle::Bundle;
use super::demand::{argmax_surplus, price_table};
use super::valuation::Valuation;
use super::AuctionError;

/// Largest item count the randomized check accepts.
pub const MAX_GS_ITEMS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsCounterexample {
    pub prices: Vec<f64>,
    pub raised_prices: Vec<f64>,
    /// Demanded bundle at `prices` whose unchanged-price items no demanded
    /// bundle at `raised_prices` keeps.
    pub bundle: Bundle,
}

/// Outcome of a randomized check. A pass is evidence, not proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsReport {
    pub passes: bool,
    pub trials: usize,
    pub counterexample: Option<GsCounterexample>,
}

fn demand(values: &[f64], prices: &[f64]) -> Vec<Bundle> {
    argmax_surplus(values, &price_table(prices)).1
}

fn violation(values: &[f64], p: &[f64], q: &[f64]) -> Option<Bundle> {
    let unchanged = Bundle::from_items((0..p.len()).filter(|&j| q[j] == p[j]));
    let after = demand(values, q);
    demand(values, p).into_iter().find(|u| {
        let keep = u.intersection(unchanged);
        !after.iter().any(|w| keep.is_subset_of(*w))
    })
}

fn check_pair(p: &[f64], q: &[f64]) -> Result<(), AuctionError> {
    if p.len() != q.len() {
        return Err(AuctionError::InvalidPrices("price vectors differ in length".into()));
    }
    if p.iter().zip(q).any(|(a, b)| !(a.is_finite() && b.is_finite() && *a >= 0.0 && b >= a)) {
        return Err(AuctionError::InvalidPrices(
            "need finite nonnegative prices with raised >= base".into(),
        ));
    }
    Ok(())
}

/// A bundle `U ∈ D(p)` such that no `U' ∈ D(p')` contains the items of `U`
/// whose price did not change, if one exists.
pub fn gs_violation(val: &Valuation, p: &[f64], raised: &[f64]) -> Result<Option<Bundle>, AuctionError> {
    check_pair(p, raised)?;
    if p.len() > MAX_GS_ITEMS {
        return Err(AuctionError::TooManyItems {
            k: p.len(),
            max: MAX_GS_ITEMS,
        });
    }
    let values = val.value_table(p.len())?;
    Ok(violation(&values, p, raised))
}

/// Randomized gross-substitutes test over the valuation's own item set.
///
/// Even trials draw integer prices in `0..=price_cap` (ties between bundles
/// are common there, which is where violations hide); odd trials draw
/// continuous prices in `[0, price_cap]`. Each trial raises a random
/// nonempty subset of coordinates.
pub fn check_gross_substitutes(
    val: &Valuation,
    trials: usize,
    price_cap: f64,
    seed: u64,
) -> Result<GsReport, AuctionError> {
    let k = val.n_items();
    if k > MAX_GS_ITEMS {
        return Err(AuctionError::TooManyItems { k, max: MAX_GS_ITEMS });
    }
    if !(price_cap.is_finite() && price_cap > 0.0) {
        return Err(AuctionError::InvalidPrices(format!("price cap {price_cap} must be positive")));
    }
    let values = val.value_table(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let int_cap = price_cap.floor().max(1.0) as u64;
    for t in 0..trials {
        let integer = t % 2 == 0;
        let draw = |rng: &mut ChaCha8Rng, lo: f64| {
            if integer {
                lo + rng.gen_range(1..=int_cap) as f64
            } else {
                lo + rng.gen_range(f64::EPSILON..=price_cap)
            }
        };
        let p: Vec<f64> = (0..k)
            .map(|_| {
                if integer {
                    rng.gen_range(0..=int_cap) as f64
                } else {
                    rng.gen_range(0.0..=price_cap)
                }
            })
            .collect();
        let mut raise: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.5)).collect();
        if k > 0 && !raise.iter().any(|r| *r) {
            raise[rng.gen_range(0..k)] = true;
        }
        let q: Vec<f64> = p
            .iter()
            .zip(&raise)
            .map(|(&pj, &r)| if r { draw(&mut rng, pj) } else { pj })
            .collect();
        if let Some(bundle) = violation(&values, &p, &q) {
            return Ok(GsReport {
                passes: false,
                trials: t + 1,
                counterexample: Some(GsCounterexample {
                    prices: p,
                    raised_prices: q,
                    bundle,
                }),
            });
        }
    }
    Ok(GsReport {
        passes: true,
        trials,
        counterexample: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complements() -> Valuation {
        Valuation::table(2, vec![0.0, 0.0, 0.0, 10.0]).unwrap()
    }

    #[test]
    fn complements_fail_at_known_prices() {
        let u = gs_violation(&complements(), &[1.0, 1.0], &[20.0, 1.0]).unwrap();
        assert_eq!(u, Some(Bundle::from_items([0, 1])));
    }

    #[test]
    fn complements_fail_randomly() {
        let r = check_gross_substitutes(&complements(), 500, 20.0, 7).unwrap();
        assert!(!r.passes);
        let cx = r.counterexample.unwrap();
        assert_eq!(
            gs_violation(&complements(), &cx.prices, &cx.raised_prices).unwrap(),
            Some(cx.bundle)
        );
    }

    #[test]
    fn substitutes_pass() {
        let add = Valuation::additive(vec![20.0, 0.0, 30.0, 15.0]).unwrap();
        assert!(check_gross_substitutes(&add, 500, 40.0, 1).unwrap().passes);
        let sym = Valuation::symmetric_concave(vec![0.0, 30.0, 50.0, 55.0, 60.0]).unwrap();
        assert!(check_gross_substitutes(&sym, 500, 40.0, 2).unwrap().passes);
    }

    #[test]
    fn rejects_lowered_prices() {
        assert!(gs_violation(&complements(), &[2.0, 2.0], &[1.0, 2.0]).is_err());
    }
}
