mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gridcap_core::auction::{
    check_gross_substitutes, demand_correspondence, efficiency_gap, max_surplus, run_saa, verify_ce, Bundle,
    Valuation,
};
use gridcap_core::sweep::{random_auction, random_valuation};

use common::{brute_demand, optimal_welfare};

fn valuation(seed: u64, k: usize) -> Valuation {
    random_valuation(&mut ChaCha8Rng::seed_from_u64(seed), k)
}

fn cheapest_k_surplus(f: &[f64], prices: &[f64]) -> f64 {
    let mut sorted = prices.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    (0..=prices.len())
        .map(|n| f[n.min(f.len() - 1)] - sorted[..n].iter().sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn demand_matches_enumeration(seed in any::<u64>(), k in 1usize..7, prices in prop::collection::vec(0u8..20, 7)) {
        let v = valuation(seed, k);
        let p: Vec<f64> = prices[..k].iter().map(|&x| x as f64 * 0.5).collect();
        let mut got = demand_correspondence(&v, &p).unwrap();
        got.sort();
        let mut want = brute_demand(&v, &p);
        want.sort();
        prop_assert_eq!(got, want);
        if let Valuation::SymmetricConcave(f) = &v {
            prop_assert!((max_surplus(&v, &p).unwrap() - cheapest_k_surplus(f, &p)).abs() < 1e-9);
        }
    }

    #[test]
    fn substitutes_families_pass_the_gs_check(seed in any::<u64>(), k in 1usize..6) {
        let v = valuation(seed, k);
        let report = check_gross_substitutes(&v, 40, 35.0, seed).unwrap();
        prop_assert!(report.passes, "{:?}", report.counterexample);
    }

    #[test]
    fn saa_log_replays_to_final_prices(seed in any::<u64>(), eps in prop::sample::select(vec![0.5, 1.0, 2.0])) {
        let cfg = random_auction(seed, 4, 5, eps);
        let out = run_saa(&cfg).unwrap();
        let k = cfg.n_items();
        let mut price = vec![0.0f64; k];
        let mut holder: Vec<Option<usize>> = vec![None; k];
        for round in 1..=out.rounds_used {
            let bids: Vec<_> = out.log.iter().filter(|b| b.round == round).collect();
            prop_assert!(!bids.is_empty());
            for b in &bids {
                prop_assert_ne!(holder[b.item], Some(b.bidder));
                match holder[b.item] {
                    Some(_) => prop_assert!((b.amount - price[b.item] - eps).abs() < 1e-12),
                    None => prop_assert_eq!(b.amount, 0.0),
                }
            }
            for j in 0..k {
                let mut top: Option<(f64, usize)> = None;
                for b in bids.iter().filter(|b| b.item == j) {
                    if top.map_or(true, |(a, w)| b.amount > a || (b.amount == a && b.bidder < w)) {
                        top = Some((b.amount, b.bidder));
                    }
                }
                if let Some((a, w)) = top {
                    prop_assert!(a >= price[j]);
                    price[j] = a;
                    holder[j] = Some(w);
                }
            }
        }
        prop_assert_eq!(&price, &out.final_prices);
        for (b, u) in out.allocation.iter().enumerate() {
            let mine = Bundle::from_items((0..k).filter(|&j| holder[j] == Some(b)));
            prop_assert_eq!(*u, mine);
        }
    }

    #[test]
    fn saa_stops_within_price_bound(seed in any::<u64>(), eps in prop::sample::select(vec![0.5, 1.0, 2.0])) {
        // every bidding round either places an unbid item or lifts a price by
        // eps, and nobody pays past its full-bundle value
        let cfg = random_auction(seed, 4, 5, eps);
        let out = run_saa(&cfg).unwrap();
        let k = cfg.n_items();
        let top = cfg
            .bidders
            .iter()
            .map(|v| v.value(Bundle::full(k)).unwrap())
            .fold(0.0, f64::max);
        let bound = k + (k as f64 * (top / eps + 1.0)).ceil() as usize + 1;
        prop_assert!(out.rounds_used <= bound, "{} rounds, bound {}", out.rounds_used, bound);
    }

    #[test]
    fn saa_outcome_is_a_modified_equilibrium(seed in any::<u64>(), eps in prop::sample::select(vec![0.5, 1.0, 2.0])) {
        let cfg = random_auction(seed, 4, 5, eps);
        let out = run_saa(&cfg).unwrap();
        let ce = verify_ce(&cfg.items, &cfg.bidders, &out.final_prices, &out.allocation, Some(eps)).unwrap();
        prop_assert!(ce.holds, "{:?}", ce.violations);
        let eff = efficiency_gap(&cfg.items, &cfg.bidders, &out.allocation).unwrap();
        let k = cfg.n_items();
        prop_assert!((eff.optimal_welfare - optimal_welfare(&cfg.bidders, k)).abs() < 1e-9);
        prop_assert!(eff.gap <= eps * k as f64 + 1e-9, "gap {} with eps {}", eff.gap, eps);
    }
}
