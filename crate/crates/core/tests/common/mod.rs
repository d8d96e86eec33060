//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use gridcap_core::auction::{Bundle, Valuation};
use gridcap_core::network::RadialNetwork;

/// Edge flows from subtree sums, walking parent pointers from every bus.
pub fn subtree_flows(net: &RadialNetwork, x: &[f64]) -> Vec<f64> {
    let mut edge_of_child = vec![usize::MAX; net.n_buses()];
    for (e, &(_, child)) in net.edges().iter().enumerate() {
        edge_of_child[child] = e;
    }
    let mut flows = vec![0.0; net.n_edges()];
    for (v, &xv) in x.iter().enumerate() {
        let mut u = v;
        while let Some(p) = net.parent(u) {
            flows[edge_of_child[u]] += xv;
            u = p;
        }
    }
    flows
}

/// Rockafellar objective `ζ + E[(X - ζ)^+] / (1 - α)` minimized over the
/// sample points, where the piecewise-linear minimum is attained.
pub fn cvar_by_breakpoints(values: &[f64], alpha: f64) -> f64 {
    let ns = values.len() as f64;
    values
        .iter()
        .map(|&z| z + values.iter().map(|v| (v - z).max(0.0)).sum::<f64>() / ((1.0 - alpha) * ns))
        .fold(f64::INFINITY, f64::min)
}

/// Best total value from splitting the first `k` items among bidders (items
/// may stay unassigned), by a subset dynamic program.
pub fn optimal_welfare(bidders: &[Valuation], k: usize) -> f64 {
    let full = 1usize << k;
    let mut best = vec![0.0f64; full];
    for v in bidders {
        let table: Vec<f64> = (0..full)
            .map(|m| v.value(Bundle::from_mask(m as u32)).unwrap())
            .collect();
        let mut next = best.clone();
        for s in 0..full {
            // every split of s into this bidder's bundle t and the rest
            let mut t = s;
            loop {
                let cand = table[t] + best[s & !t];
                if cand > next[s] {
                    next[s] = cand;
                }
                if t == 0 {
                    break;
                }
                t = (t - 1) & s;
            }
        }
        best = next;
    }
    best[full - 1]
}

/// Demand set by direct enumeration, with an absolute tie tolerance.
pub fn brute_demand(v: &Valuation, prices: &[f64]) -> Vec<Bundle> {
    let k = prices.len();
    let surplus = |m: u32| {
        let b = Bundle::from_mask(m);
        v.value(b).unwrap() - b.items().map(|j| prices[j]).sum::<f64>()
    };
    let best = (0..1u32 << k).map(surplus).fold(f64::NEG_INFINITY, f64::max);
    (0..1u32 << k)
        .filter(|&m| surplus(m) >= best - 1e-9)
        .map(Bundle::from_mask)
        .collect()
}
