//! Seeded random instances and the randomized sweeps built on them.
//!
//! Every generator takes a `u64` seed and is deterministic across runs and
//! platforms (ChaCha8).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::auction::{AuctionConfig, CapacityItem, Valuation};
use crate::capacity::{
    solve_flex, verify_firm_total_optimality, verify_flex_total_optimality, OptimalityCheck, TotalsReport,
    TreePolyhedron,
};
use crate::network::{build_path_matrix, NetworkSpec, RadialNetwork};
use crate::risk::{box_worst_case, BoxBounds, RiskLevel, ScenarioSet};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random rooted tree on buses `1..=n` (1-based edges, parent listed first),
/// with each bus attached to a uniformly chosen earlier bus and a shuffled
/// edge order.
pub fn random_tree(rng: &mut impl Rng, n: usize) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (2..=n).map(|i| (rng.gen_range(1..i), i)).collect();
    edges.shuffle(rng);
    edges
}

fn random_demand(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut d: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 || rng.gen_bool(0.2) {
                0.0
            } else {
                rng.gen_range(5.0..20.0)
            }
        })
        .collect();
    if d.iter().all(|x| *x == 0.0) && n > 1 {
        d[n - 1] = rng.gen_range(5.0..20.0);
    }
    d
}

/// Line limits `worst + u · Σ_{downstream} d` with `u ∈ [0.2, 0.9]`, so that
/// zero capacity is feasible and most instances are scarce.
fn tight_limits(
    rng: &mut impl Rng,
    net_shape: &RadialNetwork,
    worst_up: &[f64],
    worst_down: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let path = build_path_matrix(net_shape);
    let downstream = path.flows(net_shape.demand());
    let upper = (0..net_shape.n_edges())
        .map(|e| worst_up[e] + rng.gen_range(0.2..0.9) * downstream[e].max(1.0))
        .collect();
    let lower = (0..net_shape.n_edges())
        .map(|e| worst_down[e] - rng.gen_range(1.0..5.0))
        .collect();
    (upper, lower)
}

fn shape(rng: &mut impl Rng, n: usize) -> RadialNetwork {
    let edges = random_tree(rng, n);
    let demand = random_demand(rng, n);
    let mut cap: Vec<f64> = (0..n).map(|_| rng.gen_range(8.0..30.0)).collect();
    cap[0] = f64::INFINITY;
    RadialNetwork::new(NetworkSpec {
        n_buses: n,
        edges,
        line_upper: vec![f64::INFINITY; n - 1],
        line_lower: vec![f64::NEG_INFINITY; n - 1],
        withdrawal_cap: cap,
        demand,
    })
    .expect("generated tree is radial")
}

#[derive(Debug, Clone)]
pub struct FirmInstance {
    pub seed: u64,
    pub network: RadialNetwork,
    pub bounds: BoxBounds,
}

/// Radial network with `2..=max_buses` buses and a background-load box
/// `l̲ ∈ [-3, 0]`, `l̄ ∈ [0, 3]`.
pub fn random_firm_instance(seed: u64, max_buses: usize) -> FirmInstance {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_buses.max(2));
    let net = shape(&mut r, n);
    let lo: Vec<f64> = (0..n).map(|_| r.gen_range(-3.0..=0.0)).collect();
    let hi: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..=3.0)).collect();
    let bounds = BoxBounds::new(lo, hi).expect("ordered box");
    let (up, down) = box_worst_case(&build_path_matrix(&net).to_dense(), &bounds).expect("matching sizes");
    let (upper, lower) = tight_limits(&mut r, &net, &up, &down);
    // headroom on withdrawal caps keeps c = 0 feasible
    let cap: Vec<f64> = net
        .withdrawal_cap()
        .iter()
        .zip(bounds.upper())
        .map(|(q, l)| q + l.max(0.0))
        .collect();
    let mut spec = net.to_spec();
    spec.line_upper = upper;
    spec.line_lower = lower;
    spec.withdrawal_cap = cap;
    FirmInstance {
        seed,
        network: RadialNetwork::new(spec).expect("same topology"),
        bounds,
    }
}

#[derive(Debug, Clone)]
pub struct FlexInstance {
    pub seed: u64,
    pub network: RadialNetwork,
    pub scenarios: ScenarioSet,
}

/// Radial network with `2..=max_buses` buses and `10..=max_scenarios`
/// background-load scenarios around a random mean.
pub fn random_flex_instance(seed: u64, max_buses: usize, max_scenarios: usize) -> FlexInstance {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_buses.max(2));
    let ns = r.gen_range(10..=max_scenarios.max(10));
    let net = shape(&mut r, n);
    let mean: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..2.0)).collect();
    let samples: Vec<Vec<f64>> = (0..ns)
        .map(|_| mean.iter().map(|m| m + r.gen_range(-3.0..3.0)).collect())
        .collect();
    let scenarios = ScenarioSet::new(samples).expect("rectangular");
    let hull = scenarios.hull();
    let (up, down) = box_worst_case(&build_path_matrix(&net).to_dense(), &hull).expect("matching sizes");
    let (upper, lower) = tight_limits(&mut r, &net, &up, &down);
    let cap: Vec<f64> = net
        .withdrawal_cap()
        .iter()
        .zip(hull.upper())
        .map(|(q, l)| q + l.max(0.0))
        .collect();
    let mut spec = net.to_spec();
    spec.line_upper = upper;
    spec.line_lower = lower;
    spec.withdrawal_cap = cap;
    FlexInstance {
        seed,
        network: RadialNetwork::new(spec).expect("same topology"),
        scenarios,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub seed: u64,
    pub n_buses: usize,
    pub alpha: Option<f64>,
    pub report: TotalsReport,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub records: Vec<SweepRecord>,
    /// Seeds whose solve failed, with the error.
    pub errors: Vec<(u64, String)>,
    /// Seeds where the total shrank as the tolerated risk grew.
    pub monotonicity_violations: Vec<u64>,
}

impl SweepSummary {
    pub fn scarce(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.report.status == OptimalityCheck::Verified)
            .count()
    }

    pub fn failures(&self) -> Vec<&SweepRecord> {
        self.records.iter().filter(|r| r.report.holds == Some(false)).collect()
    }

    pub fn max_scarce_gap(&self) -> f64 {
        self.records
            .iter()
            .filter(|r| r.report.status == OptimalityCheck::Verified)
            .map(|r| r.report.gap)
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.failures().is_empty() && self.monotonicity_violations.is_empty()
    }
}

/// Firm QP-versus-LP totals on `count` random trees with up to `max_buses`
/// buses, seeds `base_seed..base_seed + count`.
pub fn firm_total_sweep(base_seed: u64, count: usize, max_buses: usize) -> SweepSummary {
    let mut out = SweepSummary::default();
    for seed in base_seed..base_seed + count as u64 {
        let inst = random_firm_instance(seed, max_buses);
        match verify_firm_total_optimality(&inst.network, &inst.bounds, None) {
            Ok(report) => out.records.push(SweepRecord {
                seed,
                n_buses: inst.network.n_buses(),
                alpha: None,
                report,
            }),
            Err(e) => out.errors.push((seed, e.to_string())),
        }
    }
    out
}

/// Confidence levels swept per flexible instance, from least to most risk.
pub const SWEEP_ALPHAS: [f64; 3] = [0.9, 0.5, 0.0];

/// Flexible QP-versus-LP totals at every level in [`SWEEP_ALPHAS`], plus a
/// check that the QP total is nondecreasing in the tolerated risk.
pub fn flex_total_sweep(base_seed: u64, count: usize, max_buses: usize, max_scenarios: usize) -> SweepSummary {
    let mut out = SweepSummary::default();
    for seed in base_seed..base_seed + count as u64 {
        let inst = random_flex_instance(seed, max_buses, max_scenarios);
        let mut totals = Vec::new();
        for a in SWEEP_ALPHAS {
            let level = RiskLevel::new(a).expect("valid level");
            match verify_flex_total_optimality(&inst.network, &inst.scenarios, level, None) {
                Ok(report) => {
                    totals.push(report.qp_total);
                    out.records.push(SweepRecord {
                        seed,
                        n_buses: inst.network.n_buses(),
                        alpha: Some(a),
                        report,
                    });
                }
                Err(e) => out.errors.push((seed, format!("alpha {a}: {e}"))),
            }
        }
        if totals.windows(2).any(|w| w[1] < w[0] - 1e-6) {
            out.monotonicity_violations.push(seed);
        }
    }
    out
}

/// Flexible totals for one instance across several levels (helper for
/// monotonicity checks).
pub fn flex_totals(inst: &FlexInstance, alphas: &[f64]) -> Result<Vec<f64>, String> {
    alphas
        .iter()
        .map(|&a| {
            let level = RiskLevel::new(a).map_err(|e| e.to_string())?;
            solve_flex(&inst.network, &inst.scenarios, level, None)
                .map(|s| s.total)
                .map_err(|e| e.to_string())
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct AugmentationCase {
    pub seed: u64,
    pub network: RadialNetwork,
    pub c: Vec<f64>,
    pub c_hat: Vec<f64>,
}

fn random_point(r: &mut impl Rng, poly: &TreePolyhedron, net: &RadialNetwork) -> Vec<f64> {
    let n = net.n_buses();
    let mut c: Vec<f64> = (0..n)
        .map(|i| {
            if net.is_requesting(i) {
                r.gen_range(0.0..=1.0) * poly.cap()[i]
            } else {
                0.0
            }
        })
        .collect();
    // shrink until inside, then push a random bus up to a boundary so that
    // some edges end up tight
    while !poly.is_feasible(&c) {
        c.iter_mut().for_each(|x| *x *= 0.5);
    }
    let requests = net.request_set();
    if let Some(&j) = requests.choose(r) {
        if r.gen_bool(0.7) {
            let slack = poly.slack(&c);
            let room = net
                .root_path_edges(j)
                .iter()
                .map(|&e| slack[e])
                .fold(poly.cap()[j] - c[j], f64::min);
            c[j] += room.max(0.0);
        }
    }
    c
}

/// A tree with finite limits and two feasible capacity vectors where the
/// second has the larger requested total.
pub fn random_augmentation_case(seed: u64, max_buses: usize) -> AugmentationCase {
    let mut r = rng(seed);
    loop {
        let n = r.gen_range(3..=max_buses.max(3));
        let net = shape(&mut r, n);
        let zero = vec![0.0; n - 1];
        let (upper, lower) = tight_limits(&mut r, &net, &zero, &zero);
        let net = net.with_line_limits(upper, lower).expect("finite ordered limits");
        let poly = TreePolyhedron::from_network(&net);
        for _ in 0..20 {
            let a = random_point(&mut r, &poly, &net);
            let b = random_point(&mut r, &poly, &net);
            let total = |v: &[f64]| net.request_set().iter().map(|&i| v[i]).sum::<f64>();
            let (c, c_hat) = if total(&a) < total(&b) { (a, b) } else { (b, a) };
            if total(&c_hat) - total(&c) > 1e-3 {
                return AugmentationCase {
                    seed,
                    network: net,
                    c,
                    c_hat,
                };
            }
        }
    }
}

/// Random auction with `1..=max_bidders` additive or symmetric concave
/// bidders over `1..=max_items` items with integer values up to 30.
pub fn random_auction(seed: u64, max_bidders: usize, max_items: usize, epsilon: f64) -> AuctionConfig {
    let mut r = rng(seed);
    let m = r.gen_range(1..=max_bidders.max(1));
    let k = r.gen_range(1..=max_items.max(1));
    let items: Vec<CapacityItem> = (0..k)
        .map(|j| CapacityItem::firm(r.gen_range(1.0..10.0), j + 2).expect("positive capacity"))
        .collect();
    let bidders = (0..m).map(|_| random_valuation(&mut r, k)).collect();
    AuctionConfig::new(epsilon, items, bidders).expect("valid config")
}

/// Additive or symmetric concave valuation over `k` items with integer
/// entries in `0..=30`.
pub fn random_valuation(r: &mut impl Rng, k: usize) -> Valuation {
    if r.gen_bool(0.5) {
        Valuation::additive((0..k).map(|_| r.gen_range(0..=30) as f64).collect()).expect("nonnegative")
    } else {
        let mut inc: Vec<f64> = (0..k).map(|_| r.gen_range(0..=30) as f64).collect();
        inc.sort_by(|a, b| b.total_cmp(a));
        let f = std::iter::once(0.0)
            .chain(inc.iter().scan(0.0, |acc, d| {
                *acc += d;
                Some(*acc)
            }))
            .collect();
        Valuation::symmetric_concave(f).expect("concave")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let a = random_firm_instance(11, 10);
        let b = random_firm_instance(11, 10);
        assert_eq!(a.network, b.network);
        assert_eq!(a.bounds, b.bounds);
        let x = random_auction(5, 4, 6, 1.0);
        assert_eq!(x, random_auction(5, 4, 6, 1.0));
    }

    #[test]
    fn trees_are_radial() {
        let mut r = rng(3);
        for n in 2..12 {
            let edges = random_tree(&mut r, n);
            assert_eq!(edges.len(), n - 1);
        }
    }

    #[test]
    fn augmentation_cases_are_feasible() {
        for seed in 0..20 {
            let case = random_augmentation_case(seed, 8);
            let poly = TreePolyhedron::from_network(&case.network);
            assert!(poly.is_feasible(&case.c));
            assert!(poly.is_feasible(&case.c_hat));
        }
    }

    #[test]
    fn small_firm_sweep() {
        let s = firm_total_sweep(0, 10, 6);
        assert!(s.errors.is_empty(), "{:?}", s.errors);
        assert!(s.failures().is_empty());
    }
}
