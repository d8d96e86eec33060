mod common;

use proptest::prelude::*;

use gridcap_core::risk::{box_worst_case, empirical_cvar, BoxBounds, RiskLevel};
use gridcap_core::DenseMatrix;

use common::cvar_by_breakpoints;

fn level(a: f64) -> RiskLevel {
    RiskLevel::new(a).unwrap()
}

fn sample_and_alpha() -> impl Strategy<Value = (Vec<f64>, f64)> {
    prop::collection::vec(-50.0f64..50.0, 1..40).prop_flat_map(|v| {
        let max_alpha = 1.0 - 1.0 / v.len() as f64;
        (Just(v), 0.0..=max_alpha)
    })
}

proptest! {
    #[test]
    fn cvar_matches_breakpoint_minimum((v, a) in sample_and_alpha()) {
        let closed = empirical_cvar(&v, level(a)).unwrap();
        prop_assert!((closed - cvar_by_breakpoints(&v, a)).abs() < 1e-8);
    }

    #[test]
    fn cvar_lies_between_mean_and_max((v, a) in sample_and_alpha()) {
        let c = empirical_cvar(&v, level(a)).unwrap();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(c >= mean - 1e-9 && c <= max + 1e-9);
    }

    #[test]
    fn cvar_nondecreasing_in_alpha((v, a) in sample_and_alpha(), t in 0.0f64..1.0) {
        let b = a * t;
        prop_assert!(empirical_cvar(&v, level(b)).unwrap() <= empirical_cvar(&v, level(a)).unwrap() + 1e-9);
    }

    #[test]
    fn cvar_monotone_under_dominance((v, a) in sample_and_alpha(), bump in prop::collection::vec(0.0f64..5.0, 40)) {
        let w: Vec<f64> = v.iter().zip(&bump).map(|(x, d)| x + d).collect();
        prop_assert!(empirical_cvar(&v, level(a)).unwrap() <= empirical_cvar(&w, level(a)).unwrap() + 1e-9);
    }

    #[test]
    fn cvar_translation_and_scaling((v, a) in sample_and_alpha(), shift in -100.0f64..100.0, scale in 0.0f64..10.0) {
        let base = empirical_cvar(&v, level(a)).unwrap();
        let shifted: Vec<f64> = v.iter().map(|x| x + shift).collect();
        prop_assert!((empirical_cvar(&shifted, level(a)).unwrap() - base - shift).abs() < 1e-9);
        let scaled: Vec<f64> = v.iter().map(|x| x * scale).collect();
        prop_assert!((empirical_cvar(&scaled, level(a)).unwrap() - base * scale).abs() < 1e-8);
    }

    #[test]
    fn box_worst_case_matches_vertices(
        rows in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 5), 1..4),
        lo in prop::collection::vec(-3.0f64..0.0, 5),
        width in prop::collection::vec(0.0f64..3.0, 5),
    ) {
        let s = DenseMatrix::from_rows(&rows).unwrap();
        let hi: Vec<f64> = lo.iter().zip(&width).map(|(l, w)| l + w).collect();
        let b = BoxBounds::new(lo.clone(), hi.clone()).unwrap();
        let (up, down) = box_worst_case(&s, &b).unwrap();
        for e in 0..s.nrows() {
            let mut best_up = f64::NEG_INFINITY;
            let mut best_down = f64::INFINITY;
            for mask in 0..32u32 {
                let l: Vec<f64> = (0..5).map(|i| if mask & (1 << i) != 0 { hi[i] } else { lo[i] }).collect();
                let f: f64 = s.row(e).iter().zip(&l).map(|(a, x)| a * x).sum();
                best_up = best_up.max(f);
                best_down = best_down.min(f);
            }
            prop_assert!((up[e] - best_up).abs() < 1e-9);
            prop_assert!((down[e] - best_down).abs() < 1e-9);
        }
    }
}
