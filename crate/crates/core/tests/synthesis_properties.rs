mod common;

use common::arb_game;
use num::Signed;
use polieq::enumeration::optimize;
use polieq::equilibrium::Mode;
use polieq::synthesis::build_schedule;
use polieq::Rational;
use proptest::prelude::*;

const STEPS: u64 = 100_000;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quota_counts_track_the_ratios(g in arb_game()) {
        for mode in [Mode::political(0), Mode::nash(0)] {
            let Some(w) = optimize(&g, mode).unwrap() else { continue };
            let mut s = build_schedule(&g, &w).unwrap();
            if s.islands().len() != 1 {
                continue;
            }
            s.fast_forward(STEPS);
            let bound = Rational::from_integer((10 * s.unit()).into()) / Rational::from_integer(STEPS.into());
            let (visits, taken) = s.counters();
            for e in w.profile.support() {
                let v = g.edge(e).0;
                let observed = Rational::new(taken[e].into(), visits[v].into());
                let target = &w.profile.edge_ratios[e] / &w.profile.vertex_ratios[v];
                prop_assert!((&observed - &target).abs() <= bound, "edge {}: {} vs {}", e, observed, target);
            }
        }
    }

    #[test]
    fn transfers_vanish(g in arb_game()) {
        for mode in [Mode::political(0), Mode::nash(0)] {
            let Some(w) = optimize(&g, mode).unwrap() else { continue };
            let mut s = build_schedule(&g, &w).unwrap();
            s.fast_forward(1_000_000);
            prop_assert!(s.stats().transfer_fraction() <= 0.01);
        }
    }
}
