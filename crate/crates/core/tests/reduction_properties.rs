mod common;

use common::{arb_game, arb_positive, random_lasso};
use polieq::enumeration::optimize;
use polieq::equilibrium::Mode;
use polieq::generate::random_cnf;
use polieq::reductions::{add_social_player, make_zero_sum, reduce_3sat, CnfFormula, ABSORBING, DICTATOR, SOCIETY};
use polieq::rational::int;
use polieq::{lasso_payoff, reachable, sccs, validate, Game, Rational, VertexSet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_formula(max_variables: usize, max_clauses: usize) -> impl Strategy<Value = CnfFormula> {
    any::<u64>().prop_map(move |seed| random_cnf(&mut ChaCha8Rng::seed_from_u64(seed), max_variables, max_clauses))
}

/// 0/1 rewards, as the zero-sum transform expects.
fn arb_binary_game() -> impl Strategy<Value = Game> {
    arb_game().prop_map(|g| {
        let mut g = g;
        for p in 0..g.player_count() {
            g = g.map_rewards(p, |_, r| if *r > int(0) { int(1) } else { int(0) });
        }
        g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reduction_has_the_stated_shape(f in arb_formula(4, 6)) {
        let g = reduce_3sat(&f);
        let (n, m) = (f.variables(), f.clauses().len());
        prop_assert_eq!(g.player_count(), 2 * n + 1);
        prop_assert_eq!(g.vertex_count(), 5 * n + 4 * m + 2);
        prop_assert!(validate(&g.to_document()).is_empty());
        let q = reachable(&g, &VertexSet::all(&g));
        for c in sccs(&g, &q) {
            let names = c.names(&g);
            let absorbing = names == [ABSORBING];
            let ring = names.iter().all(|v| v.starts_with("w_"));
            prop_assert!(absorbing || ring, "play can loop in {:?}", names);
        }
    }

    #[test]
    fn zero_sum_edges_balance(g in arb_binary_game()) {
        let z = make_zero_sum(&g).unwrap();
        for e in 0..z.edge_count() {
            let sum: Rational = z.players().map(|p| z.reward(e, p).clone()).sum();
            prop_assert_eq!(sum, int(0));
        }
    }

    #[test]
    fn society_is_a_weighted_sum(g in arb_game(), w in proptest::collection::vec(arb_positive(), 3), seed in any::<u64>()) {
        let weights = w[..g.player_count()].to_vec();
        let social = add_social_player(&g, &weights).unwrap();
        let society = social.player(SOCIETY).unwrap();
        let play = random_lasso(&g, g.initial(), seed);
        let expected: Rational = g.players().map(|p| &weights[p] * lasso_payoff(&g, &play, p).unwrap()).sum();
        prop_assert_eq!(lasso_payoff(&social, &play, society).unwrap(), expected);

        let mut doc = social.to_document();
        doc.players.retain(|p| p != SOCIETY);
        for edge in &mut doc.edges {
            edge.rewards.shift_remove(SOCIETY);
        }
        prop_assert_eq!(Game::from_document(&doc).unwrap(), g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn optimum_tracks_satisfiability(f in arb_formula(4, 4)) {
        let g = reduce_3sat(&f);
        let d = g.player(DICTATOR).unwrap();
        let sat = f.is_satisfiable();
        let w = optimize(&g, Mode::political(d)).unwrap().unwrap();
        prop_assert_eq!(w.optimum().clone(), int(sat as i64));
        let z = make_zero_sum(&g).unwrap();
        let wz = optimize(&z, Mode::political(d)).unwrap().unwrap();
        prop_assert_eq!(wz.optimum().clone(), if sat { int(1) } else { int(-1) });
    }
}
